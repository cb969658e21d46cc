#pragma once

// Minimal PNG writer (8-bit RGB, 8-bit gray, 1-bit gray) on top of zlib.

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/image.hpp"

namespace pcqa {

namespace png_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v >> 24));
    out.push_back(char(v >> 16));
    out.push_back(char(v >> 8));
    out.push_back(char(v));
}

inline void chunk(std::string& out, const char* type, const std::string& payload) {
    put_u32(out, std::uint32_t(payload.size()));
    const std::size_t start = out.size();
    out.append(type, 4);
    out += payload;
    const auto crc = crc32(0, reinterpret_cast<const Bytef*>(out.data() + start), uInt(out.size() - start));
    put_u32(out, std::uint32_t(crc));
}

/// `rows` holds filter-type-prefixed scanlines.
inline std::string encode(int width, int height, std::uint8_t bit_depth, std::uint8_t color_type,
                          const std::vector<unsigned char>& rows) {
    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put_u32(ihdr, std::uint32_t(width));
    put_u32(ihdr, std::uint32_t(height));
    ihdr.push_back(char(bit_depth));
    ihdr.push_back(char(color_type));
    ihdr.append(3, '\0');  // deflate, adaptive filter, no interlace
    chunk(out, "IHDR", ihdr);

    uLongf cap = compressBound(uLong(rows.size()));
    std::string z(cap, '\0');
    if (compress2(reinterpret_cast<Bytef*>(z.data()), &cap, rows.data(), uLong(rows.size()), 6) != Z_OK)
        throw Error("PNG: deflate failed");
    z.resize(cap);
    chunk(out, "IDAT", z);
    chunk(out, "IEND", {});
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace png_detail

inline std::string encode_png(const RgbImage& img) {
    std::vector<unsigned char> rows;
    rows.reserve(std::size_t(img.height()) * (1 + 3 * std::size_t(img.width())));
    for (int y = 0; y < img.height(); ++y) {
        rows.push_back(0);
        for (int x = 0; x < img.width(); ++x) {
            const Color c = img(x, y);
            rows.insert(rows.end(), {c.r, c.g, c.b});
        }
    }
    return png_detail::encode(img.width(), img.height(), 8, 2, rows);
}

/// 1-bit mask, nonzero = set.
inline std::string encode_png(const Mask& mask) {
    std::vector<unsigned char> rows;
    const int stride = (mask.width() + 7) / 8;
    for (int y = 0; y < mask.height(); ++y) {
        rows.push_back(0);
        std::vector<unsigned char> line(std::size_t(stride), 0);
        for (int x = 0; x < mask.width(); ++x)
            if (mask(x, y)) line[std::size_t(x / 8)] |= std::uint8_t(0x80u >> (x % 8));
        rows.insert(rows.end(), line.begin(), line.end());
    }
    return png_detail::encode(mask.width(), mask.height(), 1, 0, rows);
}

/// 8-bit grayscale; values are linearly mapped from [lo, hi] and clamped.
inline std::string encode_png(const LumaImage& plane, double lo, double hi) {
    std::vector<unsigned char> rows;
    const double span = hi > lo ? hi - lo : 1.0;
    for (int y = 0; y < plane.height(); ++y) {
        rows.push_back(0);
        for (int x = 0; x < plane.width(); ++x) {
            const double v = std::clamp((plane(x, y) - lo) / span, 0.0, 1.0);
            rows.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
        }
    }
    return png_detail::encode(plane.width(), plane.height(), 8, 0, rows);
}

inline void write_png(const std::filesystem::path& path, const RgbImage& img) {
    png_detail::write_file(path, encode_png(img));
}
inline void write_png(const std::filesystem::path& path, const Mask& mask) {
    png_detail::write_file(path, encode_png(mask));
}
inline void write_png(const std::filesystem::path& path, const LumaImage& plane, double lo, double hi) {
    png_detail::write_file(path, encode_png(plane, lo, hi));
}

}  // namespace pcqa
