#pragma once

// PLY reader/writer for colored point clouds. Supports `ascii 1.0` and
// `binary_little_endian 1.0`; only the vertex element is materialized.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

enum class PlyFormat { ascii, binary_le };

namespace ply_detail {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

inline std::optional<Scalar> parse_scalar(std::string_view t) {
    if (t == "char" || t == "int8") return Scalar::i8;
    if (t == "uchar" || t == "uint8") return Scalar::u8;
    if (t == "short" || t == "int16") return Scalar::i16;
    if (t == "ushort" || t == "uint16") return Scalar::u16;
    if (t == "int" || t == "int32") return Scalar::i32;
    if (t == "uint" || t == "uint32") return Scalar::u32;
    if (t == "float" || t == "float32") return Scalar::f32;
    if (t == "double" || t == "float64") return Scalar::f64;
    return std::nullopt;
}

inline std::size_t scalar_size(Scalar s) {
    switch (s) {
        case Scalar::i8:
        case Scalar::u8: return 1;
        case Scalar::i16:
        case Scalar::u16: return 2;
        case Scalar::i32:
        case Scalar::u32:
        case Scalar::f32: return 4;
        case Scalar::f64: return 8;
    }
    return 0;
}

template <typename T>
T load(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

inline double read_scalar(Scalar s, const unsigned char* p) {
    switch (s) {
        case Scalar::i8: return load<std::int8_t>(p);
        case Scalar::u8: return load<std::uint8_t>(p);
        case Scalar::i16: return load<std::int16_t>(p);
        case Scalar::u16: return load<std::uint16_t>(p);
        case Scalar::i32: return load<std::int32_t>(p);
        case Scalar::u32: return load<std::uint32_t>(p);
        case Scalar::f32: return load<float>(p);
        case Scalar::f64: return load<double>(p);
    }
    return 0;
}

struct Property {
    std::string name;
    Scalar type = Scalar::f32;
    bool is_list = false;
    Scalar count_type = Scalar::u8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> props;
};

struct Header {
    PlyFormat format = PlyFormat::ascii;
    std::vector<Element> elements;
    std::size_t body_offset = 0;  // byte offset of the first body byte
    std::size_t body_line = 0;    // 1-based line number of the first body line
};

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    return {std::istream_iterator<std::string>(is), std::istream_iterator<std::string>()};
}

inline Header parse_header(const std::string& data) {
    Header h;
    std::size_t pos = 0, line_no = 0;
    bool saw_format = false;
    auto next_line = [&]() -> std::optional<std::string> {
        if (pos >= data.size()) return std::nullopt;
        auto end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        std::string line = data.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        ++line_no;
        return line;
    };
    auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError("PLY header line " + std::to_string(line_no) + ": " + msg);
    };

    auto first = next_line();
    if (!first || *first != "ply") throw fail("missing 'ply' magic");
    for (;;) {
        auto line = next_line();
        if (!line) throw fail("unexpected end of file before end_header");
        auto tok = split_ws(*line);
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "end_header") break;
        if (tok[0] == "format") {
            if (tok.size() != 3) throw fail("malformed format line");
            if (tok[1] == "ascii") h.format = PlyFormat::ascii;
            else if (tok[1] == "binary_little_endian") h.format = PlyFormat::binary_le;
            else if (tok[1] == "binary_big_endian") throw fail("binary_big_endian is not supported");
            else throw fail("unknown format '" + tok[1] + "'");
            saw_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw fail("malformed element line");
            Element e;
            e.name = tok[1];
            try {
                e.count = std::stoull(tok[2]);
            } catch (const std::exception&) {
                throw fail("bad element count '" + tok[2] + "'");
            }
            h.elements.push_back(std::move(e));
        } else if (tok[0] == "property") {
            if (h.elements.empty()) throw fail("property before any element");
            Property p;
            if (tok.size() == 5 && tok[1] == "list") {
                auto ct = parse_scalar(tok[2]);
                auto it = parse_scalar(tok[3]);
                if (!ct || !it) throw fail("unknown list property type");
                p.is_list = true;
                p.count_type = *ct;
                p.type = *it;
                p.name = tok[4];
            } else if (tok.size() == 3) {
                auto t = parse_scalar(tok[1]);
                if (!t) throw fail("unknown property type '" + tok[1] + "'");
                p.type = *t;
                p.name = tok[2];
            } else {
                throw fail("malformed property line");
            }
            h.elements.back().props.push_back(std::move(p));
        } else {
            throw fail("unexpected keyword '" + tok[0] + "'");
        }
    }
    if (!saw_format) throw fail("missing format line");
    h.body_offset = pos;
    h.body_line = line_no + 1;
    return h;
}

struct VertexLayout {
    int x = -1, y = -1, z = -1, r = -1, g = -1, b = -1;
};

inline VertexLayout vertex_layout(const Element& e) {
    VertexLayout v;
    for (int i = 0; i < int(e.props.size()); ++i) {
        const auto& p = e.props[i];
        if (p.is_list) continue;
        if (p.name == "x") v.x = i;
        else if (p.name == "y") v.y = i;
        else if (p.name == "z") v.z = i;
        else if (p.name == "red") v.r = i;
        else if (p.name == "green") v.g = i;
        else if (p.name == "blue") v.b = i;
    }
    if (v.x < 0 || v.y < 0 || v.z < 0) throw ParseError("PLY header: missing coordinate property (x, y, z)");
    if (v.r < 0 || v.g < 0 || v.b < 0) throw ParseError("PLY header: missing color property (red, green, blue)");
    return v;
}

inline std::uint8_t to_channel(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp<long>(r, 0, 255));
}

inline std::vector<RawPoint> read_ascii(const std::string& data, const Header& h) {
    std::size_t pos = h.body_offset, line_no = h.body_line - 1;
    std::vector<RawPoint> out;
    auto next_line = [&]() -> std::string {
        if (pos >= data.size())
            throw ParseError("PLY body truncated at line " + std::to_string(line_no + 1));
        auto end = data.find('\n', pos);
        if (end == std::string::npos) end = data.size();
        std::string line = data.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        return line;
    };
    for (const auto& e : h.elements) {
        if (e.name != "vertex") {
            for (std::size_t i = 0; i < e.count; ++i) next_line();
            continue;
        }
        const auto lay = vertex_layout(e);
        out.reserve(e.count);
        for (std::size_t i = 0; i < e.count; ++i) {
            std::string line = next_line();
            const char* s = line.c_str();
            std::vector<double> vals;
            vals.reserve(e.props.size());
            for (const auto& p : e.props) {
                char* end = nullptr;
                double v = std::strtod(s, &end);
                if (end == s)
                    throw ParseError("PLY body line " + std::to_string(line_no) + ": expected value for '" +
                                     p.name + "'");
                s = end;
                if (p.is_list) {
                    for (long k = 0; k < long(v); ++k) {
                        std::strtod(s, &end);
                        if (end == s)
                            throw ParseError("PLY body line " + std::to_string(line_no) + ": short list");
                        s = end;
                    }
                }
                vals.push_back(v);
            }
            out.push_back({{vals[lay.x], vals[lay.y], vals[lay.z]},
                           {to_channel(vals[lay.r]), to_channel(vals[lay.g]), to_channel(vals[lay.b])}});
        }
        return out;
    }
    throw ParseError("PLY header: no vertex element");
}

inline std::vector<RawPoint> read_binary(const std::string& data, const Header& h) {
    const auto* base = reinterpret_cast<const unsigned char*>(data.data());
    std::size_t pos = h.body_offset;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size())
            throw ParseError("PLY body truncated at byte offset " + std::to_string(pos) + " (need " +
                             std::to_string(n) + " more bytes, file has " + std::to_string(data.size()) + ")");
    };
    for (const auto& e : h.elements) {
        const bool is_vertex = e.name == "vertex";
        std::optional<VertexLayout> lay;
        if (is_vertex) lay = vertex_layout(e);
        std::vector<RawPoint> out;
        if (is_vertex) out.reserve(e.count);
        std::vector<double> vals(e.props.size());
        for (std::size_t i = 0; i < e.count; ++i) {
            for (std::size_t k = 0; k < e.props.size(); ++k) {
                const auto& p = e.props[k];
                if (p.is_list) {
                    need(scalar_size(p.count_type));
                    const double n = read_scalar(p.count_type, base + pos);
                    pos += scalar_size(p.count_type);
                    const std::size_t bytes = std::size_t(n) * scalar_size(p.type);
                    need(bytes);
                    pos += bytes;
                    vals[k] = n;
                } else {
                    need(scalar_size(p.type));
                    vals[k] = read_scalar(p.type, base + pos);
                    pos += scalar_size(p.type);
                }
            }
            if (is_vertex)
                out.push_back({{vals[lay->x], vals[lay->y], vals[lay->z]},
                               {to_channel(vals[lay->r]), to_channel(vals[lay->g]), to_channel(vals[lay->b])}});
        }
        if (is_vertex) return out;
    }
    throw ParseError("PLY header: no vertex element");
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace ply_detail

/// Parses PLY content held in memory, keeping real-valued coordinates.
inline std::vector<RawPoint> parse_ply_raw(const std::string& data) {
    const auto h = ply_detail::parse_header(data);
    return h.format == PlyFormat::ascii ? ply_detail::read_ascii(data, h) : ply_detail::read_binary(data, h);
}

inline std::vector<RawPoint> load_ply_raw(const std::filesystem::path& path) {
    try {
        return parse_ply_raw(ply_detail::slurp(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Rounds real coordinates to the nearest integer voxel, preserving order.
inline PointCloud to_voxel_cloud(std::span<const RawPoint> raw, std::string name = {}) {
    PointCloud cloud;
    cloud.name = std::move(name);
    cloud.points.reserve(raw.size());
    for (const auto& p : raw)
        cloud.points.push_back({{static_cast<std::int32_t>(std::lround(p.position.x)),
                                 static_cast<std::int32_t>(std::lround(p.position.y)),
                                 static_cast<std::int32_t>(std::lround(p.position.z))},
                                p.c});
    return cloud;
}

inline PointCloud load_ply(const std::filesystem::path& path) {
    return to_voxel_cloud(load_ply_raw(path), path.stem().string());
}

/// Serializes a cloud; coordinates are written as float, which is exact for
/// integers below 2^24.
inline std::string encode_ply(const PointCloud& cloud, PlyFormat format) {
    require(!cloud.empty(), "save_ply: empty cloud");
    constexpr std::int32_t kExact = 1 << 24;
    for (const auto& p : cloud.points)
        for (std::int32_t v : {p.g.x, p.g.y, p.g.z})
            if (v <= -kExact || v >= kExact)
                throw PreconditionError("save_ply: coordinate " + std::to_string(v) + " is not exact as float");
    std::string out;
    out += "ply\n";
    out += format == PlyFormat::ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";
    if (format == PlyFormat::ascii) {
        for (const auto& p : cloud.points) {
            out += std::to_string(p.g.x) + ' ' + std::to_string(p.g.y) + ' ' + std::to_string(p.g.z) + ' ' +
                   std::to_string(p.c.r) + ' ' + std::to_string(p.c.g) + ' ' + std::to_string(p.c.b) + '\n';
        }
    } else {
        out.reserve(out.size() + cloud.size() * 15);
        for (const auto& p : cloud.points) {
            for (std::int32_t v : {p.g.x, p.g.y, p.g.z}) {
                const float f = static_cast<float>(v);
                char buf[4];
                std::memcpy(buf, &f, 4);
                out.append(buf, 4);
            }
            out.push_back(static_cast<char>(p.c.r));
            out.push_back(static_cast<char>(p.c.g));
            out.push_back(static_cast<char>(p.c.b));
        }
    }
    return out;
}

inline void save_ply(const PointCloud& cloud, const std::filesystem::path& path,
                     PlyFormat format = PlyFormat::binary_le) {
    const std::string bytes = encode_ply(cloud, format);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open '" + path.string() + "' for writing");
    os.write(bytes.data(), std::streamsize(bytes.size()));
    if (!os) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace pcqa
