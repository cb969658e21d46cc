#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/geometry.hpp"

namespace pcqa {

/// Integer voxel coordinate.
struct Coord {
    std::int32_t x = 0, y = 0, z = 0;

    constexpr std::int32_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    friend constexpr bool operator==(Coord, Coord) = default;
};

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
    friend constexpr bool operator==(Color, Color) = default;
};

/// BT.601 luma of an 8-bit color.
constexpr double luma(Color c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

struct Point {
    Coord g;
    Color c;
    friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline Vec3 to_vec(Coord g) { return {double(g.x), double(g.y), double(g.z)}; }

/// A point with real-valued coordinates, as stored in a raw (not yet
/// voxelized) PLY file.
struct RawPoint {
    Vec3 position;
    Color c;
};

struct PointCloud {
    std::vector<Point> points;
    std::string name;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Point& operator[](std::size_t i) const { return points[i]; }

    /// Equality on the point list only; names are labels.
    friend bool operator==(const PointCloud& a, const PointCloud& b) { return a.points == b.points; }
};

struct BoundingStats {
    Vec3 min;
    Vec3 max;
    Vec3 center;  ///< arithmetic mean of the coordinates
    double diagonal = 0;
};

namespace detail {

struct CoordHash {
    std::size_t operator()(Coord g) const noexcept {
        std::uint64_t h = std::uint64_t(std::uint32_t(g.x));
        h = h * 0x9E3779B97F4A7C15ull ^ std::uint32_t(g.y);
        h = h * 0x9E3779B97F4A7C15ull ^ std::uint32_t(g.z);
        return std::size_t(h ^ (h >> 29));
    }
};

}  // namespace detail

/// Removes points whose coordinates repeat an earlier point, keeping the
/// first occurrence in input order.
inline PointCloud remove_duplicates(const PointCloud& cloud) {
    PointCloud out;
    out.name = cloud.name;
    out.points.reserve(cloud.size());
    std::unordered_set<Coord, detail::CoordHash> seen;
    seen.reserve(cloud.size() * 2);
    for (const auto& p : cloud.points)
        if (seen.insert(p.g).second) out.points.push_back(p);
    return out;
}

inline bool has_unique_coords(const PointCloud& cloud) {
    std::unordered_set<Coord, detail::CoordHash> seen;
    seen.reserve(cloud.size() * 2);
    for (const auto& p : cloud.points)
        if (!seen.insert(p.g).second) return false;
    return true;
}

inline BoundingStats bounding_stats(const PointCloud& cloud) {
    require(!cloud.empty(), "bounding_stats: empty cloud");
    BoundingStats s;
    s.min = s.max = to_vec(cloud[0].g);
    // Integer sums are exact for any realistic cloud size.
    std::array<long double, 3> sum{};
    for (const auto& p : cloud.points) {
        for (int a = 0; a < 3; ++a) {
            const double v = p.g[a];
            s.min[a] = std::min(s.min[a], v);
            s.max[a] = std::max(s.max[a], v);
            sum[a] += v;
        }
    }
    const auto n = static_cast<long double>(cloud.size());
    s.center = {double(sum[0] / n), double(sum[1] / n), double(sum[2] / n)};
    s.diagonal = norm(s.max - s.min);
    return s;
}

/// Maps raw coordinates into an integer grid whose longest bounding-box
/// axis spans [0, steps]; duplicated voxels are dropped (first wins).
inline PointCloud normalize_to_grid(std::span<const RawPoint> raw, int steps = 1000,
                                    std::string name = {}) {
    require(!raw.empty(), "normalize_to_grid: empty cloud");
    require(steps > 0, "normalize_to_grid: steps must be positive");
    Vec3 lo = raw[0].position, hi = raw[0].position;
    for (const auto& p : raw)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p.position[a]);
            hi[a] = std::max(hi[a], p.position[a]);
        }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    if (!(extent > 0)) throw PreconditionError("normalize_to_grid: degenerate cloud (all points identical)");
    const double scale = steps / extent;

    PointCloud out;
    out.name = std::move(name);
    out.points.reserve(raw.size());
    for (const auto& p : raw) {
        Coord g{static_cast<std::int32_t>(std::lround((p.position.x - lo.x) * scale)),
                static_cast<std::int32_t>(std::lround((p.position.y - lo.y) * scale)),
                static_cast<std::int32_t>(std::lround((p.position.z - lo.z) * scale))};
        out.points.push_back({g, p.c});
    }
    return remove_duplicates(out);
}

inline PointCloud normalize_to_grid(const PointCloud& cloud, int steps = 1000) {
    std::vector<RawPoint> raw;
    raw.reserve(cloud.size());
    for (const auto& p : cloud.points) raw.push_back({to_vec(p.g), p.c});
    return normalize_to_grid(raw, steps, cloud.name);
}

}  // namespace pcqa
