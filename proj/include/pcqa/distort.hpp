#pragma once

// Non-codec distortion generators: octree downsampling and additive
// Gaussian noise on geometry and color.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

struct DownsampleSpec {
    int level = 8;
};

struct GaussianNoiseSpec {
    double sigma_geo = 0;
    double sigma_col = 0;
    std::uint64_t seed = 0;
};

struct DistortionSpec {
    std::variant<DownsampleSpec, GaussianNoiseSpec> kind;

    /// Stable short label, also used for output file names.
    std::string label() const {
        if (const auto* d = std::get_if<DownsampleSpec>(&kind)) return "downsample_N" + std::to_string(d->level);
        const auto& g = std::get<GaussianNoiseSpec>(kind);
        auto num = [](double v) {
            std::string s = std::to_string(v);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        };
        return "gaussian_g" + num(g.sigma_geo) + "_c" + num(g.sigma_col) + "_s" + std::to_string(g.seed);
    }
};

/// Octree cell of each point: the bounding cube (side = longest box axis)
/// split into 2^level intervals per axis. Cell indices are computed in exact
/// integer arithmetic; the upper boundary folds into the last cell.
inline std::vector<std::array<std::int64_t, 3>> octree_cells(const PointCloud& cloud, int level) {
    require(!cloud.empty(), "octree_cells: empty cloud");
    const auto s = bounding_stats(cloud);
    const auto extent = static_cast<std::int64_t>(std::max({s.max.x - s.min.x, s.max.y - s.min.y, s.max.z - s.min.z}));
    const std::int64_t cells = std::int64_t{1} << level;
    std::vector<std::array<std::int64_t, 3>> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (int a = 0; a < 3; ++a) {
            if (extent == 0) {
                out[i][std::size_t(a)] = 0;
                continue;
            }
            const std::int64_t off = std::int64_t(cloud[i].g[a]) - std::int64_t(s.min[a]);
            out[i][std::size_t(a)] = std::min((off * cells) / extent, cells - 1);
        }
    return out;
}

/// Merges all points sharing an octree cell into one point at the rounded
/// centroid with the rounded mean color. Output order follows the first
/// point of each cell in input order.
inline PointCloud octree_downsample(const PointCloud& cloud, int level) {
    if (level < 1 || level > 10)
        throw PreconditionError("octree_downsample: level must be in [1, 10], got " + std::to_string(level));
    const auto cells = octree_cells(cloud, level);

    struct Acc {
        std::int64_t g[3] = {0, 0, 0};
        std::int64_t c[3] = {0, 0, 0};
        std::int64_t n = 0;
    };
    const std::int64_t side = std::int64_t{1} << level;
    std::unordered_map<std::int64_t, std::size_t> slot;
    slot.reserve(cloud.size());
    std::vector<Acc> acc;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& k = cells[i];
        const std::int64_t key = (k[0] * side + k[1]) * side + k[2];
        auto [it, fresh] = slot.try_emplace(key, acc.size());
        if (fresh) acc.emplace_back();
        Acc& a = acc[it->second];
        const Point& p = cloud[i];
        a.g[0] += p.g.x;
        a.g[1] += p.g.y;
        a.g[2] += p.g.z;
        a.c[0] += p.c.r;
        a.c[1] += p.c.g;
        a.c[2] += p.c.b;
        ++a.n;
    }

    auto avg = [](std::int64_t sum, std::int64_t n) { return std::lround(double(sum) / double(n)); };
    PointCloud out;
    out.name = cloud.name;
    out.points.reserve(acc.size());
    for (const auto& a : acc)
        out.points.push_back({{std::int32_t(avg(a.g[0], a.n)), std::int32_t(avg(a.g[1], a.n)), std::int32_t(avg(a.g[2], a.n))},
                              {std::uint8_t(avg(a.c[0], a.n)), std::uint8_t(avg(a.c[1], a.n)), std::uint8_t(avg(a.c[2], a.n))}});
    return out;
}

/// Seeded standard-normal source: std::mt19937_64 feeding a Box-Muller
/// transform. Unlike std::normal_distribution the output sequence is fixed
/// across standard library implementations.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    /// Uniform on (0, 1] from the top 53 bits.
    double uniform_open() { return double((engine_() >> 11) + 1) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0;
    bool has_spare_ = false;
};

/// Adds i.i.d. zero-mean Gaussian noise to every coordinate (sigma_geo) and
/// color channel (sigma_col), rounds to integers, clamps colors to [0, 255],
/// and drops points whose rounded coordinates repeat an earlier point.
/// Draw order per point: x, y, z, r, g, b.
inline PointCloud gaussian_noise(const PointCloud& cloud, double sigma_geo, double sigma_col, std::uint64_t seed) {
    require(sigma_geo >= 0 && sigma_col >= 0, "gaussian_noise: standard deviations must be non-negative");
    GaussianSource normal(seed);
    PointCloud noisy;
    noisy.name = cloud.name;
    noisy.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        Point q;
        q.g.x = std::int32_t(std::lround(p.g.x + sigma_geo * normal()));
        q.g.y = std::int32_t(std::lround(p.g.y + sigma_geo * normal()));
        q.g.z = std::int32_t(std::lround(p.g.z + sigma_geo * normal()));
        auto channel = [&](std::uint8_t v) {
            return std::uint8_t(std::clamp<long>(std::lround(v + sigma_col * normal()), 0, 255));
        };
        q.c.r = channel(p.c.r);
        q.c.g = channel(p.c.g);
        q.c.b = channel(p.c.b);
        noisy.points.push_back(q);
    }
    return remove_duplicates(noisy);
}

inline PointCloud apply_distortion(const PointCloud& cloud, const DistortionSpec& spec) {
    if (const auto* d = std::get_if<DownsampleSpec>(&spec.kind)) return octree_downsample(cloud, d->level);
    const auto& g = std::get<GaussianNoiseSpec>(spec.kind);
    return gaussian_noise(cloud, g.sigma_geo, g.sigma_col, g.seed);
}

}  // namespace pcqa
