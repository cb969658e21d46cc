#pragma once

// Synthetic data and exhaustive-definition oracles shared by the unit and
// acceptance suites. Oracles here deliberately avoid the library's fast
// paths (no k-d tree, no sorting-based ranks).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "pcqa/pcqa.hpp"

namespace pcqa::testing {

inline std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

/// Deterministic per-voxel texture: smooth stripes plus hashed speckle.
inline Color texture(int x, int y, int z, int variant) {
    std::uint32_t h = std::uint32_t(x * 73856093) ^ std::uint32_t(y * 19349663) ^ std::uint32_t(z * 83492791) ^
                      std::uint32_t(variant * 2654435761u);
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    h ^= h >> 15;
    const double speckle = double(h % 61) - 30.0;
    const double a = 0.11 + 0.03 * variant, b = 0.07 + 0.02 * variant;
    const double r = 128 + 70 * std::sin(a * x + 0.5 * variant) + 0.5 * speckle;
    const double g = 128 + 70 * std::sin(b * y + 0.3 * z) + 0.5 * speckle;
    const double bl = 128 + 60 * std::cos(0.05 * (x + z) + variant) + 0.5 * speckle;
    return {clamp8(r), clamp8(g), clamp8(bl)};
}

/// Integer voxels within half a unit of an implicit surface f = 0, where
/// `dist` approximates the signed distance. Scanned over [-extent, extent]^3
/// then shifted by `offset`.
inline PointCloud voxel_surface(const std::function<double(double, double, double)>& dist, int extent, int variant,
                                Coord offset, std::string name) {
    PointCloud c;
    c.name = std::move(name);
    for (int z = -extent; z <= extent; ++z)
        for (int y = -extent; y <= extent; ++y)
            for (int x = -extent; x <= extent; ++x)
                if (std::abs(dist(x, y, z)) <= 0.5) {
                    const Coord g{x + offset.x, y + offset.y, z + offset.z};
                    c.points.push_back({g, texture(g.x, g.y, g.z, variant)});
                }
    return c;
}

inline PointCloud sphere_cloud(int radius, int variant = 0) {
    return voxel_surface([r = double(radius)](double x, double y, double z) { return std::sqrt(x * x + y * y + z * z) - r; },
                         radius + 1, variant, {radius + 10, radius + 10, radius + 10}, "sphere" + std::to_string(variant));
}

inline PointCloud cube_cloud(int half, int variant = 1) {
    return voxel_surface(
        [h = double(half)](double x, double y, double z) {
            return std::max({std::abs(x), std::abs(y), std::abs(z)}) - h;
        },
        half + 1, variant, {half + 5, half + 5, half + 5}, "cube" + std::to_string(variant));
}

inline PointCloud torus_cloud(int major, int minor, int variant = 2) {
    return voxel_surface(
        [R = double(major), r = double(minor)](double x, double y, double z) {
            const double q = std::sqrt(x * x + y * y) - R;
            return std::sqrt(q * q + z * z) - r;
        },
        major + minor + 1, variant, {major + minor + 3, major + minor + 3, minor + 3}, "torus" + std::to_string(variant));
}

inline PointCloud cylinder_cloud(int radius, int half_height, int variant = 3) {
    return voxel_surface(
        [r = double(radius), h = double(half_height)](double x, double y, double z) {
            const double side = std::sqrt(x * x + y * y) - r;
            const double cap = std::abs(z) - h;
            return std::max(side, cap);
        },
        std::max(radius, half_height) + 1, variant, {radius + 4, radius + 4, half_height + 4},
        "cylinder" + std::to_string(variant));
}

inline PointCloud bumpy_sphere_cloud(int radius, int variant = 4) {
    return voxel_surface(
        [r = double(radius)](double x, double y, double z) {
            const double len = std::sqrt(x * x + y * y + z * z);
            if (len == 0) return -r;
            const double bump = 6.0 * std::sin(5 * std::atan2(y, x)) * std::sin(4 * std::acos(z / len));
            return len - (r + bump);
        },
        radius + 8, variant, {radius + 12, radius + 12, radius + 12}, "bumpy" + std::to_string(variant));
}

/// Sphere shell at the 1000-step grid scale: for every lattice column along
/// each axis, the two rounded surface crossings. Dense enough to leave no
/// holes at projection scale 0.5.
inline PointCloud shell_sphere_cloud(int radius, int variant = 0) {
    PointCloud c;
    c.name = "shell" + std::to_string(variant);
    const int o = radius + 20;
    for (int axis = 0; axis < 3; ++axis)
        for (int u = -radius; u <= radius; ++u)
            for (int v = -radius; v <= radius; ++v) {
                const double h = double(radius) * radius - double(u) * u - double(v) * v;
                if (h < 0) continue;
                const int w = int(std::lround(std::sqrt(h)));
                for (int sign : {-1, 1}) {
                    int p[3];
                    p[axis] = sign * w;
                    p[(axis + 1) % 3] = u;
                    p[(axis + 2) % 3] = v;
                    const Coord g{p[0] + o, p[1] + o, p[2] + o};
                    c.points.push_back({g, texture(g.x, g.y, g.z, variant)});
                }
            }
    return remove_duplicates(c);
}

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, int span) {
    std::uniform_int_distribution<int> coord(0, span);
    std::uniform_int_distribution<int> chan(0, 255);
    PointCloud c;
    c.name = "random";
    for (std::size_t i = 0; i < n; ++i)
        c.points.push_back({{coord(rng), coord(rng), coord(rng)},
                            {std::uint8_t(chan(rng)), std::uint8_t(chan(rng)), std::uint8_t(chan(rng))}});
    return c;
}

// --------------------------------------------------------------------------
// Oracles

/// Exhaustive nearest neighbour with lowest-index tie-break.
inline Neighbor brute_nearest(const PointCloud& cloud, Vec3 q) {
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 d = to_vec(cloud[i].g) - q;
        const double d2 = d.x * d.x + d.y * d.y + d.z * d.z;
        if (d2 < best.dist2) best = {std::uint32_t(i), d2};
    }
    return best;
}

/// Exhaustive k nearest by full sort of (distance, index).
inline std::vector<Neighbor> brute_knn(const PointCloud& cloud, Vec3 q, std::size_t k) {
    std::vector<Neighbor> all;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 d = to_vec(cloud[i].g) - q;
        all.push_back({std::uint32_t(i), d.x * d.x + d.y * d.y + d.z * d.z});
    }
    std::sort(all.begin(), all.end());
    all.resize(std::min(k, all.size()));
    return all;
}

enum class Agg { mean, max };

/// Symmetric nearest-neighbour error by O(n^2) scans; err(a_index, b_index, a_to_b)
/// gives the per-point error with `a_to_b` telling which direction is scanned.
template <typename Err>
double brute_symmetric(const PointCloud& ref, const PointCloud& dis, Agg agg, Err&& err) {
    auto one = [&](const PointCloud& src, const PointCloud& dst, bool src_is_dis) {
        double acc = 0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const auto nb = brute_nearest(dst, to_vec(src[i].g));
            const double e = src_is_dis ? err(nb.index, i) : err(i, nb.index);
            acc = agg == Agg::mean ? acc + e : std::max(acc, e);
        }
        return agg == Agg::mean ? acc / double(src.size()) : acc;
    };
    return std::max(one(dis, ref, true), one(ref, dis, false));
}

/// F(d1, d2) density, integrated by Simpson's rule below.
inline double f_pdf(double x, double d1, double d2) {
    if (x <= 0) return 0;
    const double lognum = 0.5 * d1 * std::log(d1 * x) + 0.5 * d2 * std::log(d2) - 0.5 * (d1 + d2) * std::log(d1 * x + d2);
    const double logbeta = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2);
    return std::exp(lognum - logbeta) / x;
}

inline double f_cdf(double x, double d1, double d2) {
    const int n = 20000;  // even
    const double h = x / n;
    double s = f_pdf(0, d1, d2) + f_pdf(x, d1, d2);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f_pdf(i * h, d1, d2);
    return s * h / 3;
}

inline double f_quantile(double p, double d1, double d2) {
    double lo = 0, hi = 20;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f_cdf(mid, d1, d2) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Zero-mean vector with unit sample variance.
inline std::vector<double> unit_residuals(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z(0, 1);
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / double(n);
    double ss = 0;
    for (auto& x : v) {
        x -= m;
        ss += x * x;
    }
    const double sd = std::sqrt(ss / double(n - 1));
    for (auto& x : v) x /= sd;
    return v;
}

inline std::vector<double> scaled(std::vector<double> v, double f) {
    for (auto& x : v) x *= f;
    return v;
}

/// Pearson from explicit sums in long double.
inline double oracle_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    long double sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
    }
    const long double ma = sa / a.size(), mb = sb / b.size();
    long double cab = 0, caa = 0, cbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cab += (a[i] - ma) * (b[i] - mb);
        caa += (a[i] - ma) * (a[i] - ma);
        cbb += (b[i] - mb) * (b[i] - mb);
    }
    return double(cab / std::sqrt(caa * cbb));
}

/// Rank by counting: rank(i) = 1 + #{j: v_j < v_i} + (#{j != i: v_j == v_i}) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] < v[i]) ++less;
            else if (v[j] == v[i] && j != i) ++equal;
        }
        r[i] = 1 + less + equal / 2;
    }
    return r;
}

inline double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return oracle_pearson(oracle_ranks(a), oracle_ranks(b));
}

/// Per-pixel argmax-depth rasterization by exhaustive scan over points.
inline ProjectedImage oracle_project(const PointCloud& cloud, Vec3 t_r, const Viewpoint& view, double s,
                                     CanvasSize canvas, Color bg) {
    ProjectedImage out{RgbImage(canvas.width, canvas.height, bg),
                       Plane<double>(canvas.width, canvas.height, -std::numeric_limits<double>::infinity()),
                       Mask(canvas.width, canvas.height, 0)};
    std::vector<long> px(cloud.size()), py(cloud.size());
    std::vector<double> depth(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 g = to_vec(cloud[i].g) - t_r;
        // Explicit row-vector product g * R.
        const Mat3& R = view.rotation;
        const double x = g.x * R(0, 0) + g.y * R(1, 0) + g.z * R(2, 0);
        const double y = g.x * R(0, 1) + g.y * R(1, 1) + g.z * R(2, 1);
        const double z = g.x * R(0, 2) + g.y * R(1, 2) + g.z * R(2, 2);
        px[i] = std::lround(s * x) + canvas.width / 2;
        py[i] = std::lround(s * y) + canvas.height / 2;
        depth[i] = s * z;
    }
    for (int v = 0; v < canvas.height; ++v)
        for (int u = 0; u < canvas.width; ++u) {
            long best = -1;
            for (std::size_t i = 0; i < cloud.size(); ++i)
                if (px[i] == u && py[i] == v && (best < 0 || depth[i] > depth[std::size_t(best)])) best = long(i);
            if (best >= 0) {
                out.pixels(u, v) = cloud[std::size_t(best)].c;
                out.depth(u, v) = depth[std::size_t(best)];
                out.occupancy(u, v) = 1;
            }
        }
    return out;
}

/// Textured luma test image: gradients plus deterministic speckle.
inline LumaImage textured_image(int w, int h, unsigned seed = 7) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-20, 20);
    LumaImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img(x, y) = std::clamp(128 + 50 * std::sin(0.15 * x) * std::cos(0.1 * y) + 0.3 * (x - w / 2) + u(rng), 0.0, 255.0);
    return img;
}

inline LumaImage add_noise(const LumaImage& img, double sigma, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0, sigma);
    LumaImage out = img;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::clamp(out.data()[i] + n(rng), 0.0, 255.0);
    return out;
}

/// Fresh scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("pcqa_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace pcqa::testing
