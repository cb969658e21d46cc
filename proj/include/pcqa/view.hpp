#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/geometry.hpp"

namespace pcqa {

/// Rotation (row-vector convention) that carries the unit view normal
/// `n_v` onto +z, i.e. `n_v * R == (0, 0, 1)`.
///
/// Axis r = n_v x n_z / |n_v x n_z| and angle acos(n_v . n_z) give the
/// column-vector Rodrigues matrix M with M n_v = n_z; the row-vector form is
/// its transpose. When n_v is parallel to n_z the axis is undefined: +z maps
/// to the identity and -z to a half turn about x.
inline Mat3 rotation_for(Vec3 n_v) {
    if (std::abs(norm(n_v) - 1.0) > 1e-9) throw PreconditionError("rotation_for: view normal is not unit length");
    constexpr Vec3 n_z{0, 0, 1};
    const Vec3 c = cross(n_v, n_z);
    const double cn = norm(c);
    if (cn < 1e-12) {
        if (dot(n_v, n_z) > 0) return Mat3::identity();
        Mat3 flip;
        flip(0, 0) = 1;
        flip(1, 1) = -1;
        flip(2, 2) = -1;
        return flip;
    }
    const Vec3 r = (1.0 / cn) * c;
    // atan2 keeps the angle accurate near the poles, where acos loses digits.
    const double theta = std::atan2(cn, dot(n_v, n_z));
    const double s = std::sin(theta), k = 1.0 - std::cos(theta);

    // M = I + sin(t) K + (1 - cos(t)) K^2, K the cross-product matrix of r.
    Mat3 K;
    K(0, 1) = -r.z;
    K(0, 2) = r.y;
    K(1, 0) = r.z;
    K(1, 2) = -r.x;
    K(2, 0) = -r.y;
    K(2, 1) = r.x;
    const Mat3 K2 = K * K;
    Mat3 M = Mat3::identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) += s * K(i, j) + k * K2(i, j);
    return M.transposed();
}

struct Viewpoint {
    Vec3 normal;
    Mat3 rotation;
};

struct ViewpointSet {
    int level = 0;
    std::vector<Viewpoint> viewpoints;

    std::size_t size() const { return viewpoints.size(); }
    const Viewpoint& operator[](std::size_t i) const { return viewpoints[i]; }
};

/// Number of icosphere vertices at subdivision level l: 12 + 10 (4^l - 1).
constexpr std::size_t icosphere_count(int level) { return 12 + 10 * ((std::size_t{1} << (2 * level)) - 1); }

/// Vertices of a unit icosphere: the golden-ratio icosahedron with every
/// edge split `level` times and midpoints pushed back onto the sphere.
/// Shared edges reuse the same midpoint, so no tolerance-based dedup is needed.
inline ViewpointSet icosphere_normals(int level) {
    if (level < 0 || level > 4) throw PreconditionError("icosphere_normals: level must be in [0, 4], got " + std::to_string(level));

    constexpr double t = std::numbers::phi;
    std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                               {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v = normalized(v);

    using Face = std::array<std::uint32_t, 3>;
    std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const auto id = std::uint32_t(verts.size());
            verts.push_back(normalized(0.5 * (verts[key.first] + verts[key.second])));
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const auto a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }

    ViewpointSet set;
    set.level = level;
    set.viewpoints.reserve(verts.size());
    for (const auto& v : verts) set.viewpoints.push_back({v, rotation_for(v)});
    return set;
}

/// Debug export: `index,nx,ny,nz` per line.
inline void write_viewpoints_csv(std::ostream& os, const ViewpointSet& set) {
    os << "index,nx,ny,nz\n";
    os.precision(17);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& n = set[i].normal;
        os << i << ',' << n.x << ',' << n.y << ',' << n.z << '\n';
    }
}

}  // namespace pcqa
