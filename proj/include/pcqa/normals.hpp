#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/neighbor_index.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

struct NormalSet {
    std::vector<Vec3> normals;
    std::vector<std::uint8_t> degenerate;  ///< 1 where the (0, 0, 1) fallback was used
    std::size_t degenerate_count = 0;

    std::size_t size() const { return normals.size(); }
    const Vec3& operator[](std::size_t i) const { return normals[i]; }
};

/// PCA normals: for every point, the eigenvector of the smallest eigenvalue
/// of the covariance of the point and its k nearest neighbours, oriented
/// away from the cloud centroid. Points whose neighbourhood has no spread
/// get (0, 0, 1) and are flagged.
inline NormalSet estimate_normals(const PointCloud& cloud, const NeighborIndex& index, int k = 12) {
    require(k >= 3, "estimate_normals: k must be >= 3");
    if (cloud.size() <= std::size_t(k))
        throw PreconditionError("estimate_normals: need more than k=" + std::to_string(k) + " points, cloud has " +
                                std::to_string(cloud.size()));
    const Vec3 centroid = bounding_stats(cloud).center;
    NormalSet out;
    out.normals.resize(cloud.size());
    out.degenerate.assign(cloud.size(), 0);

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 p = to_vec(cloud[i].g);
        const auto nbrs = index.knn(p, std::size_t(k) + 1);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto& nb : nbrs) {
            const Vec3 q = index.position(nb.index);
            mean += Eigen::Vector3d(q.x, q.y, q.z);
        }
        mean /= double(nbrs.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& nb : nbrs) {
            const Vec3 q = index.position(nb.index);
            const Eigen::Vector3d d = Eigen::Vector3d(q.x, q.y, q.z) - mean;
            cov += d * d.transpose();
        }
        if (cov.cwiseAbs().maxCoeff() == 0.0) {
            out.normals[i] = {0, 0, 1};
            out.degenerate[i] = 1;
            ++out.degenerate_count;
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
        const Eigen::Vector3d e = es.eigenvectors().col(0).normalized();
        Vec3 n{e.x(), e.y(), e.z()};

        const Vec3 out_dir = p - centroid;
        const double s = dot(n, out_dir);
        if (std::abs(s) > 1e-9 * (1.0 + norm(out_dir))) {
            if (s < 0) n = -1.0 * n;
        } else {
            // Tangent to the centroid direction: first nonzero component positive.
            for (int a = 0; a < 3; ++a)
                if (std::abs(n[a]) > 1e-12) {
                    if (n[a] < 0) n = -1.0 * n;
                    break;
                }
        }
        out.normals[i] = n;
    }
    return out;
}

inline NormalSet estimate_normals(const PointCloud& cloud, int k = 12) {
    return estimate_normals(cloud, NeighborIndex(cloud), k);
}

}  // namespace pcqa
