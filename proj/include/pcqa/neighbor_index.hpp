#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/point_cloud.hpp"

namespace pcqa {

struct Neighbor {
    std::uint32_t index = 0;  ///< position in the indexed cloud
    double dist2 = 0;         ///< squared Euclidean distance

    /// Nearer first; equal distances resolve to the lower point index.
    friend constexpr bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
    friend constexpr bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static 3-d tree over a cloud's voxel coordinates. Distances are computed
/// in double, which is exact for integer coordinates up to ~2^25.
///
/// Queries are exact: a subtree is pruned only when its splitting plane is
/// strictly farther than the current worst candidate, so equidistant points
/// are always visited and ties go to the lowest index.
class NeighborIndex {
public:
    explicit NeighborIndex(const PointCloud& cloud) {
        require(!cloud.empty(), "build_index: empty cloud");
        pts_.reserve(cloud.size());
        for (const auto& p : cloud.points) pts_.push_back(to_vec(p.g));
        order_.resize(pts_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
        build(0, std::uint32_t(order_.size()));
    }

    std::size_t size() const { return pts_.size(); }
    Vec3 position(std::uint32_t i) const { return pts_[i]; }

    Neighbor nearest(Vec3 q) const {
        Neighbor best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
        nearest_rec(0, q, best);
        return best;
    }

    /// The k nearest points in ascending (distance, index) order.
    std::vector<Neighbor> knn(Vec3 q, std::size_t k) const {
        k = std::min(k, pts_.size());
        std::vector<Neighbor> heap;  // max-heap on (dist2, index)
        heap.reserve(k + 1);
        if (k > 0) knn_rec(0, q, k, heap);
        std::sort_heap(heap.begin(), heap.end());
        return heap;
    }

private:
    static constexpr std::uint32_t kLeafSize = 12;

    struct Node {
        std::uint32_t begin = 0, end = 0;  // range into order_
        std::uint32_t left = 0, right = 0; // child node ids; 0 marks a leaf
        int axis = 0;
        double split = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto id = std::uint32_t(nodes_.size());
        nodes_.push_back({begin, end, 0, 0, 0, 0});
        if (end - begin <= kLeafSize) return id;

        Vec3 lo = pts_[order_[begin]], hi = lo;
        for (auto i = begin; i < end; ++i)
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::min(lo[a], pts_[order_[i]][a]);
                hi[a] = std::max(hi[a], pts_[order_[i]][a]);
            }
        int axis = 0;
        for (int a = 1; a < 3; ++a)
            if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
        if (hi[axis] == lo[axis]) return id;  // all coincident: keep as leaf

        const auto mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) { return pts_[a][axis] < pts_[b][axis]; });
        const double split = pts_[order_[mid]][axis];
        const auto left = build(begin, mid);
        const auto right = build(mid, end);
        auto& n = nodes_[id];
        n.left = left;
        n.right = right;
        n.axis = axis;
        n.split = split;
        return id;
    }

    static double d2(Vec3 a, Vec3 b) {
        const Vec3 d = a - b;
        return dot(d, d);
    }

    void nearest_rec(std::uint32_t id, Vec3 q, Neighbor& best) const {
        const Node& n = nodes_[id];
        if (n.left == 0) {
            for (auto i = n.begin; i < n.end; ++i) {
                const Neighbor cand{order_[i], d2(pts_[order_[i]], q)};
                if (cand < best) best = cand;
            }
            return;
        }
        // Left holds coordinates <= split, right holds coordinates >= split.
        const double diff = q[n.axis] - n.split;
        const auto first = diff <= 0 ? n.left : n.right;
        const auto second = diff <= 0 ? n.right : n.left;
        nearest_rec(first, q, best);
        if (diff * diff <= best.dist2) nearest_rec(second, q, best);
    }

    void knn_rec(std::uint32_t id, Vec3 q, std::size_t k, std::vector<Neighbor>& heap) const {
        const Node& n = nodes_[id];
        if (n.left == 0) {
            for (auto i = n.begin; i < n.end; ++i) {
                const Neighbor cand{order_[i], d2(pts_[order_[i]], q)};
                if (heap.size() < k) {
                    heap.push_back(cand);
                    std::push_heap(heap.begin(), heap.end());
                } else if (cand < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = cand;
                    std::push_heap(heap.begin(), heap.end());
                }
            }
            return;
        }
        const double diff = q[n.axis] - n.split;
        const auto first = diff <= 0 ? n.left : n.right;
        const auto second = diff <= 0 ? n.right : n.left;
        knn_rec(first, q, k, heap);
        if (heap.size() < k || diff * diff <= heap.front().dist2) knn_rec(second, q, k, heap);
    }

    std::vector<Vec3> pts_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

inline NeighborIndex build_index(const PointCloud& cloud) { return NeighborIndex(cloud); }

}  // namespace pcqa
