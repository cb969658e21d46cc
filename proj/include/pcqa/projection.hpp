#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/image.hpp"
#include "pcqa/parallel.hpp"
#include "pcqa/point_cloud.hpp"
#include "pcqa/view.hpp"

namespace pcqa {

struct CanvasSize {
    int width = 0;
    int height = 0;
    friend constexpr bool operator==(CanvasSize, CanvasSize) = default;
};

struct ProjectionConfig {
    double scale = 0.5;
    std::optional<CanvasSize> canvas;  ///< nullopt = auto
    Color background{127, 127, 127};
    ViewpointSet viewpoints = icosphere_normals(0);
    unsigned jobs = 1;
};

struct ProjectedImage {
    RgbImage pixels;
    Plane<double> depth;  ///< -inf where nothing landed
    Mask occupancy;

    int width() const { return pixels.width(); }
    int height() const { return pixels.height(); }
};

/// Distance from the centroid to the farthest corner of the bounding box;
/// bounds the distance from the centroid to every point.
inline double enclosing_radius(const BoundingStats& stats, Vec3 center) {
    Vec3 far;
    for (int a = 0; a < 3; ++a) far[a] = std::max(std::abs(stats.max[a] - center[a]), std::abs(center[a] - stats.min[a]));
    return norm(far);
}

namespace projection_detail {

inline CanvasSize canvas_for_radius(double radius, double s) {
    int side = static_cast<int>(std::ceil(2.0 * s * radius - 1e-9)) + 9;
    if (side % 2) ++side;
    return {side, side};
}

}  // namespace projection_detail

/// Square canvas wide enough for any rotation of the reference about its
/// centroid: ceil(2 s r) + 9 rounded up to even, r the enclosing radius.
inline CanvasSize auto_canvas(const BoundingStats& ref_stats, double s) {
    require(ref_stats.diagonal > 0, "auto_canvas: reference has zero extent");
    require(s > 0, "auto_canvas: scale must be positive");
    return projection_detail::canvas_for_radius(enclosing_radius(ref_stats, ref_stats.center), s);
}

/// Canvas shared by a (reference, distorted) pair: the reference canvas,
/// grown if distorted points reach farther from the reference centroid.
inline CanvasSize auto_canvas(const BoundingStats& ref_stats, const BoundingStats& dis_stats, double s) {
    require(ref_stats.diagonal > 0, "auto_canvas: reference has zero extent");
    require(s > 0, "auto_canvas: scale must be positive");
    const double r = std::max(enclosing_radius(ref_stats, ref_stats.center), enclosing_radius(dis_stats, ref_stats.center));
    return projection_detail::canvas_for_radius(r, s);
}

/// Translate by the reference centroid, rotate into the view frame, scale,
/// drop depth, and rasterize one pixel per point. Among points landing on
/// one pixel the largest depth wins; equal depths keep the earliest point.
inline ProjectedImage project(const PointCloud& cloud, Vec3 t_r, const Viewpoint& view, double s,
                              CanvasSize canvas, Color background = {127, 127, 127}) {
    require(!cloud.empty(), "project: empty cloud");
    require(s > 0, "project: scale must be positive");
    require(canvas.width > 0 && canvas.height > 0, "project: canvas must be non-empty");

    const int W = canvas.width, H = canvas.height;
    const int cx = W / 2, cy = H / 2;
    ProjectedImage out{RgbImage(W, H, background), Plane<double>(W, H, -std::numeric_limits<double>::infinity()),
                       Mask(W, H, 0)};

    long need_x = 0, need_y = 0;
    bool clipped = false;
    const Mat3& R = view.rotation;
    for (const auto& p : cloud.points) {
        const Vec3 gs = s * ((to_vec(p.g) - t_r) * R);
        const long u = std::lround(gs.x), v = std::lround(gs.y);
        const long px = u + cx, py = v + cy;
        need_x = std::max({need_x, -u, u + 1});
        need_y = std::max({need_y, -v, v + 1});
        if (px < 0 || py < 0 || px >= W || py >= H) {
            clipped = true;
            continue;
        }
        double& d = out.depth(int(px), int(py));
        if (gs.z > d) {
            d = gs.z;
            out.pixels(int(px), int(py)) = p.c;
            out.occupancy(int(px), int(py)) = 1;
        }
    }
    if (clipped)
        throw PreconditionError("project: canvas " + std::to_string(W) + "x" + std::to_string(H) +
                                " too small for cloud '" + cloud.name + "'; need at least " +
                                std::to_string(2 * need_x) + "x" + std::to_string(2 * need_y));
    return out;
}

struct ProjectedPair {
    ProjectedImage ref;
    ProjectedImage dis;
};

inline CanvasSize resolve_canvas(const PointCloud& ref, const PointCloud& dis, const ProjectionConfig& cfg) {
    if (cfg.canvas) return *cfg.canvas;
    return auto_canvas(bounding_stats(ref), bounding_stats(dis), cfg.scale);
}

/// Projects both clouds from every configured viewpoint using the
/// reference centroid as the common translation and a common canvas.
inline std::vector<ProjectedPair> project_pair(const PointCloud& ref, const PointCloud& dis,
                                               const ProjectionConfig& cfg) {
    require(!ref.empty() && !dis.empty(), "project_pair: empty cloud");
    const Vec3 t_r = bounding_stats(ref).center;
    const CanvasSize canvas = resolve_canvas(ref, dis, cfg);
    std::vector<ProjectedPair> out(cfg.viewpoints.size());
    parallel_for(out.size(), cfg.jobs, [&](std::size_t n) {
        const auto& view = cfg.viewpoints[n];
        out[n] = {project(ref, t_r, view, cfg.scale, canvas, cfg.background),
                  project(dis, t_r, view, cfg.scale, canvas, cfg.background)};
    });
    return out;
}

}  // namespace pcqa
