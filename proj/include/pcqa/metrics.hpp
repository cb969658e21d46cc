#pragma once

// Full-reference point cloud quality metrics: projection-based (IW-SSIM_p,
// MS-SSIM_p, SSIM_p, PSNR_p) and point-based (p2po, p2pl, PSNR_Y).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/iqa2d.hpp"
#include "pcqa/neighbor_index.hpp"
#include "pcqa/normals.hpp"
#include "pcqa/parallel.hpp"
#include "pcqa/point_cloud.hpp"
#include "pcqa/projection.hpp"

namespace pcqa {

enum class MetricId {
    iwssim_p,
    msssim_p,
    ssim_p,
    psnr_p,
    p2po_mse,
    p2po_hausdorff,
    p2pl_mse,
    p2pl_hausdorff,
    psnr_y,
};

enum class Direction { higher_better, lower_better };

struct MetricInfo {
    MetricId id;
    std::string_view name;
    bool projection;
};

inline constexpr MetricInfo kMetrics[] = {
    {MetricId::iwssim_p, "iwssimp", true},
    {MetricId::msssim_p, "msssimp", true},
    {MetricId::ssim_p, "ssimp", true},
    {MetricId::psnr_p, "psnrp", true},
    {MetricId::p2po_mse, "p2po_mse", false},
    {MetricId::p2po_hausdorff, "p2po_haus", false},
    {MetricId::p2pl_mse, "p2pl_mse", false},
    {MetricId::p2pl_hausdorff, "p2pl_haus", false},
    {MetricId::psnr_y, "psnr_y", false},
};

inline std::string_view metric_name(MetricId id) {
    for (const auto& m : kMetrics)
        if (m.id == id) return m.name;
    return "?";
}

inline MetricId parse_metric(std::string_view name) {
    for (const auto& m : kMetrics)
        if (m.name == name) return m.id;
    std::string known;
    for (const auto& m : kMetrics) known += (known.empty() ? "" : ", ") + std::string(m.name);
    throw PreconditionError("unknown metric '" + std::string(name) + "' (known: " + known + ")");
}

inline bool is_projection_metric(MetricId id) {
    for (const auto& m : kMetrics)
        if (m.id == id) return m.projection;
    return false;
}

struct MetricScore {
    MetricId metric = MetricId::iwssim_p;
    double value = 0;
    std::vector<double> per_view;  ///< projection metrics only; value is their mean
    Direction direction = Direction::higher_better;
    std::map<std::string, double> metadata;
};

enum class PointAggregation { mse, hausdorff };

// --------------------------------------------------------------------------
// Projection-based metrics

enum class ProjectionKernel { psnr, ssim, msssim, iwssim };

inline double view_score(ProjectionKernel kind, const LumaImage& r, const LumaImage& d, const IwSsimParams& params) {
    switch (kind) {
        case ProjectionKernel::psnr: return capped_psnr(psnr(r, d));
        case ProjectionKernel::ssim: return ssim(r, d, params).score;
        case ProjectionKernel::msssim: return ms_ssim(r, d, params);
        case ProjectionKernel::iwssim: return iw_ssim(r, d, params);
    }
    return 0;
}

/// Projects both clouds from every viewpoint, scores each view pair with the
/// 2-d kernel on luma, and averages over views.
inline MetricScore projection_metric(ProjectionKernel kind, const PointCloud& ref, const PointCloud& dis,
                                     const ProjectionConfig& cfg, const IwSsimParams& params = {}) {
    const auto pairs = project_pair(ref, dis, cfg);
    MetricScore out;
    out.metric = kind == ProjectionKernel::psnr     ? MetricId::psnr_p
                 : kind == ProjectionKernel::ssim   ? MetricId::ssim_p
                 : kind == ProjectionKernel::msssim ? MetricId::msssim_p
                                                    : MetricId::iwssim_p;
    out.per_view.resize(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t n) {
        out.per_view[n] = view_score(kind, to_luma(pairs[n].ref.pixels), to_luma(pairs[n].dis.pixels), params);
    });
    double sum = 0;
    for (double v : out.per_view) sum += v;
    out.value = sum / double(out.per_view.size());
    if (!pairs.empty()) {
        out.metadata["canvas_width"] = pairs.front().ref.width();
        out.metadata["canvas_height"] = pairs.front().ref.height();
    }
    out.metadata["views"] = double(pairs.size());
    return out;
}

inline MetricScore iw_ssim_p(const PointCloud& ref, const PointCloud& dis, const ProjectionConfig& cfg,
                             const IwSsimParams& params = {}) {
    return projection_metric(ProjectionKernel::iwssim, ref, dis, cfg, params);
}

// --------------------------------------------------------------------------
// Point-based metrics

namespace metric_detail {

inline double to_psnr(double peak2, double err) {
    if (err == 0) return kPsnrCap;
    return 10.0 * std::log10(peak2 / err);
}

/// Mean or max of per-point errors err(i, nearest neighbour in `target`).
template <typename ErrFn>
double directional_error(const PointCloud& source, const NeighborIndex& target, PointAggregation mode, ErrFn&& err) {
    double acc = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const Neighbor nb = target.nearest(to_vec(source[i].g));
        const double e = err(i, nb);
        acc = mode == PointAggregation::mse ? acc + e : std::max(acc, e);
    }
    return mode == PointAggregation::mse ? acc / double(source.size()) : acc;
}

inline double default_peak(const PointCloud& ref) { return bounding_stats(ref).diagonal; }

}  // namespace metric_detail

/// Symmetric point-to-point geometry PSNR. The peak defaults to the
/// reference bounding-box diagonal.
inline MetricScore psnr_p2po(const PointCloud& ref, const PointCloud& dis, const NeighborIndex& ref_index,
                             const NeighborIndex& dis_index, PointAggregation mode,
                             std::optional<double> peak = std::nullopt) {
    require(!ref.empty() && !dis.empty(), "psnr_p2po: empty cloud");
    const double pk = peak.value_or(metric_detail::default_peak(ref));
    require(pk > 0, "geometry PSNR: peak must be positive (reference has zero extent; declare a peak)");
    auto sq = [](std::size_t, const Neighbor& nb) { return nb.dist2; };
    const double e_dr = metric_detail::directional_error(dis, ref_index, mode, sq);
    const double e_rd = metric_detail::directional_error(ref, dis_index, mode, sq);
    const double e = std::max(e_dr, e_rd);
    MetricScore out;
    out.metric = mode == PointAggregation::mse ? MetricId::p2po_mse : MetricId::p2po_hausdorff;
    out.value = metric_detail::to_psnr(pk * pk, e);
    out.metadata = {{"peak", pk}, {"error", e}};
    return out;
}

inline MetricScore psnr_p2po(const PointCloud& ref, const PointCloud& dis, PointAggregation mode,
                             std::optional<double> peak = std::nullopt) {
    require(!ref.empty() && !dis.empty(), "psnr_p2po: empty cloud");
    return psnr_p2po(ref, dis, NeighborIndex(ref), NeighborIndex(dis), mode, peak);
}

/// Symmetric point-to-plane geometry PSNR. Both directions project the
/// displacement onto the reference point's normal.
inline MetricScore psnr_p2pl(const PointCloud& ref, const PointCloud& dis, const NeighborIndex& ref_index,
                             const NeighborIndex& dis_index, const NormalSet& ref_normals, PointAggregation mode,
                             std::optional<double> peak = std::nullopt) {
    require(!ref.empty() && !dis.empty(), "psnr_p2pl: empty cloud");
    require(ref_normals.size() == ref.size(), "psnr_p2pl: normal count does not match reference");
    const double pk = peak.value_or(metric_detail::default_peak(ref));
    require(pk > 0, "geometry PSNR: peak must be positive (reference has zero extent; declare a peak)");
    // dis -> ref: displacement to the nearest reference point along its normal.
    const double e_dr = metric_detail::directional_error(dis, ref_index, mode, [&](std::size_t i, const Neighbor& nb) {
        const double t = dot(to_vec(dis[i].g) - to_vec(ref[nb.index].g), ref_normals[nb.index]);
        return t * t;
    });
    // ref -> dis: displacement of the nearest distorted point along the source normal.
    const double e_rd = metric_detail::directional_error(ref, dis_index, mode, [&](std::size_t i, const Neighbor& nb) {
        const double t = dot(to_vec(dis[nb.index].g) - to_vec(ref[i].g), ref_normals[i]);
        return t * t;
    });
    const double e = std::max(e_dr, e_rd);
    MetricScore out;
    out.metric = mode == PointAggregation::mse ? MetricId::p2pl_mse : MetricId::p2pl_hausdorff;
    out.value = metric_detail::to_psnr(pk * pk, e);
    out.metadata = {{"peak", pk}, {"error", e}, {"degenerate_normals", double(ref_normals.degenerate_count)}};
    return out;
}

inline MetricScore psnr_p2pl(const PointCloud& ref, const PointCloud& dis, PointAggregation mode,
                             std::optional<double> peak = std::nullopt, int k = 12) {
    require(!ref.empty() && !dis.empty(), "psnr_p2pl: empty cloud");
    const NeighborIndex ri(ref);
    return psnr_p2pl(ref, dis, ri, NeighborIndex(dis), estimate_normals(ref, ri, k), mode, peak);
}

/// Symmetric luma PSNR over nearest-neighbour correspondences, peak 255.
inline MetricScore psnr_y(const PointCloud& ref, const PointCloud& dis, const NeighborIndex& ref_index,
                          const NeighborIndex& dis_index) {
    require(!ref.empty() && !dis.empty(), "psnr_y: empty cloud");
    const double e_dr = metric_detail::directional_error(dis, ref_index, PointAggregation::mse,
                                                         [&](std::size_t i, const Neighbor& nb) {
                                                             const double d = luma(dis[i].c) - luma(ref[nb.index].c);
                                                             return d * d;
                                                         });
    const double e_rd = metric_detail::directional_error(ref, dis_index, PointAggregation::mse,
                                                         [&](std::size_t i, const Neighbor& nb) {
                                                             const double d = luma(ref[i].c) - luma(dis[nb.index].c);
                                                             return d * d;
                                                         });
    const double e = std::max(e_dr, e_rd);
    MetricScore out;
    out.metric = MetricId::psnr_y;
    out.value = metric_detail::to_psnr(255.0 * 255.0, e);
    out.metadata = {{"peak", 255.0}, {"error", e}};
    return out;
}

inline MetricScore psnr_y(const PointCloud& ref, const PointCloud& dis) {
    require(!ref.empty() && !dis.empty(), "psnr_y: empty cloud");
    return psnr_y(ref, dis, NeighborIndex(ref), NeighborIndex(dis));
}

// --------------------------------------------------------------------------

/// Evaluates a list of metrics on one pair, sharing projections' config
/// and the point indices / reference normals between point metrics.
inline std::vector<MetricScore> evaluate_metrics(const PointCloud& ref, const PointCloud& dis,
                                                 const std::vector<MetricId>& metrics, const ProjectionConfig& cfg,
                                                 const IwSsimParams& params = {}) {
    std::optional<NeighborIndex> ri, di;
    std::optional<NormalSet> normals;
    auto indices = [&] {
        if (!ri) ri.emplace(ref);
        if (!di) di.emplace(dis);
    };
    std::vector<MetricScore> out;
    for (MetricId id : metrics) {
        switch (id) {
            case MetricId::iwssim_p: out.push_back(projection_metric(ProjectionKernel::iwssim, ref, dis, cfg, params)); break;
            case MetricId::msssim_p: out.push_back(projection_metric(ProjectionKernel::msssim, ref, dis, cfg, params)); break;
            case MetricId::ssim_p: out.push_back(projection_metric(ProjectionKernel::ssim, ref, dis, cfg, params)); break;
            case MetricId::psnr_p: out.push_back(projection_metric(ProjectionKernel::psnr, ref, dis, cfg, params)); break;
            case MetricId::p2po_mse:
            case MetricId::p2po_hausdorff:
                indices();
                out.push_back(psnr_p2po(ref, dis, *ri, *di,
                                        id == MetricId::p2po_mse ? PointAggregation::mse : PointAggregation::hausdorff));
                break;
            case MetricId::p2pl_mse:
            case MetricId::p2pl_hausdorff:
                indices();
                if (!normals) normals = estimate_normals(ref, *ri);
                out.push_back(psnr_p2pl(ref, dis, *ri, *di, *normals,
                                        id == MetricId::p2pl_mse ? PointAggregation::mse : PointAggregation::hausdorff));
                break;
            case MetricId::psnr_y:
                indices();
                out.push_back(psnr_y(ref, dis, *ri, *di));
                break;
        }
    }
    return out;
}

}  // namespace pcqa
