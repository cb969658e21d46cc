#pragma once

// Evaluation statistics: PLCC / SRCC / RMSE, monotone logistic mapping, and
// the residual-variance F-test used to compare quality models.

#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pcqa/error.hpp"

namespace pcqa {

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

/// Unbiased (n - 1) sample variance.
inline double sample_variance(std::span<const double> v) {
    require(v.size() >= 2, "sample_variance: need at least two values");
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "pearson: length mismatch");
    require(a.size() >= 2, "pearson: need at least two values");
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) throw PreconditionError("pearson: zero variance input");
    return sab / std::sqrt(saa * sbb);
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    return rank;
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = average_ranks(a), rb = average_ranks(b);
    return pearson(ra, rb);
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && !a.empty(), "rmse: length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / double(a.size()));
}

struct Correlations {
    double plcc = 0;
    double srcc = 0;
    double rmse = 0;
};

inline Correlations correlations(std::span<const double> pred, std::span<const double> mos) {
    require(pred.size() == mos.size(), "correlations: length mismatch");
    require(pred.size() >= 3, "correlations: need at least three samples");
    return {pearson(pred, mos), spearman(pred, mos), rmse(pred, mos)};
}

// --------------------------------------------------------------------------
// Logistic mapping

/// f(x) = b1 (1/2 - 1 / (1 + exp(b2 (x - b3)))) + b4 x + b5; b4 is pinned to
/// 0 when the linear term is disabled.
struct LogisticParams {
    std::array<double, 5> beta{};

    double operator()(double x) const {
        const auto& b = beta;
        return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (x - b[2])))) + b[3] * x + b[4];
    }
};

struct LogisticFit {
    LogisticParams params;
    std::vector<double> mapped;
    std::vector<double> residuals;  ///< mos - f(objective)
    double sse = 0;
    bool fallback = false;  ///< objective was constant; identity mapping used
};

struct LogisticOptions {
    bool linear_term = true;
    int max_iterations = 500;
};

namespace logistic_detail {

inline double sse(const LogisticParams& p, std::span<const double> x, std::span<const double> y) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - p(x[i]);
        s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

/// Partial derivatives of f at x with respect to the five parameters.
inline std::array<double, 5> gradient(const LogisticParams& p, double x) {
    const auto& b = p.beta;
    const double e = std::exp(std::clamp(b[1] * (x - b[2]), -700.0, 700.0));
    const double sig = 1.0 / (1.0 + e);  // 1 / (1 + exp(b2 (x - b3)))
    const double dsig = sig * sig * e;   // -d(sig)/du with u = b2 (x - b3)
    return {0.5 - sig, b[0] * dsig * (x - b[2]), -b[0] * dsig * b[1], x, 1.0};
}

/// Levenberg-Marquardt on the active parameters from one start point.
inline LogisticParams refine(LogisticParams p, std::span<const double> x, std::span<const double> y,
                             const LogisticOptions& opt) {
    std::vector<int> active{0, 1, 2, 4};
    if (opt.linear_term) active.insert(active.begin() + 3, 3);
    const std::size_t m = active.size();
    double lambda = 1e-3;
    double cur = sse(p, x, y);
    for (int it = 0; it < opt.max_iterations; ++it) {
        // Normal equations J^T J d = J^T r.
        std::vector<double> jtj(m * m, 0.0), jtr(m, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto g = gradient(p, x[i]);
            const double r = y[i] - p(x[i]);
            for (std::size_t a = 0; a < m; ++a) {
                jtr[a] += g[std::size_t(active[a])] * r;
                for (std::size_t b = 0; b < m; ++b)
                    jtj[a * m + b] += g[std::size_t(active[a])] * g[std::size_t(active[b])];
            }
        }
        bool improved = false;
        for (int tries = 0; tries < 30 && !improved; ++tries) {
            std::vector<double> A = jtj, rhs = jtr;
            for (std::size_t a = 0; a < m; ++a) A[a * m + a] += lambda * (jtj[a * m + a] + 1e-12);
            // Gaussian elimination with partial pivoting.
            bool singular = false;
            for (std::size_t c = 0; c < m && !singular; ++c) {
                std::size_t piv = c;
                for (std::size_t r = c + 1; r < m; ++r)
                    if (std::abs(A[r * m + c]) > std::abs(A[piv * m + c])) piv = r;
                if (std::abs(A[piv * m + c]) < 1e-300) {
                    singular = true;
                    break;
                }
                if (piv != c) {
                    for (std::size_t k = 0; k < m; ++k) std::swap(A[c * m + k], A[piv * m + k]);
                    std::swap(rhs[c], rhs[piv]);
                }
                for (std::size_t r = c + 1; r < m; ++r) {
                    const double f = A[r * m + c] / A[c * m + c];
                    for (std::size_t k = c; k < m; ++k) A[r * m + k] -= f * A[c * m + k];
                    rhs[r] -= f * rhs[c];
                }
            }
            if (singular) {
                lambda *= 10;
                continue;
            }
            std::vector<double> d(m);
            for (std::size_t c = m; c-- > 0;) {
                double s = rhs[c];
                for (std::size_t k = c + 1; k < m; ++k) s -= A[c * m + k] * d[k];
                d[c] = s / A[c * m + c];
            }
            LogisticParams trial = p;
            for (std::size_t a = 0; a < m; ++a) trial.beta[std::size_t(active[a])] += d[a];
            const double s = sse(trial, x, y);
            if (s < cur) {
                const double gain = cur - s;
                p = trial;
                cur = s;
                lambda = std::max(lambda / 10, 1e-15);
                improved = true;
                if (gain <= 1e-15 * (1.0 + cur)) return p;
            } else {
                lambda *= 10;
            }
        }
        if (!improved) break;
    }
    return p;
}

}  // namespace logistic_detail

/// Least-squares logistic mapping of objective scores onto MOS, refined
/// from a fixed grid of start points. The best affine map is always one of
/// the starts, so the fit is never worse than a straight line.
inline LogisticFit fit_logistic(std::span<const double> objective, std::span<const double> mos,
                                const LogisticOptions& opt = {}) {
    require(objective.size() == mos.size(), "fit_logistic: length mismatch");
    require(objective.size() >= 5, "fit_logistic: need at least five samples");

    LogisticFit fit;
    const double xmin = *std::min_element(objective.begin(), objective.end());
    const double xmax = *std::max_element(objective.begin(), objective.end());
    if (xmin == xmax) {
        fit.params.beta = {0, 0, 0, 1, 0};
        fit.fallback = true;
        fit.mapped.assign(objective.begin(), objective.end());
    } else {
        const double xm = mean_of(objective), ym = mean_of(mos);
        const double ymin = *std::min_element(mos.begin(), mos.end());
        const double ymax = *std::max_element(mos.begin(), mos.end());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < objective.size(); ++i) {
            sxy += (objective[i] - xm) * (mos[i] - ym);
            sxx += (objective[i] - xm) * (objective[i] - xm);
        }
        const double slope = sxy / sxx;
        const double spread = xmax - xmin;
        const double yspan = std::max(ymax - ymin, 1e-6);
        const double sign = slope >= 0 ? 1.0 : -1.0;

        std::vector<LogisticParams> starts;
        if (opt.linear_term) starts.push_back({{0.0, 1.0 / spread, xm, slope, ym - slope * xm}});
        for (double q : {0.25, 0.5, 0.75})
            for (double steep : {1.0, 4.0, 16.0})
                for (double amp : {1.0, 2.0})
                    starts.push_back({{amp * yspan, sign * steep / spread, xmin + q * spread, 0.0, ym}});

        LogisticParams best;
        double best_sse = std::numeric_limits<double>::infinity();
        for (const auto& s0 : starts) {
            const auto p = logistic_detail::refine(s0, objective, mos, opt);
            const double s = logistic_detail::sse(p, objective, mos);
            if (s < best_sse) {
                best_sse = s;
                best = p;
            }
        }
        fit.params = best;
        fit.mapped.resize(objective.size());
        for (std::size_t i = 0; i < objective.size(); ++i) fit.mapped[i] = best(objective[i]);
    }
    fit.residuals.resize(objective.size());
    fit.sse = 0;
    for (std::size_t i = 0; i < objective.size(); ++i) {
        fit.residuals[i] = mos[i] - fit.mapped[i];
        fit.sse += fit.residuals[i] * fit.residuals[i];
    }
    return fit;
}

// --------------------------------------------------------------------------
// Significance

enum class Significance { better, worse, indistinguishable };

inline char significance_symbol(Significance s) {
    return s == Significance::better ? '1' : s == Significance::worse ? '0' : '-';
}

/// Two-sided F-test on the ratio of residual variances of models a and b.
/// `better` means a's residual variance is significantly smaller.
inline Significance compare_residuals(std::span<const double> a, std::span<const double> b, double confidence = 0.95) {
    require(a.size() == b.size(), "significance: residual vectors differ in length");
    const double va = sample_variance(a), vb = sample_variance(b);
    const double dof = double(a.size() - 1);
    boost::math::fisher_f_distribution<double> f(dof, dof);
    const double alpha = 1.0 - confidence;
    const double hi = boost::math::quantile(f, 1.0 - alpha / 2);
    const double lo = boost::math::quantile(f, alpha / 2);
    if (vb == 0 && va == 0) return Significance::indistinguishable;
    if (vb == 0) return Significance::worse;
    const double ratio = va / vb;
    if (ratio < lo) return Significance::better;
    if (ratio > hi) return Significance::worse;
    return Significance::indistinguishable;
}

using SignificanceMatrix = std::vector<std::vector<Significance>>;

/// Pairwise comparison of every model's residuals; rows are compared against
/// columns. Requires at least 50 residuals per model.
inline SignificanceMatrix significance_matrix(const std::vector<std::vector<double>>& residuals,
                                              double confidence = 0.95) {
    const std::size_t k = residuals.size();
    for (const auto& r : residuals) {
        require(r.size() == residuals.front().size(), "significance_matrix: residual vectors differ in length");
        require(r.size() >= 50, "significance_matrix: need at least 50 residuals per model, got " + std::to_string(r.size()));
    }
    SignificanceMatrix m(k, std::vector<Significance>(k, Significance::indistinguishable));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const auto s = compare_residuals(residuals[i], residuals[j], confidence);
            m[i][j] = s;
            m[j][i] = s == Significance::better  ? Significance::worse
                      : s == Significance::worse ? Significance::better
                                                 : Significance::indistinguishable;
        }
    return m;
}

}  // namespace pcqa
