#pragma once

// Full-reference 2-d image quality kernels on luma planes: PSNR, SSIM,
// MS-SSIM and information-content-weighted SSIM.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pcqa/error.hpp"
#include "pcqa/image.hpp"

namespace pcqa {

struct IwSsimParams {
    int scales = 5;
    int window = 11;          ///< Gaussian SSIM window size
    double sigma = 1.5;       ///< Gaussian SSIM window spread
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
    std::vector<double> beta{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    int info_window = 3;      ///< uniform window for local information statistics
    double noise_var = 0.4;   ///< perceptual noise variance sigma_n^2

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

    void validate() const {
        require(scales >= 1, "IwSsimParams: scales must be >= 1");
        require(int(beta.size()) == scales, "IwSsimParams: need one exponent per scale");
        require(window >= 1 && window % 2 == 1, "IwSsimParams: window must be odd");
        require(info_window >= 1 && info_window % 2 == 1, "IwSsimParams: info window must be odd");
        require(sigma > 0 && k1 > 0 && k2 > 0 && dynamic_range > 0 && noise_var > 0,
                "IwSsimParams: parameters must be positive");
        for (double b : beta) require(b > 0, "IwSsimParams: exponents must be positive");
        // The published exponents are rounded and sum to 1.0001.
        require(std::abs(std::accumulate(beta.begin(), beta.end(), 0.0) - 1.0) < 1e-3,
                "IwSsimParams: exponents must sum to 1");
    }
};

/// Reported in place of +inf when two images are identical.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(peak^2 / MSE); +inf when the images are identical.
inline double psnr(const LumaImage& x, const LumaImage& y, double peak = 255.0) {
    if (!same_shape(x, y)) throw PreconditionError("psnr: dimension mismatch");
    require(x.size() > 0, "psnr: empty image");
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data()[i] - y.data()[i];
        sse += d * d;
    }
    const double mse = sse / double(x.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

inline double capped_psnr(double v) { return std::isinf(v) && v > 0 ? kPsnrCap : v; }

namespace iqa_detail {

inline std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const int r = size / 2;
    double sum = 0;
    for (int i = 0; i < size; ++i) {
        const double d = i - r;
        k[std::size_t(i)] = std::exp(-d * d / (2 * sigma * sigma));
        sum += k[std::size_t(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

inline const std::array<double, 5>& pyramid_kernel() {
    static const std::array<double, 5> k{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
    return k;
}

/// Separable correlation keeping only fully-covered positions.
template <typename Kernel>
LumaImage filter_valid(const LumaImage& in, const Kernel& k) {
    const int n = int(k.size());
    const int w = in.width() - n + 1, h = in.height() - n + 1;
    LumaImage tmp(w, in.height());
    for (int y = 0; y < in.height(); ++y) {
        const double* row = &in(0, y);
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[std::size_t(i)] * row[x + i];
            tmp(x, y) = s;
        }
    }
    LumaImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[std::size_t(i)] * tmp(x, y + i);
            out(x, y) = s;
        }
    return out;
}

inline int mirror(int i, int n) {
    // Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x(n-1) | x(n-1) x(n-2) ...
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

/// Same-size separable correlation with symmetric borders.
template <typename Kernel>
LumaImage filter_same(const LumaImage& in, const Kernel& k) {
    const int n = int(k.size()), r = n / 2;
    const int w = in.width(), h = in.height();
    LumaImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[std::size_t(i)] * in(mirror(x + i - r, w), y);
            tmp(x, y) = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[std::size_t(i)] * tmp(x, mirror(y + i - r, h));
            out(x, y) = s;
        }
    return out;
}

inline LumaImage product(const LumaImage& a, const LumaImage& b) {
    LumaImage out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

/// Low-pass then keep every other sample (output is ceil(n / 2) per axis).
inline LumaImage downsample(const LumaImage& in) {
    const LumaImage blurred = filter_same(in, pyramid_kernel());
    LumaImage out((in.width() + 1) / 2, (in.height() + 1) / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out(x, y) = blurred(2 * x, 2 * y);
    return out;
}

/// Detail band: the plane minus its low-pass prediction.
inline LumaImage detail_band(const LumaImage& in) {
    const LumaImage low = filter_same(in, pyramid_kernel());
    LumaImage out(in.width(), in.height());
    for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = in.data()[i] - low.data()[i];
    return out;
}

/// x^b with the sign of x carried through, so negative per-scale scores
/// stay real and the product stays in [-1, 1].
inline double signed_pow(double x, double b) { return x < 0 ? -std::pow(-x, b) : std::pow(x, b); }

inline double mean(const LumaImage& p) {
    return std::accumulate(p.begin(), p.end(), 0.0) / double(p.size());
}

}  // namespace iqa_detail

struct SsimMaps {
    double score = 0;     ///< mean of luminance * cs
    LumaImage cs;         ///< contrast-structure term, valid support
    LumaImage luminance;  ///< luminance term, valid support
};

/// Gaussian-windowed SSIM over positions where the window fits entirely.
inline SsimMaps ssim(const LumaImage& x, const LumaImage& y, const IwSsimParams& p = {}) {
    if (!same_shape(x, y)) throw PreconditionError("ssim: dimension mismatch");
    if (x.width() < p.window || x.height() < p.window)
        throw PreconditionError("ssim: image " + std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                                " smaller than the " + std::to_string(p.window) + "x" + std::to_string(p.window) +
                                " window");
    using namespace iqa_detail;
    const auto k = gaussian_kernel(p.window, p.sigma);
    const LumaImage mx = filter_valid(x, k), my = filter_valid(y, k);
    const LumaImage sxx = filter_valid(product(x, x), k), syy = filter_valid(product(y, y), k),
                    sxy = filter_valid(product(x, y), k);
    const double c1 = p.c1(), c2 = p.c2();

    SsimMaps out{0, LumaImage(mx.width(), mx.height()), LumaImage(mx.width(), mx.height())};
    double total = 0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double ux = mx.data()[i], uy = my.data()[i];
        const double vx = sxx.data()[i] - ux * ux, vy = syy.data()[i] - uy * uy;
        const double cov = sxy.data()[i] - ux * uy;
        const double l = (2 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        const double cs = (2 * cov + c2) / (vx + vy + c2);
        out.luminance.data()[i] = l;
        out.cs.data()[i] = cs;
        total += l * cs;
    }
    out.score = total / double(mx.size());
    return out;
}

namespace iqa_detail {

inline void require_multiscale(const LumaImage& x, const LumaImage& y, const IwSsimParams& p, const char* who) {
    if (!same_shape(x, y)) throw PreconditionError(std::string(who) + ": dimension mismatch");
    const long need = long(p.window) << (p.scales - 1);
    if (x.width() < need || x.height() < need)
        throw PreconditionError(std::string(who) + ": image " + std::to_string(x.width()) + "x" +
                                std::to_string(x.height()) + " too small for " + std::to_string(p.scales) +
                                " scales (need " + std::to_string(need) + " per axis)");
}

}  // namespace iqa_detail

inline double ms_ssim(const LumaImage& x, const LumaImage& y, const IwSsimParams& p = {}) {
    p.validate();
    iqa_detail::require_multiscale(x, y, p, "ms_ssim");
    LumaImage a = x, b = y;
    double score = 1.0;
    for (int j = 0; j < p.scales; ++j) {
        const SsimMaps m = ssim(a, b, p);
        const double term = j + 1 < p.scales ? iqa_detail::mean(m.cs) : m.score;
        score *= iqa_detail::signed_pow(term, p.beta[std::size_t(j)]);
        if (j + 1 < p.scales) {
            a = iqa_detail::downsample(a);
            b = iqa_detail::downsample(b);
        }
    }
    return score;
}

/// Information content weight for one pixel's local statistics: the mutual
/// information between a Gaussian source of variance var_ref and two
/// perceptually-noised observations, one through the distortion channel
/// (gain, additive noise) and one direct. Floored at 0.
inline double info_weight(double var_ref, double var_dis, double cov, double noise_var) {
    constexpr double eps = 1e-10;
    var_ref = std::max(var_ref, 0.0);
    var_dis = std::max(var_dis, 0.0);
    const double g = cov / (var_ref + eps);
    const double var_v = std::max(var_dis - g * cov, 0.0);
    const double n = noise_var;
    const double num = (var_ref + n) * (g * g * var_ref + var_v + n) - g * g * var_ref * var_ref;
    const double den = n * (var_v + n);
    const double w = 0.5 * std::log2(num / den);
    return std::isfinite(w) ? std::max(w, 0.0) : 0.0;
}

/// Per-pixel information weights for one scale, computed from the detail
/// bands of both planes over a uniform `info_window` neighborhood. The
/// result is cropped to the valid support of the SSIM window so it aligns
/// with the maps returned by ssim().
inline LumaImage info_weight_map(const LumaImage& x, const LumaImage& y, const IwSsimParams& p = {}) {
    if (!same_shape(x, y)) throw PreconditionError("info_weight_map: dimension mismatch");
    require(x.width() >= p.window && x.height() >= p.window, "info_weight_map: image smaller than window");
    using namespace iqa_detail;
    const LumaImage dx = detail_band(x), dy = detail_band(y);
    const std::vector<double> box(std::size_t(p.info_window), 1.0 / p.info_window);
    const LumaImage mx = filter_valid(dx, box), my = filter_valid(dy, box);
    const LumaImage sxx = filter_valid(product(dx, dx), box), syy = filter_valid(product(dy, dy), box),
                    sxy = filter_valid(product(dx, dy), box);

    // Box output (i, j) is centred at (i + ri, j + ri); SSIM output (i, j) at (i + rw, j + rw).
    const int ri = p.info_window / 2, rw = p.window / 2, off = rw - ri;
    LumaImage w(x.width() - p.window + 1, x.height() - p.window + 1);
    for (int j = 0; j < w.height(); ++j)
        for (int i = 0; i < w.width(); ++i) {
            const int bi = i + off, bj = j + off;
            const double ux = mx(bi, bj), uy = my(bi, bj);
            w(i, j) = info_weight(sxx(bi, bj) - ux * ux, syy(bi, bj) - uy * uy, sxy(bi, bj) - ux * uy, p.noise_var);
        }
    return w;
}

/// Per-scale intermediate results of IW-SSIM, exposed for diagnostics.
struct IwSsimScale {
    LumaImage quality;  ///< cs map (finer scales) or luminance * cs (coarsest)
    LumaImage weight;
    double pooled = 0;   ///< sum(w q) / sum(w), uniform when sum(w) == 0
    double uniform = 0;  ///< plain mean of the quality map
};

struct IwSsimResult {
    double score = 0;
    std::vector<IwSsimScale> scales;
};

inline IwSsimResult iw_ssim_detail(const LumaImage& x, const LumaImage& y, const IwSsimParams& p = {}) {
    p.validate();
    iqa_detail::require_multiscale(x, y, p, "iw_ssim");
    IwSsimResult out;
    out.score = 1.0;
    LumaImage a = x, b = y;
    for (int j = 0; j < p.scales; ++j) {
        const bool coarsest = j + 1 == p.scales;
        SsimMaps m = ssim(a, b, p);
        IwSsimScale sc;
        sc.quality = std::move(m.cs);
        if (coarsest)
            for (std::size_t i = 0; i < sc.quality.size(); ++i) sc.quality.data()[i] *= m.luminance.data()[i];
        sc.weight = info_weight_map(a, b, p);

        double sw = 0, swq = 0;
        for (std::size_t i = 0; i < sc.quality.size(); ++i) {
            sw += sc.weight.data()[i];
            swq += sc.weight.data()[i] * sc.quality.data()[i];
        }
        sc.uniform = iqa_detail::mean(sc.quality);
        sc.pooled = sw > 0 ? swq / sw : sc.uniform;
        out.score *= iqa_detail::signed_pow(sc.pooled, p.beta[std::size_t(j)]);
        out.scales.push_back(std::move(sc));
        if (!coarsest) {
            a = iqa_detail::downsample(a);
            b = iqa_detail::downsample(b);
        }
    }
    return out;
}

inline double iw_ssim(const LumaImage& x, const LumaImage& y, const IwSsimParams& p = {}) {
    return iw_ssim_detail(x, y, p).score;
}

}  // namespace pcqa
