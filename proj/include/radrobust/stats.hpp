// Repeatability / reproducibility statistics: ICC(2,1) from the two-way
// ANOVA decomposition, Lin's concordance correlation with an asymptotic
// Fisher-z confidence interval, Spearman rank correlation, CNR/SNR, the
// four-class stability labels, and the intensity shuffle.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "radrobust/core.hpp"
#include "radrobust/rng.hpp"

namespace radrobust {

// n ROIs (rows) x k repeated acquisitions (columns), row-major.
struct RatingsMatrix {
    int n = 0;
    int k = 0;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i * k + j)]; }

    void validate() const {
        if (n < 2 || k < 2) throw Error("RatingsMatrix: need n >= 2 and k >= 2");
        if (values.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(k))
            throw Error("RatingsMatrix: size mismatch");
        for (double v : values)
            if (!std::isfinite(v)) throw Error("RatingsMatrix: non-finite entry");
    }
};

enum class StabilityClass { Excellent, Good, Moderate, Poor };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::Excellent: return "excellent";
        case StabilityClass::Good: return "good";
        case StabilityClass::Moderate: return "moderate";
        case StabilityClass::Poor: return "poor";
    }
    return "?";
}

// Upper-exclusive thresholds 0.9 / 0.75 / 0.5.
inline StabilityClass classify(double value) {
    if (value > 0.9) return StabilityClass::Excellent;
    if (value > 0.75) return StabilityClass::Good;
    if (value > 0.5) return StabilityClass::Moderate;
    return StabilityClass::Poor;
}

struct IccResult {
    double value = 0.0;
    bool degenerate = false;  // all entries equal; value forced to 1
};

// ICC(2,1): two-way random effects, absolute agreement, single measurement.
inline IccResult icc21(const RatingsMatrix& m) {
    m.validate();
    const int n = m.n, k = m.k;

    double grand = 0.0;
    for (double v : m.values) grand += v;
    grand /= static_cast<double>(n * k);

    std::vector<double> row_mean(static_cast<std::size_t>(n), 0.0);
    std::vector<double> col_mean(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            row_mean[static_cast<std::size_t>(i)] += m.at(i, j);
            col_mean[static_cast<std::size_t>(j)] += m.at(i, j);
        }
    for (auto& v : row_mean) v /= static_cast<double>(k);
    for (auto& v : col_mean) v /= static_cast<double>(n);

    double ss_total = 0.0, ss_rows = 0.0, ss_cols = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            double d = m.at(i, j) - grand;
            ss_total += d * d;
        }
    for (int i = 0; i < n; ++i) {
        double d = row_mean[static_cast<std::size_t>(i)] - grand;
        ss_rows += d * d;
    }
    ss_rows *= static_cast<double>(k);
    for (int j = 0; j < k; ++j) {
        double d = col_mean[static_cast<std::size_t>(j)] - grand;
        ss_cols += d * d;
    }
    ss_cols *= static_cast<double>(n);
    double ss_err = ss_total - ss_rows - ss_cols;
    if (ss_err < 0.0) ss_err = 0.0;  // cancellation guard

    if (ss_total == 0.0) return {1.0, true};  // identical repeated measurements

    const double ms_r = ss_rows / static_cast<double>(n - 1);
    const double ms_c = ss_cols / static_cast<double>(k - 1);
    const double ms_e = ss_err / static_cast<double>((n - 1) * (k - 1));

    const double num = ms_r - ms_e;
    const double den =
        ms_r + static_cast<double>(k - 1) * ms_e +
        static_cast<double>(k) / static_cast<double>(n) * (ms_c - ms_e);
    if (den == 0.0) return {num < 0.0 ? -1.0 : 1.0, true};
    return {num / den, false};
}

struct PairedSeries {
    std::vector<double> x;
    std::vector<double> y;

    void validate() const {
        if (x.size() != y.size()) throw Error("PairedSeries: length mismatch");
        if (x.size() < 3) throw Error("PairedSeries: need at least 3 samples");
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
                throw Error("PairedSeries: non-finite entry");
    }
};

namespace detail {

struct Moments {
    double mx, my, sxx, syy, sxy;  // population (1/n) moments
};

inline Moments paired_moments(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    return {mx, my, sxx / n, syy / n, sxy / n};
}

}  // namespace detail

struct CccResult {
    double value = 0.0;
    bool both_constant = false;
};

// Lin's concordance correlation coefficient with population (1/n) moments.
inline CccResult ccc(const PairedSeries& p) {
    p.validate();
    auto m = detail::paired_moments(p.x, p.y);
    if (m.sxx == 0.0 && m.syy == 0.0) return {m.mx == m.my ? 1.0 : 0.0, true};
    double dm = m.mx - m.my;
    return {2.0 * m.sxy / (m.sxx + m.syy + dm * dm), false};
}

// Acklam's rational approximation to the standard normal quantile.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

struct CccInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate = false;  // |CCC| = 1
};

// Fisher z-transformed interval with Lin's asymptotic standard error.
inline CccInterval ccc_ci(const PairedSeries& p, double level = 0.95) {
    p.validate();
    if (p.x.size() < 4) throw TooFewSamples("ccc_ci: need at least 4 samples");
    auto m = detail::paired_moments(p.x, p.y);
    double pc = ccc(p).value;
    if (std::abs(pc) >= 1.0 - 1e-12) return {pc, pc, true};

    double r = 0.0;
    if (m.sxx > 0.0 && m.syy > 0.0) r = m.sxy / std::sqrt(m.sxx * m.syy);
    double se_z;
    if (std::abs(r) < 1e-12 || std::abs(pc) < 1e-300) {
        se_z = 1e6;  // no usable correlation: interval spans (-1, 1)
    } else {
        const double n = static_cast<double>(p.x.size());
        double u = (m.mx - m.my) / std::pow(m.sxx * m.syy, 0.25);
        double pc2 = pc * pc;
        double sep2 = ((1.0 - r * r) * pc2 * (1.0 - pc2) / (r * r) +
                       2.0 * pc2 * pc * (1.0 - pc) * u * u / r -
                       0.5 * pc2 * pc2 * u * u * u * u / (r * r)) /
                      (n - 2.0);
        if (sep2 < 0.0) sep2 = 0.0;
        se_z = std::sqrt(sep2) / (1.0 - pc2);
    }
    double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
    double z = std::atanh(pc);
    return {std::tanh(z - q * se_z), std::tanh(z + q * se_z), false};
}

struct SpearmanResult {
    double value = 0.0;
    bool constant_series = false;
};

namespace detail {

inline std::vector<double> midranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

// Pearson correlation of mid-ranks (ties get averaged ranks).
inline SpearmanResult spearman(const PairedSeries& p) {
    p.validate();
    auto rx = detail::midranks(p.x);
    auto ry = detail::midranks(p.y);
    auto m = detail::paired_moments(rx, ry);
    if (m.sxx == 0.0 || m.syy == 0.0) return {0.0, true};
    return {m.sxy / std::sqrt(m.sxx * m.syy), false};
}

inline double cnr(double mean_a, double mean_b, double sigma_air) {
    if (!(sigma_air > 0.0)) throw ZeroNoise("cnr: sigma_air must be positive");
    return (mean_a - mean_b) / sigma_air;
}

inline double snr(double mean_a, double sigma_air) {
    if (!(sigma_air > 0.0)) throw ZeroNoise("snr: sigma_air must be positive");
    return mean_a / sigma_air;
}

// Seeded uniform permutation of all voxel intensities; metadata untouched.
inline ImageVolume shuffle_intensities(const ImageVolume& volume, uint64_t seed) {
    volume.validate();
    ImageVolume out = volume;
    Rng rng(seed);
    rng.shuffle(out.voxels);
    return out;
}

}  // namespace radrobust
