// First-order (intensity histogram) features. Moments are population
// moments; Entropy and Uniformity use the fixed-bin-width discretization.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "radrobust/core.hpp"
#include "radrobust/discretize.hpp"

namespace radrobust {

inline const std::vector<std::string>& firstorder_feature_names() {
    static const std::vector<std::string> names = {
        "10Percentile", "90Percentile", "Energy", "Entropy", "InterquartileRange",
        "Kurtosis", "Maximum", "MeanAbsoluteDeviation", "Mean", "Median",
        "Minimum", "Range", "RobustMeanAbsoluteDeviation", "RootMeanSquared",
        "Skewness", "TotalEnergy", "Uniformity", "Variance"};
    return names;
}

namespace detail {

// numpy-style percentile with linear interpolation on sorted data.
inline double percentile_sorted(std::span<const double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double pos = q / 100.0 * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, n - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

// `values` are the raw (possibly filtered) intensities inside one ROI;
// `disc` must come from the same value sequence.
inline std::vector<double> firstorder_features(std::span<const double> values,
                                               const DiscretizedRoi& disc, double voxel_volume,
                                               std::vector<std::string>* flags = nullptr) {
    if (values.empty()) throw Error("firstorder_features: empty ROI");
    const double n = static_cast<double>(values.size());

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    double mean = 0.0, energy = 0.0;
    for (double v : values) {
        mean += v;
        energy += v * v;
    }
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
    for (double v : values) {
        double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += std::abs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;

    double p10 = detail::percentile_sorted(sorted, 10.0);
    double p25 = detail::percentile_sorted(sorted, 25.0);
    double p75 = detail::percentile_sorted(sorted, 75.0);
    double p90 = detail::percentile_sorted(sorted, 90.0);
    double median = detail::percentile_sorted(sorted, 50.0);

    // robust MAD: values within [P10, P90], deviation from their own mean
    double rmad = 0.0;
    {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (double v : sorted)
            if (v >= p10 && v <= p90) {
                sum += v;
                ++cnt;
            }
        if (cnt > 0) {
            double sub_mean = sum / static_cast<double>(cnt);
            for (double v : sorted)
                if (v >= p10 && v <= p90) rmad += std::abs(v - sub_mean);
            rmad /= static_cast<double>(cnt);
        }
    }

    double skewness = 0.0, kurtosis = 0.0;
    if (m2 > 0.0) {
        skewness = m3 / std::pow(m2, 1.5);
        kurtosis = m4 / (m2 * m2);
    } else if (flags) {
        flags->push_back("constant ROI: Skewness/Kurtosis fall back to 0");
    }

    // histogram features on the discretized levels
    std::vector<double> p(static_cast<std::size_t>(disc.bin_count), 0.0);
    for (int g : disc.levels) p[static_cast<std::size_t>(g - 1)] += 1.0;
    for (double& v : p) v /= n;
    double entropy = 0.0, uniformity = 0.0;
    for (double q : p) {
        if (q > 0.0) entropy -= q * std::log2(q);
        uniformity += q * q;
    }

    std::vector<double> out(18);
    out[0] = p10;
    out[1] = p90;
    out[2] = energy;
    out[3] = entropy;
    out[4] = p75 - p25;
    out[5] = kurtosis;
    out[6] = sorted.back();
    out[7] = mad;
    out[8] = mean;
    out[9] = median;
    out[10] = sorted.front();
    out[11] = sorted.back() - sorted.front();
    out[12] = rmad;
    out[13] = std::sqrt(energy / n);
    out[14] = skewness;
    out[15] = energy * voxel_volume;
    out[16] = uniformity;
    out[17] = m2;
    return out;
}

}  // namespace radrobust
