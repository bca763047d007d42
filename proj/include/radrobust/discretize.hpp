// Fixed-bin-width gray-level discretization, anchored at the ROI minimum:
// g(x) = floor((x - min)/W) + 1.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "radrobust/core.hpp"

namespace radrobust {

struct BinWidthSpec {
    bool automatic = false;
    double width = 5.0;          // used when !automatic
    int min_bins = 30;           // bounds honored in auto mode
    int max_bins = 130;

    static BinWidthSpec fixed(double w) { return {false, w, 30, 130}; }
    static BinWidthSpec auto_bins(int lo = 30, int hi = 130) { return {true, 0.0, lo, hi}; }
};

struct DiscretizedRoi {
    std::vector<int> levels;  // one 1-based level per input value, same order
    int bin_count = 0;
    double bin_width = 0.0;
    bool constant_roi = false;
};

namespace detail {

inline int bins_for_width(double range, double width) {
    return static_cast<int>(std::floor(range / width)) + 1;
}

// Geometric ladder {1, 2, 2.5, 5} x 10^n. Largest admissible width wins.
inline double auto_bin_width(double range, int min_bins, int max_bins) {
    const double mantissas[4] = {1.0, 2.0, 2.5, 5.0};
    double best = -1.0;
    for (int e = -12; e <= 12; ++e) {
        double scale = std::pow(10.0, e);
        for (double m : mantissas) {
            double w = m * scale;
            int bins = bins_for_width(range, w);
            if (bins >= min_bins && bins <= max_bins) best = std::max(best, w);
        }
    }
    if (best < 0.0)
        throw Error("auto_bin_width: no ladder width lands in the bin-count bounds");
    return best;
}

}  // namespace detail

inline DiscretizedRoi discretize(std::span<const double> roi_values, const BinWidthSpec& spec) {
    if (roi_values.empty()) throw Error("discretize: empty ROI");
    double lo = roi_values[0], hi = roi_values[0];
    for (double v : roi_values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    DiscretizedRoi out;
    if (hi == lo) {
        out.levels.assign(roi_values.size(), 1);
        out.bin_count = 1;
        out.bin_width = spec.automatic ? 1.0 : spec.width;
        out.constant_roi = true;
        return out;
    }
    const double range = hi - lo;
    double width = spec.automatic ? detail::auto_bin_width(range, spec.min_bins, spec.max_bins)
                                  : spec.width;
    if (!(width > 0.0)) throw Error("discretize: bin width must be positive");

    out.bin_width = width;
    out.bin_count = detail::bins_for_width(range, width);
    out.levels.resize(roi_values.size());
    for (std::size_t i = 0; i < roi_values.size(); ++i) {
        int g = static_cast<int>(std::floor((roi_values[i] - lo) / width)) + 1;
        out.levels[i] = std::clamp(g, 1, out.bin_count);
    }
    return out;
}

}  // namespace radrobust
