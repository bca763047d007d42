// Preprocessing and derived-image filters. All filters operate on the
// normalized original image and each intensity filter maps max|x| to itself,
// keeping the derived images on a comparable scale.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "radrobust/core.hpp"
#include "radrobust/parallel.hpp"

namespace radrobust {

// out = shift + scale * (x - mean) / population_std over the whole image.
inline ImageVolume normalize(const ImageVolume& volume, double scale = 100.0,
                             double shift = 300.0) {
    volume.validate();
    const std::size_t n = volume.voxels.size();
    double mean = 0.0;
    for (double v : volume.voxels) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : volume.voxels) {
        double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    if (var == 0.0) throw ZeroVariance("normalize: constant image");
    const double inv_sd = 1.0 / std::sqrt(var);
    ImageVolume out = volume;
    for (double& v : out.voxels) v = shift + scale * (v - mean) * inv_sd;
    return out;
}

enum class FilterId { LoG, Wavelet, Square, SquareRoot, Logarithm, Exponential };

inline const char* to_string(FilterId f) {
    switch (f) {
        case FilterId::LoG: return "log";
        case FilterId::Wavelet: return "wavelet";
        case FilterId::Square: return "square";
        case FilterId::SquareRoot: return "squareroot";
        case FilterId::Logarithm: return "logarithm";
        case FilterId::Exponential: return "exponential";
    }
    return "?";
}

struct FilteredImage {
    std::string image_type;
    ImageVolume image;
    bool all_zero = false;  // intensity filter hit max|x| == 0
};

namespace detail {

// 1-D correlation along `axis` with a symmetric kernel, edge-clamped.
inline void convolve_axis(const ImageVolume& in, ImageVolume& out, int axis,
                          const std::vector<double>& kernel) {
    const auto& g = in.grid;
    const int radius = static_cast<int>(kernel.size() / 2);
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const int len = g.dims[static_cast<std::size_t>(axis)];

    parallel_for(static_cast<std::size_t>(nz), [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        std::vector<double> line(static_cast<std::size_t>(len));
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                // walk lines once per orthogonal position
                if (axis == 0 && x > 0) continue;
                if (axis == 1 && y > 0) continue;
                if (axis == 2 && z > 0) continue;
                for (int t = 0; t < len; ++t) {
                    int cx = axis == 0 ? t : x, cy = axis == 1 ? t : y, cz = axis == 2 ? t : z;
                    line[static_cast<std::size_t>(t)] = in.at(cx, cy, cz);
                }
                for (int t = 0; t < len; ++t) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        int s = std::clamp(t + k, 0, len - 1);
                        acc += kernel[static_cast<std::size_t>(k + radius)] *
                               line[static_cast<std::size_t>(s)];
                    }
                    int cx = axis == 0 ? t : x, cy = axis == 1 ? t : y, cz = axis == 2 ? t : z;
                    out.at(cx, cy, cz) = acc;
                }
            }
        }
    });
}

}  // namespace detail

// Separable Gaussian blur with sigma in millimetres (converted per axis to
// voxel units, kernel truncated at 4 sigma), edge-clamped.
inline ImageVolume gaussian_blur_mm(const ImageVolume& volume, double sigma_mm) {
    if (!(sigma_mm > 0.0)) throw Error("gaussian_blur_mm: sigma must be positive");
    ImageVolume cur = volume;
    ImageVolume tmp = volume;
    const double sp[3] = {volume.grid.spacing.x, volume.grid.spacing.y, volume.grid.spacing.z};
    for (int axis = 0; axis < 3; ++axis) {
        double sigma_vox = sigma_mm / sp[axis];
        int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_vox)));
        std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
        double sum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            double w = std::exp(-0.5 * (k / sigma_vox) * (k / sigma_vox));
            kernel[static_cast<std::size_t>(k + radius)] = w;
            sum += w;
        }
        for (double& w : kernel) w /= sum;
        detail::convolve_axis(cur, tmp, axis, kernel);
        std::swap(cur, tmp);
    }
    return cur;
}

// Second differences summed over axes, scaled by physical spacing.
inline ImageVolume discrete_laplacian(const ImageVolume& volume) {
    const auto& g = volume.grid;
    ImageVolume out = volume;
    const double inv2[3] = {1.0 / (g.spacing.x * g.spacing.x), 1.0 / (g.spacing.y * g.spacing.y),
                            1.0 / (g.spacing.z * g.spacing.z)};
    parallel_for(static_cast<std::size_t>(g.dims[2]), [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        for (int y = 0; y < g.dims[1]; ++y) {
            for (int x = 0; x < g.dims[0]; ++x) {
                double c = volume.at(x, y, z);
                double acc = 0.0;
                auto sample = [&](int dx, int dy, int dz) {
                    int sx = std::clamp(x + dx, 0, g.dims[0] - 1);
                    int sy = std::clamp(y + dy, 0, g.dims[1] - 1);
                    int sz = std::clamp(z + dz, 0, g.dims[2] - 1);
                    return volume.at(sx, sy, sz);
                };
                acc += (sample(-1, 0, 0) - 2.0 * c + sample(1, 0, 0)) * inv2[0];
                acc += (sample(0, -1, 0) - 2.0 * c + sample(0, 1, 0)) * inv2[1];
                acc += (sample(0, 0, -1) - 2.0 * c + sample(0, 0, 1)) * inv2[2];
                out.at(x, y, z) = acc;
            }
        }
    });
    return out;
}

namespace detail {

constexpr double kInvSqrt2 = 0.7071067811865475244;

// One level of the undecimated Haar pair transform along `axis`.
// low[i] = (a[i] + a[i+1])/sqrt(2), high[i] = (a[i] - a[i+1])/sqrt(2),
// with the final sample clamped.
inline void haar_axis(const ImageVolume& in, ImageVolume& low, ImageVolume& high, int axis) {
    const auto& g = in.grid;
    const int len = g.dims[static_cast<std::size_t>(axis)];
    parallel_for(static_cast<std::size_t>(g.dims[2]), [&](std::size_t zi) {
        const int z = static_cast<int>(zi);
        for (int y = 0; y < g.dims[1]; ++y) {
            for (int x = 0; x < g.dims[0]; ++x) {
                int t = axis == 0 ? x : axis == 1 ? y : z;
                int nxt = std::min(t + 1, len - 1);
                int ax = axis == 0 ? nxt : x, ay = axis == 1 ? nxt : y, az = axis == 2 ? nxt : z;
                double a = in.at(x, y, z);
                double b = in.at(ax, ay, az);
                low.at(x, y, z) = (a + b) * kInvSqrt2;
                high.at(x, y, z) = (a - b) * kInvSqrt2;
            }
        }
    });
}

}  // namespace detail

// Single-level undecimated Haar decomposition. force2d yields the in-plane
// subbands LL/LH/HL/HH; 3-D yields LLL..HHH. Label letters are ordered
// (x filter, y filter[, z filter]).
inline std::vector<FilteredImage> wavelet_subbands(const ImageVolume& volume, bool force2d) {
    ImageVolume lx = volume, hx = volume;
    detail::haar_axis(volume, lx, hx, 0);

    std::vector<FilteredImage> out;
    ImageVolume tmp_l = volume, tmp_h = volume;
    struct Stage {
        const char* tag;
        const ImageVolume* img;
    };
    for (Stage sx : {Stage{"L", &lx}, Stage{"H", &hx}}) {
        detail::haar_axis(*sx.img, tmp_l, tmp_h, 1);
        for (Stage sy : {Stage{"L", &tmp_l}, Stage{"H", &tmp_h}}) {
            if (force2d) {
                out.push_back({std::string("wavelet.") + sx.tag + sy.tag, *sy.img, false});
            } else {
                ImageVolume zl = volume, zh = volume;
                detail::haar_axis(*sy.img, zl, zh, 2);
                out.push_back({std::string("wavelet.") + sx.tag + sy.tag + "L", zl, false});
                out.push_back({std::string("wavelet.") + sx.tag + sy.tag + "H", zh, false});
            }
        }
    }
    return out;
}

namespace detail {

inline std::string log_sigma_label(double sigma_mm) {
    // 6.0 -> "log.sigma.6.mm.3D", 2.5 -> "log.sigma.2.5.mm.3D"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", sigma_mm);
    std::string s(buf);
    for (char& ch : s)
        if (ch == '-') ch = '.';
    return "log.sigma." + s + ".mm.3D";
}

}  // namespace detail

// Applies one filter to a (normalized) volume. Wavelet returns 4 or 8
// subbands; every other filter returns a single image. If max|x| is zero the
// intensity filters are undefined and the zero image is returned flagged.
inline std::vector<FilteredImage> apply_filter(const ImageVolume& volume, FilterId filter,
                                               bool force2d, double log_sigma_mm = 6.0) {
    switch (filter) {
        case FilterId::LoG: {
            ImageVolume blurred = gaussian_blur_mm(volume, log_sigma_mm);
            return {{detail::log_sigma_label(log_sigma_mm), discrete_laplacian(blurred), false}};
        }
        case FilterId::Wavelet:
            return wavelet_subbands(volume, force2d);
        default:
            break;
    }

    double max_abs = 0.0;
    for (double v : volume.voxels) max_abs = std::max(max_abs, std::abs(v));
    FilteredImage fi;
    fi.image_type = to_string(filter);
    fi.image = volume;
    if (max_abs == 0.0) {
        fi.all_zero = true;
        for (double& v : fi.image.voxels) v = 0.0;
        return {fi};
    }
    switch (filter) {
        case FilterId::Square: {
            double inv = 1.0 / max_abs;  // y = x^2 / max|x|
            for (double& v : fi.image.voxels) v = v * v * inv;
            break;
        }
        case FilterId::SquareRoot: {
            for (double& v : fi.image.voxels)
                v = (v < 0.0 ? -1.0 : 1.0) * std::sqrt(max_abs * std::abs(v));
            break;
        }
        case FilterId::Logarithm: {
            double c = max_abs / std::log1p(max_abs);
            for (double& v : fi.image.voxels)
                v = (v < 0.0 ? -1.0 : 1.0) * c * std::log1p(std::abs(v));
            break;
        }
        case FilterId::Exponential: {
            double c = std::log(max_abs) / max_abs;
            for (double& v : fi.image.voxels) v = std::exp(c * v);
            break;
        }
        default:
            throw Error("apply_filter: unreachable");
    }
    return {fi};
}

}  // namespace radrobust
