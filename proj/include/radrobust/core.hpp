// Grid model shared by every module: volumes, masks, rigid transforms.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace radrobust {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public Error {
public:
    using Error::Error;
};
class UnsupportedFormat : public Error {
public:
    using Error::Error;
};
class CorruptHeader : public Error {
public:
    using Error::Error;
};
class RoiLost : public Error {
public:
    using Error::Error;
};
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};
class ZeroVariance : public Error {
public:
    using Error::Error;
};
class ZeroNoise : public Error {
public:
    using Error::Error;
};
class TooFewSamples : public Error {
public:
    using Error::Error;
};
class MismatchedRoiSets : public Error {
public:
    using Error::Error;
};
class MissingShapeColumns : public Error {
public:
    using Error::Error;
};
class EmptyUniverse : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

    Vec3 mul(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 mul(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
    double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    // Max deviation from orthonormality over column norms and pairwise dots.
    double orthonormality_error() const {
        double e = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double d = column(i).dot(column(j));
                e = std::max(e, std::abs(d - (i == j ? 1.0 : 0.0)));
            }
        }
        return e;
    }
};

inline Mat3 rotation_xyz(double rx_rad, double ry_rad, double rz_rad) {
    auto rot = [](int axis, double a) {
        Mat3 r;
        double c = std::cos(a), s = std::sin(a);
        int u = (axis + 1) % 3, v = (axis + 2) % 3;
        r(u, u) = c;
        r(u, v) = -s;
        r(v, u) = s;
        r(v, v) = c;
        return r;
    };
    return rot(2, rz_rad).mul(rot(1, ry_rad).mul(rot(0, rx_rad)));
}

// Voxel grid geometry. Voxel (0,0,0) center sits at `origin`; x is the
// fastest-varying index in the flat voxel array.
struct GridMeta {
    std::array<int, 3> dims{1, 1, 1};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    Mat3 direction = Mat3::identity();

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    bool contains(int x, int y, int z) const {
        return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
    }
    Vec3 index_to_physical(double x, double y, double z) const {
        Vec3 scaled{x * spacing.x, y * spacing.y, z * spacing.z};
        return origin + direction.mul(scaled);
    }
    // Continuous index of a physical point (inverse of index_to_physical).
    Vec3 physical_to_index(const Vec3& p) const {
        Vec3 local = direction.transposed().mul(p - origin);
        return {local.x / spacing.x, local.y / spacing.y, local.z / spacing.z};
    }
    double voxel_volume() const { return spacing.x * spacing.y * spacing.z; }

    bool same_grid(const GridMeta& o, double tol = 1e-9) const {
        if (dims != o.dims) return false;
        auto close = [tol](double a, double b) { return std::abs(a - b) <= tol; };
        bool ok = close(spacing.x, o.spacing.x) && close(spacing.y, o.spacing.y) &&
                  close(spacing.z, o.spacing.z) && close(origin.x, o.origin.x) &&
                  close(origin.y, o.origin.y) && close(origin.z, o.origin.z);
        for (std::size_t i = 0; i < 9 && ok; ++i) ok = close(direction.m[i], o.direction.m[i]);
        return ok;
    }

    void validate() const {
        if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
            throw Error("GridMeta: dims must be >= 1");
        if (!(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0))
            throw Error("GridMeta: spacing must be positive");
        if (direction.orthonormality_error() > 1e-6)
            throw Error("GridMeta: direction matrix is not orthonormal");
    }
};

struct ImageVolume {
    GridMeta grid;
    std::vector<double> voxels;  // x-fastest ordering

    double at(int x, int y, int z) const { return voxels[grid.index(x, y, z)]; }
    double& at(int x, int y, int z) { return voxels[grid.index(x, y, z)]; }

    void validate() const {
        grid.validate();
        if (voxels.size() != grid.voxel_count())
            throw Error("ImageVolume: voxel array size does not match dims");
        for (double v : voxels)
            if (!std::isfinite(v)) throw Error("ImageVolume: non-finite intensity");
    }
};

// Labeled mask on the same grid layout as an ImageVolume. 0 = background,
// k > 0 = ROI id; ids must form a contiguous set {1..m} with no empty ROI.
struct RoiMask {
    GridMeta grid;
    std::vector<int32_t> labels;

    int32_t at(int x, int y, int z) const { return labels[grid.index(x, y, z)]; }
    int32_t& at(int x, int y, int z) { return labels[grid.index(x, y, z)]; }

    int roi_count() const {
        int32_t mx = 0;
        for (int32_t v : labels) mx = std::max(mx, v);
        return static_cast<int>(mx);
    }

    void validate() const {
        grid.validate();
        if (labels.size() != grid.voxel_count())
            throw Error("RoiMask: label array size does not match dims");
        int32_t mx = 0;
        for (int32_t v : labels) {
            if (v < 0) throw Error("RoiMask: negative label");
            mx = std::max(mx, v);
        }
        std::vector<std::size_t> counts(static_cast<std::size_t>(mx) + 1, 0);
        for (int32_t v : labels) ++counts[static_cast<std::size_t>(v)];
        for (int32_t k = 1; k <= mx; ++k)
            if (counts[static_cast<std::size_t>(k)] == 0)
                throw Error("RoiMask: ROI ids are not contiguous (id " + std::to_string(k) +
                            " is empty)");
    }
};

struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{0.0, 0.0, 0.0};

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation.mul(p) + translation; }
    Vec3 apply_inverse(const Vec3& p) const { return rotation.transposed().mul(p - translation); }

    void validate() const {
        if (rotation.orthonormality_error() > 1e-9)
            throw Error("RigidTransform: rotation is not orthonormal");
        if (std::abs(rotation.determinant() - 1.0) > 1e-9)
            throw Error("RigidTransform: rotation determinant must be 1");
    }
};

}  // namespace radrobust
