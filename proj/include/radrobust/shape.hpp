// Mask-based 3D shape descriptors. The mesh comes from marching tetrahedra
// on the 0.5-isosurface of the binary mask (6 Kuhn tetrahedra per grid cell,
// midpoint vertices). The Kuhn decomposition tiles space consistently, so the
// resulting triangle soup is closed and the divergence-theorem volume is
// well defined. All geometry is evaluated in physical (mm) coordinates.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "radrobust/core.hpp"

namespace radrobust {

inline const std::vector<std::string>& shape_feature_names() {
    static const std::vector<std::string> names = {
        "Elongation", "Flatness", "LeastAxisLength", "MajorAxisLength",
        "Maximum2DDiameterColumn", "Maximum2DDiameterRow", "Maximum2DDiameterSlice",
        "Maximum3DDiameter", "MeshVolume", "MinorAxisLength", "Sphericity",
        "SurfaceArea", "SurfaceVolumeRatio", "VoxelVolume"};
    return names;
}

namespace detail {

struct MeshStats {
    double volume = 0.0;
    double area = 0.0;
};

// Cube corner offsets, bit pattern (x, y, z).
constexpr int kCubeCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                   {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Kuhn decomposition around the main diagonal corner0 -> corner6.
constexpr int kKuhnTet[6][4] = {{0, 1, 2, 6}, {0, 2, 3, 6}, {0, 3, 7, 6},
                                {0, 7, 4, 6}, {0, 4, 5, 6}, {0, 5, 1, 6}};

inline void accumulate_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                const Vec3& inside_ref, MeshStats& stats) {
    Vec3 n = (b - a).cross(c - a);
    Vec3 centroid = (a + b + c) * (1.0 / 3.0);
    bool flip = n.dot(centroid - inside_ref) < 0.0;
    const Vec3& p1 = a;
    const Vec3& p2 = flip ? c : b;
    const Vec3& p3 = flip ? b : c;
    stats.area += 0.5 * (p2 - p1).cross(p3 - p1).norm();
    stats.volume += p1.dot(p2.cross(p3)) / 6.0;
}

inline void mesh_tetrahedron(const std::array<Vec3, 4>& q, const std::array<bool, 4>& in,
                             MeshStats& stats) {
    int count = 0;
    for (bool b : in) count += b ? 1 : 0;
    if (count == 0 || count == 4) return;

    auto mid = [&](int i, int j) { return (q[static_cast<std::size_t>(i)] + q[static_cast<std::size_t>(j)]) * 0.5; };

    if (count == 1 || count == 3) {
        int pivot = -1;
        bool pivot_inside = (count == 1);
        for (int i = 0; i < 4; ++i)
            if (in[static_cast<std::size_t>(i)] == pivot_inside) pivot = i;
        std::array<int, 3> rest{};
        int r = 0;
        for (int i = 0; i < 4; ++i)
            if (i != pivot) rest[static_cast<std::size_t>(r++)] = i;
        Vec3 ref;
        if (pivot_inside) {
            ref = q[static_cast<std::size_t>(pivot)];
        } else {
            ref = (q[static_cast<std::size_t>(rest[0])] + q[static_cast<std::size_t>(rest[1])] +
                   q[static_cast<std::size_t>(rest[2])]) *
                  (1.0 / 3.0);
        }
        accumulate_triangle(mid(pivot, rest[0]), mid(pivot, rest[1]), mid(pivot, rest[2]), ref,
                            stats);
        return;
    }

    // 2 in / 2 out: quad split into two triangles
    std::array<int, 2> ins{}, outs{};
    int ni = 0, no = 0;
    for (int i = 0; i < 4; ++i) {
        if (in[static_cast<std::size_t>(i)])
            ins[static_cast<std::size_t>(ni++)] = i;
        else
            outs[static_cast<std::size_t>(no++)] = i;
    }
    Vec3 a = mid(ins[0], outs[0]);
    Vec3 b = mid(ins[0], outs[1]);
    Vec3 c = mid(ins[1], outs[1]);
    Vec3 d = mid(ins[1], outs[0]);
    Vec3 ref = (q[static_cast<std::size_t>(ins[0])] + q[static_cast<std::size_t>(ins[1])]) * 0.5;
    accumulate_triangle(a, b, c, ref, stats);
    accumulate_triangle(a, c, d, ref, stats);
}

// 2D convex hull (monotone chain) over (u, v) pairs.
inline std::vector<std::array<double, 2>> hull2d(std::vector<std::array<double, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

inline double max_pairwise_dist2_2d(const std::vector<std::array<double, 2>>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double du = pts[i][0] - pts[j][0], dv = pts[i][1] - pts[j][1];
            best = std::max(best, du * du + dv * dv);
        }
    return best;
}

// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi, descending.
inline std::array<double, 3> symmetric_eigenvalues_desc_3x3(std::array<double, 9> a) {
    auto at = [&a](int r, int c) -> double& { return a[static_cast<std::size_t>(3 * r + c)]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(at(0, 1)) + std::abs(at(0, 2)) + std::abs(at(1, 2));
        if (off < 1e-15 * (std::abs(at(0, 0)) + std::abs(at(1, 1)) + std::abs(at(2, 2)) + 1e-300))
            break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (at(p, q) == 0.0) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, 3> ev{at(0, 0), at(1, 1), at(2, 2)};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

// Population covariance eigenvalues of a point cloud, descending.
inline std::array<double, 3> covariance_eigenvalues_desc(const std::vector<Vec3>& pts) {
    const double n = static_cast<double>(pts.size());
    Vec3 mean{0, 0, 0};
    for (const auto& p : pts) mean = mean + p;
    mean = mean * (1.0 / n);
    std::array<double, 9> cov{};
    for (const auto& p : pts) {
        Vec3 d = p - mean;
        const double dd[3] = {d.x, d.y, d.z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cov[static_cast<std::size_t>(3 * r + c)] += dd[r] * dd[c];
    }
    for (double& v : cov) v /= n;
    return symmetric_eigenvalues_desc_3x3(cov);
}

}  // namespace detail

// Computes the 14 shape features of one ROI. `flags` collects degenerate
// fallbacks (single-voxel / collinear ROIs).
inline std::vector<double> shape_features(const RoiMask& mask, int roi_id,
                                          std::vector<std::string>* flags = nullptr) {
    const auto& g = mask.grid;
    const double sx = g.spacing.x, sy = g.spacing.y, sz = g.spacing.z;

    // gather ROI voxels and bounding box
    std::vector<std::array<int, 3>> vox;
    int lo[3] = {g.dims[0], g.dims[1], g.dims[2]}, hi[3] = {-1, -1, -1};
    for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
            for (int x = 0; x < g.dims[0]; ++x)
                if (mask.at(x, y, z) == roi_id) {
                    vox.push_back({x, y, z});
                    lo[0] = std::min(lo[0], x);
                    lo[1] = std::min(lo[1], y);
                    lo[2] = std::min(lo[2], z);
                    hi[0] = std::max(hi[0], x);
                    hi[1] = std::max(hi[1], y);
                    hi[2] = std::max(hi[2], z);
                }
    if (vox.empty()) throw Error("shape_features: ROI " + std::to_string(roi_id) + " is empty");

    // padded binary sub-grid (1 empty layer on every side closes the surface)
    const int bx = hi[0] - lo[0] + 3, by = hi[1] - lo[1] + 3, bz = hi[2] - lo[2] + 3;
    std::vector<uint8_t> bin(static_cast<std::size_t>(bx) * static_cast<std::size_t>(by) *
                                 static_cast<std::size_t>(bz),
                             0);
    auto bidx = [&](int x, int y, int z) {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(bx) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(by) * static_cast<std::size_t>(z));
    };
    for (const auto& v : vox) bin[bidx(v[0] - lo[0] + 1, v[1] - lo[1] + 1, v[2] - lo[2] + 1)] = 1;

    // marching tetrahedra over all cells of the padded grid
    detail::MeshStats mesh;
    for (int z = 0; z + 1 < bz; ++z) {
        for (int y = 0; y + 1 < by; ++y) {
            for (int x = 0; x + 1 < bx; ++x) {
                std::array<bool, 8> inside{};
                bool any = false, all = true;
                for (int c = 0; c < 8; ++c) {
                    bool b = bin[bidx(x + detail::kCubeCorner[c][0], y + detail::kCubeCorner[c][1],
                                      z + detail::kCubeCorner[c][2])] != 0;
                    inside[static_cast<std::size_t>(c)] = b;
                    any = any || b;
                    all = all && b;
                }
                if (!any || all) continue;
                std::array<Vec3, 8> pos;
                for (int c = 0; c < 8; ++c)
                    pos[static_cast<std::size_t>(c)] =
                        Vec3{(x + detail::kCubeCorner[c][0]) * sx, (y + detail::kCubeCorner[c][1]) * sy,
                             (z + detail::kCubeCorner[c][2]) * sz};
                for (const auto& tet : detail::kKuhnTet) {
                    std::array<Vec3, 4> q{pos[static_cast<std::size_t>(tet[0])], pos[static_cast<std::size_t>(tet[1])],
                                          pos[static_cast<std::size_t>(tet[2])], pos[static_cast<std::size_t>(tet[3])]};
                    std::array<bool, 4> f{inside[static_cast<std::size_t>(tet[0])], inside[static_cast<std::size_t>(tet[1])],
                                          inside[static_cast<std::size_t>(tet[2])], inside[static_cast<std::size_t>(tet[3])]};
                    detail::mesh_tetrahedron(q, f, mesh);
                }
            }
        }
    }
    double mesh_volume = std::abs(mesh.volume);
    double surface_area = mesh.area;

    // principal axes from the population covariance of voxel centers
    std::vector<Vec3> pts;
    pts.reserve(vox.size());
    for (const auto& v : vox) pts.push_back({v[0] * sx, v[1] * sy, v[2] * sz});
    std::array<double, 3> ev = detail::covariance_eigenvalues_desc(pts);
    for (double& e : ev) e = std::max(e, 0.0);

    double major = 4.0 * std::sqrt(ev[0]);
    double minor = 4.0 * std::sqrt(ev[1]);
    double least = 4.0 * std::sqrt(ev[2]);
    double elongation = 1.0, flatness = 1.0;
    if (ev[0] > 0.0) {
        elongation = std::sqrt(ev[1] / ev[0]);
        flatness = std::sqrt(ev[2] / ev[0]);
    } else if (flags) {
        flags->push_back("degenerate ROI: Elongation/Flatness fall back to 1");
    }

    // boundary voxels (a 6-neighbor outside the ROI) drive the diameters
    std::vector<std::array<int, 3>> boundary;
    for (const auto& v : vox) {
        bool edge = false;
        static const int d6[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                     {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        for (const auto& d : d6) {
            int nx = v[0] + d[0], ny = v[1] + d[1], nz = v[2] + d[2];
            if (!g.contains(nx, ny, nz) || mask.at(nx, ny, nz) != roi_id) {
                edge = true;
                break;
            }
        }
        if (edge) boundary.push_back(v);
    }

    // group by one axis, hull the remaining two, take max pairwise distances
    auto planar_max = [&](int plane_axis, bool include_cross_plane) {
        std::map<int, std::vector<std::array<double, 2>>> groups;
        int u_axis = plane_axis == 0 ? 1 : 0;
        int v_axis = plane_axis == 2 ? 1 : 2;
        const double sp[3] = {sx, sy, sz};
        for (const auto& v : boundary)
            groups[v[plane_axis]].push_back(
                {v[u_axis] * sp[u_axis], v[v_axis] * sp[v_axis]});
        double best = 0.0;
        std::vector<std::array<double, 3>> hull_pts;
        for (auto& [coord, pts2] : groups) {
            auto h = detail::hull2d(std::move(pts2));
            best = std::max(best, detail::max_pairwise_dist2_2d(h));
            if (include_cross_plane)
                for (const auto& p : h)
                    hull_pts.push_back({p[0], p[1], coord * sp[plane_axis]});
        }
        if (include_cross_plane) {
            for (std::size_t i = 0; i < hull_pts.size(); ++i)
                for (std::size_t j = i + 1; j < hull_pts.size(); ++j) {
                    double d0 = hull_pts[i][0] - hull_pts[j][0];
                    double d1 = hull_pts[i][1] - hull_pts[j][1];
                    double d2 = hull_pts[i][2] - hull_pts[j][2];
                    best = std::max(best, d0 * d0 + d1 * d1 + d2 * d2);
                }
        }
        return std::sqrt(best);
    };

    double diam_slice = planar_max(2, false);   // same z: axial plane
    double diam_column = planar_max(1, false);  // same y: coronal plane
    double diam_row = planar_max(0, false);     // same x: sagittal plane
    double diam_3d = planar_max(2, true);

    double voxel_volume = static_cast<double>(vox.size()) * g.voxel_volume();
    double sphericity = 0.0, sv_ratio = 0.0;
    if (mesh_volume > 0.0 && surface_area > 0.0) {
        sphericity = std::cbrt(36.0 * 3.14159265358979323846 * mesh_volume * mesh_volume) /
                     surface_area;
        sv_ratio = surface_area / mesh_volume;
    } else if (flags) {
        flags->push_back("degenerate mesh: Sphericity/SurfaceVolumeRatio fall back to 0");
    }

    return {elongation, flatness,  least,      major,      diam_column,
            diam_row,   diam_slice, diam_3d,   mesh_volume, minor,
            sphericity, surface_area, sv_ratio, voxel_volume};
}

}  // namespace radrobust
