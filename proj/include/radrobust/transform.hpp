#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "radrobust/core.hpp"

namespace radrobust {

// Resamples a labeled mask onto target_grid under rigid transform t
// (t maps source physical space into target physical space). Labels are
// transferred by nearest neighbor so they stay integral. Throws RoiLost if
// any ROI id ends up with zero voxels.
inline RoiMask transform_mask(const RoiMask& mask, const RigidTransform& t,
                              const GridMeta& target_grid) {
    mask.validate();
    t.validate();
    target_grid.validate();

    RoiMask out;
    out.grid = target_grid;
    out.labels.assign(target_grid.voxel_count(), 0);

    const int n_rois = mask.roi_count();
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_rois) + 1, 0);

    const auto& src = mask.grid;
    for (int z = 0; z < target_grid.dims[2]; ++z) {
        for (int y = 0; y < target_grid.dims[1]; ++y) {
            for (int x = 0; x < target_grid.dims[0]; ++x) {
                Vec3 p = target_grid.index_to_physical(x, y, z);
                Vec3 q = t.apply_inverse(p);
                Vec3 ci = src.physical_to_index(q);
                int sx = static_cast<int>(std::lround(ci.x));
                int sy = static_cast<int>(std::lround(ci.y));
                int sz = static_cast<int>(std::lround(ci.z));
                if (!src.contains(sx, sy, sz)) continue;
                int32_t label = mask.at(sx, sy, sz);
                out.labels[target_grid.index(x, y, z)] = label;
                ++counts[static_cast<std::size_t>(label)];
            }
        }
    }

    for (int k = 1; k <= n_rois; ++k)
        if (counts[static_cast<std::size_t>(k)] == 0)
            throw RoiLost("transform_mask: ROI " + std::to_string(k) +
                          " has no voxels on the target grid");
    return out;
}

}  // namespace radrobust
