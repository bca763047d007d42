// Single-file uncompressed NIfTI-1 reader/writer.
//
// Scope is deliberately narrow: .nii (not .nii.gz, not NIfTI-2, not DICOM),
// datatypes uint8 / int16 / float32 / float64, dim[0] of 3 or 4 with a
// single frame. Both byte orders are accepted on read; writing always emits
// native order, float64, slope 1 / intercept 0, so written volumes survive a
// read round-trip bit-exactly.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "radrobust/core.hpp"

namespace radrobust {
namespace detail {

inline uint16_t bswap16(uint16_t v) { return static_cast<uint16_t>((v >> 8) | (v << 8)); }
inline uint32_t bswap32(uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}
inline uint64_t bswap64(uint64_t v) {
    return (static_cast<uint64_t>(bswap32(static_cast<uint32_t>(v))) << 32) |
           bswap32(static_cast<uint32_t>(v >> 32));
}

class HeaderView {
public:
    HeaderView(const unsigned char* bytes, bool swap) : b_(bytes), swap_(swap) {}

    int16_t i16(std::size_t off) const {
        uint16_t v;
        std::memcpy(&v, b_ + off, 2);
        if (swap_) v = bswap16(v);
        int16_t r;
        std::memcpy(&r, &v, 2);
        return r;
    }
    int32_t i32(std::size_t off) const {
        uint32_t v;
        std::memcpy(&v, b_ + off, 4);
        if (swap_) v = bswap32(v);
        int32_t r;
        std::memcpy(&r, &v, 4);
        return r;
    }
    float f32(std::size_t off) const {
        uint32_t v;
        std::memcpy(&v, b_ + off, 4);
        if (swap_) v = bswap32(v);
        float r;
        std::memcpy(&r, &v, 4);
        return r;
    }

private:
    const unsigned char* b_;
    bool swap_;
};

inline void put_i16(unsigned char* b, std::size_t off, int16_t v) { std::memcpy(b + off, &v, 2); }
inline void put_i32(unsigned char* b, std::size_t off, int32_t v) { std::memcpy(b + off, &v, 4); }
inline void put_f32(unsigned char* b, std::size_t off, float v) { std::memcpy(b + off, &v, 4); }

// NIfTI-1 datatype codes.
enum NiftiDatatype : int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_FLOAT32 = 16,
    DT_FLOAT64 = 64,
};

}  // namespace detail

inline ImageVolume read_nifti(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::array<unsigned char, 348> hdr{};
    in.read(reinterpret_cast<char*>(hdr.data()), 348);
    if (in.gcount() != 348) throw IoError("short read on header of " + path);

    if (hdr[0] == 0x1f && hdr[1] == 0x8b)
        throw UnsupportedFormat(path + " is gzip-compressed; only uncompressed .nii is supported");

    bool swap = false;
    {
        detail::HeaderView native(hdr.data(), false);
        if (native.i32(0) != 348) {
            detail::HeaderView swapped(hdr.data(), true);
            if (swapped.i32(0) != 348)
                throw CorruptHeader(path + ": sizeof_hdr is not 348 in either byte order");
            swap = true;
        }
    }
    detail::HeaderView h(hdr.data(), swap);

    if (!(hdr[344] == 'n' && (hdr[345] == '+' || hdr[345] == 'i') && hdr[346] == '1' &&
          hdr[347] == '\0'))
        throw UnsupportedFormat(path + ": bad NIfTI-1 magic");
    if (hdr[345] == 'i')
        throw UnsupportedFormat(path + ": two-file (.hdr/.img) NIfTI is not supported");

    int16_t ndim = h.i16(40);
    if (ndim < 3 || ndim > 4) throw CorruptHeader(path + ": dim[0] must be 3 or 4");
    int nx = h.i16(42), ny = h.i16(44), nz = h.i16(46);
    if (nx <= 0 || ny <= 0 || nz <= 0) throw CorruptHeader(path + ": nonpositive dims");
    if (ndim == 4 && h.i16(48) > 1)
        throw UnsupportedFormat(path + ": multi-frame files are not supported");

    int16_t datatype = h.i16(70);
    std::size_t elem_size;
    switch (datatype) {
        case detail::DT_UINT8: elem_size = 1; break;
        case detail::DT_INT16: elem_size = 2; break;
        case detail::DT_FLOAT32: elem_size = 4; break;
        case detail::DT_FLOAT64: elem_size = 8; break;
        default:
            throw UnsupportedFormat(path + ": datatype " + std::to_string(datatype) +
                                    " not supported");
    }

    GridMeta grid;
    grid.dims = {nx, ny, nz};
    grid.spacing = {static_cast<double>(h.f32(80)), static_cast<double>(h.f32(84)),
                    static_cast<double>(h.f32(88))};
    if (!(grid.spacing.x > 0 && grid.spacing.y > 0 && grid.spacing.z > 0))
        throw CorruptHeader(path + ": nonpositive pixdim");

    int16_t qform_code = h.i16(252);
    int16_t sform_code = h.i16(254);
    if (sform_code > 0) {
        // srow rows hold direction * diag(spacing) with origin in column 3.
        double rows[3][4];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c)
                rows[r][c] = static_cast<double>(h.f32(280 + 16 * static_cast<std::size_t>(r) +
                                                       4 * static_cast<std::size_t>(c)));
        grid.origin = {rows[0][3], rows[1][3], rows[2][3]};
        const double sp[3] = {grid.spacing.x, grid.spacing.y, grid.spacing.z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) grid.direction(r, c) = rows[r][c] / sp[c];
    } else if (qform_code > 0) {
        double b = h.f32(256), c = h.f32(260), d = h.f32(264);
        double a2 = 1.0 - b * b - c * c - d * d;
        double a = a2 > 0.0 ? std::sqrt(a2) : 0.0;
        Mat3 r;
        r(0, 0) = a * a + b * b - c * c - d * d;
        r(0, 1) = 2 * b * c - 2 * a * d;
        r(0, 2) = 2 * b * d + 2 * a * c;
        r(1, 0) = 2 * b * c + 2 * a * d;
        r(1, 1) = a * a + c * c - b * b - d * d;
        r(1, 2) = 2 * c * d - 2 * a * b;
        r(2, 0) = 2 * b * d - 2 * a * c;
        r(2, 1) = 2 * c * d + 2 * a * b;
        r(2, 2) = a * a + d * d - b * b - c * c;
        double qfac = h.f32(76) < 0.0f ? -1.0 : 1.0;
        for (int i = 0; i < 3; ++i) r(i, 2) *= qfac;
        grid.direction = r;
        grid.origin = {static_cast<double>(h.f32(268)), static_cast<double>(h.f32(272)),
                       static_cast<double>(h.f32(276))};
    }
    // else: no spatial transform recorded; identity direction, zero origin.

    double slope = h.f32(112);
    double inter = h.f32(116);
    std::size_t vox_offset = static_cast<std::size_t>(h.f32(108));
    if (vox_offset < 348) vox_offset = 352;

    std::size_t n = grid.voxel_count();
    std::vector<unsigned char> raw(n * elem_size);
    in.seekg(static_cast<std::streamoff>(vox_offset), std::ios::beg);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw IoError("short read on voxel data of " + path);

    ImageVolume vol;
    vol.grid = grid;
    vol.voxels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        switch (datatype) {
            case detail::DT_UINT8:
                v = static_cast<double>(raw[i]);
                break;
            case detail::DT_INT16: {
                uint16_t u;
                std::memcpy(&u, raw.data() + 2 * i, 2);
                if (swap) u = detail::bswap16(u);
                int16_t s;
                std::memcpy(&s, &u, 2);
                v = static_cast<double>(s);
                break;
            }
            case detail::DT_FLOAT32: {
                uint32_t u;
                std::memcpy(&u, raw.data() + 4 * i, 4);
                if (swap) u = detail::bswap32(u);
                float f;
                std::memcpy(&f, &u, 4);
                v = static_cast<double>(f);
                break;
            }
            case detail::DT_FLOAT64: {
                uint64_t u;
                std::memcpy(&u, raw.data() + 8 * i, 8);
                if (swap) u = detail::bswap64(u);
                std::memcpy(&v, &u, 8);
                break;
            }
        }
        if (slope != 0.0) v = slope * v + inter;
        vol.voxels[i] = v;
    }
    vol.validate();
    return vol;
}

namespace detail {

inline std::array<unsigned char, 352> make_header(const GridMeta& grid, int16_t datatype,
                                                  int16_t bitpix) {
    std::array<unsigned char, 352> hdr{};
    unsigned char* b = hdr.data();
    put_i32(b, 0, 348);
    b[38] = 'r';  // regular
    put_i16(b, 40, 3);
    put_i16(b, 42, static_cast<int16_t>(grid.dims[0]));
    put_i16(b, 44, static_cast<int16_t>(grid.dims[1]));
    put_i16(b, 46, static_cast<int16_t>(grid.dims[2]));
    for (std::size_t k = 48; k <= 54; k += 2) put_i16(b, k, 1);
    put_i16(b, 70, datatype);
    put_i16(b, 72, bitpix);
    put_f32(b, 76, 1.0f);  // pixdim[0] (qfac), unused with sform
    put_f32(b, 80, static_cast<float>(grid.spacing.x));
    put_f32(b, 84, static_cast<float>(grid.spacing.y));
    put_f32(b, 88, static_cast<float>(grid.spacing.z));
    put_f32(b, 108, 352.0f);  // vox_offset
    put_f32(b, 112, 1.0f);    // scl_slope
    put_f32(b, 116, 0.0f);    // scl_inter
    std::memcpy(b + 148, "radrobust", 9);
    put_i16(b, 252, 0);  // qform_code
    put_i16(b, 254, 1);  // sform_code
    const double sp[3] = {grid.spacing.x, grid.spacing.y, grid.spacing.z};
    const double org[3] = {grid.origin.x, grid.origin.y, grid.origin.z};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c)
            put_f32(b, 280 + 16 * static_cast<std::size_t>(r) + 4 * static_cast<std::size_t>(c),
                    static_cast<float>(grid.direction(r, c) * sp[c]));
        put_f32(b, 280 + 16 * static_cast<std::size_t>(r) + 12, static_cast<float>(org[r]));
    }
    b[344] = 'n';
    b[345] = '+';
    b[346] = '1';
    b[347] = '\0';
    return hdr;
}

}  // namespace detail

inline void write_nifti(const ImageVolume& volume, const std::string& path) {
    volume.validate();
    auto hdr = detail::make_header(volume.grid, detail::DT_FLOAT64, 64);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
    out.write(reinterpret_cast<const char*>(volume.voxels.data()),
              static_cast<std::streamsize>(volume.voxels.size() * sizeof(double)));
    if (!out) throw IoError("write failed on " + path);
}

// Masks travel in the same format with an integer datatype.
inline void write_mask(const RoiMask& mask, const std::string& path) {
    mask.validate();
    auto hdr = detail::make_header(mask.grid, detail::DT_INT16, 16);
    std::vector<int16_t> data(mask.labels.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (mask.labels[i] > INT16_MAX) throw Error("write_mask: label exceeds int16 range");
        data[i] = static_cast<int16_t>(mask.labels[i]);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(int16_t)));
    if (!out) throw IoError("write failed on " + path);
}

inline RoiMask read_mask(const std::string& path) {
    ImageVolume vol = read_nifti(path);
    RoiMask mask;
    mask.grid = vol.grid;
    mask.labels.resize(vol.voxels.size());
    for (std::size_t i = 0; i < vol.voxels.size(); ++i) {
        double v = vol.voxels[i];
        double r = std::round(v);
        if (std::abs(v - r) > 1e-9 || r < 0.0)
            throw Error("read_mask: " + path + " holds non-label values");
        mask.labels[i] = static_cast<int32_t>(r);
    }
    mask.validate();
    return mask;
}

}  // namespace radrobust
