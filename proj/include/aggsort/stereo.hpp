// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/camera.hpp"
#include "aggsort/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace aggsort::stereo {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  ///< row-major, [0, 255]

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), pixels(std::size_t(w) * h, 0) {}

    std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { pixels[std::size_t(y) * width + x] = v; }
};

// Plain PGM, 8-bit. P5 (binary) written by default; P2 also read.
GrayImage read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const GrayImage& img, bool binary = true);

/// Per-pixel Census descriptors: bit k is 1 iff the k-th window neighbor
/// (raster order, center excluded) is strictly darker than the center.
struct CensusImage {
    int width = 0;
    int height = 0;
    int window_w = 5;
    int window_h = 5;
    std::vector<std::uint64_t> bits;
    std::vector<std::uint8_t> valid;  ///< 0 on the border where the window clips

    int descriptor_bits() const { return window_w * window_h - 1; }
    std::uint64_t at(int x, int y) const { return bits[std::size_t(y) * width + x]; }
    bool is_valid(int x, int y) const { return valid[std::size_t(y) * width + x] != 0; }
};

/// Window dimensions must be odd and fit in the image; descriptor width is
/// capped at 64 bits. Throws std::invalid_argument otherwise.
CensusImage census_transform(const GrayImage& img, int window_w = 5, int window_h = 5);

struct DisparityMap {
    static constexpr std::int16_t kInvalid = -1;
    int width = 0;
    int height = 0;
    std::vector<std::int16_t> values;

    std::int16_t at(int x, int y) const { return values[std::size_t(y) * width + x]; }
};

struct MatchOptions {
    int d_max = 64;
    double w_ad = 1.0;
    double w_census = 2.0;
    double w_grad = 1.0;
    double tau_ad = 32.0;
    double tau_grad = 16.0;
    int census_w = 5;
    int census_h = 5;
    double uniqueness_margin = 1.0;  ///< min best/second-best cost gap
    double uniqueness_ratio = 0.95;
    int lr_max_diff = 1;
    bool box_aggregate = false;  ///< optional fixed-window aggregation, off by default
    int box_radius = 2;
    int workers = 1;  ///< row-parallel; results identical for any count
};

/// Winner-take-all disparity with truncated-AD + Census Hamming + truncated
/// x-gradient cost and a left-right consistency check. Throws
/// std::invalid_argument on dimension mismatch or d_max >= width.
DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right,
                               const MatchOptions& options = {});

/// Z = fx * baseline / d. Throws std::domain_error for d <= 0.
double disparity_to_depth(double d_px, double fx_px, double baseline_m);

struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> meters;  ///< NaN marks invalid

    double at(int x, int y) const { return meters[std::size_t(y) * width + x]; }
};

struct DepthRange {
    double min_m = 0.25;
    double max_m = 2.5;
};

DepthMap disparity_map_to_depth(const DisparityMap& disparity, double fx_px, double baseline_m,
                                const DepthRange& range = {});

/// Unprojects a pixel at known depth into the camera frame.
/// Throws std::out_of_range when depth is outside `range`.
geom::Vec3 locate_3d(const cam::Pixel& pixel, double depth_m, const cam::Intrinsics& intr,
                     const cam::Distortion& dist, const DepthRange& range = {});

// Disparity maps serialize as P2 with 255 as the invalid sentinel; depth maps
// as plain text grids in meters ("nan" marks invalid).
void write_disparity_pgm(std::ostream& out, const DisparityMap& map);
DisparityMap read_disparity_pgm(std::istream& in);
void write_depth_text(std::ostream& out, const DepthMap& map);
DepthMap read_depth_text(std::istream& in);

}  // namespace aggsort::stereo
