// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace aggsort::cam {

using Pixel = Eigen::Vector2d;

struct Intrinsics {
    double fx = 1.0;  ///< px
    double fy = 1.0;  ///< px
    double cx = 0.0;  ///< px
    double cy = 0.0;  ///< px
    double skew = 0.0;
};

/// Radial (k1, k2) and tangential (p1, p2) distortion; no k3.
struct Distortion {
    double k1 = 0.0;
    double k2 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
};

/// Planar calibration target: inner-corner grid.
struct PlanarTarget {
    int rows = 9;
    int cols = 6;
    double square_size = 0.027;  ///< m
};

/// One view of the target: board-frame points (z = 0) and observed pixels.
struct BoardView {
    std::vector<geom::Vec3> board_points;
    std::vector<Pixel> pixels;
};

struct CalibrationResult {
    Intrinsics intrinsics;
    Distortion distortion;
    std::vector<geom::RigidTransform> extrinsics;  ///< board pose in camera frame, per view
    double rms_reprojection = 0.0;                 ///< px
};

/// Calibrated stereo pair: left/right pinhole models plus the right-camera
/// pose relative to the left (rotation + translation). Translation ingests
/// in millimeters and is stored in meters.
struct StereoRig {
    Intrinsics left;
    Intrinsics right;
    Distortion left_dist;
    Distortion right_dist;
    geom::Mat3 rotation = geom::Mat3::Identity();
    geom::Vec3 translation = geom::Vec3::Zero();  ///< m
    double baseline = 0.0;                        ///< m, norm of translation
    int image_width = 1280;
    int image_height = 800;
};

/// Projects a camera-frame point through the distortion model and intrinsics.
/// Throws std::domain_error when p_cam.z() <= 0.
Pixel project(const Intrinsics& intr, const Distortion& dist, const geom::Vec3& p_cam);

/// Inverts the distortion model by fixed-point iteration (20 iterations,
/// 1e-10 convergence in normalized coordinates); returns the normalized image
/// coordinate. Throws std::runtime_error on non-convergence.
Eigen::Vector2d undistort(const Intrinsics& intr, const Distortion& dist, const Pixel& pixel);

/// Exact projections of the target corners under each pose (board pose in
/// camera frame), plus optional seeded Gaussian pixel noise.
/// Corner (i, j) sits at (i * square_size, j * square_size, 0) in board frame.
/// Throws std::domain_error when a corner lands behind the camera.
std::vector<BoardView> synthesize_target_views(const PlanarTarget& target,
                                               const std::vector<geom::RigidTransform>& poses,
                                               const Intrinsics& intr, const Distortion& dist,
                                               double noise_sigma_px = 0.0,
                                               std::uint64_t seed = 0);

/// Deterministic set of diverse board poses for synthetic calibration runs.
std::vector<geom::RigidTransform> default_target_poses(int count);

/// Zhang-style planar calibration: homography-based intrinsics initialization
/// followed by joint Levenberg-damped refinement over intrinsics, distortion
/// and per-view extrinsics. Throws std::invalid_argument for fewer than 3
/// views or degenerate (all-parallel) homographies.
CalibrationResult calibrate_planar(const std::vector<BoardView>& views);

/// RMS over all points of the pixel residual norm. Throws
/// std::invalid_argument when the view count mismatches the extrinsics.
double reprojection_error(const CalibrationResult& result, const std::vector<BoardView>& views);

// Plain-text key-value serialization of calibration results.
void write_calibration(std::ostream& out, const CalibrationResult& result);
CalibrationResult read_calibration(std::istream& in);

/// Parses a stereo-rig key-value file (fixture format for the published
/// tables). `rigidity_tol` gates the rotation block; pass a relaxed value for
/// known-garbled fixtures. Throws std::invalid_argument on violation.
StereoRig read_stereo_rig(std::istream& in, double rigidity_tol = 1e-3);
void write_stereo_rig(std::ostream& out, const StereoRig& rig);

}  // namespace aggsort::cam
