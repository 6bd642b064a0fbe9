// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/geometry.hpp"

#include <vector>

namespace aggsort::handeye {

enum class Frame { Camera, Effector, Base };

/// Point tagged with its coordinate frame; cross-frame mixing fails to
/// compile.
template <Frame F>
struct FramedPoint {
    geom::Vec3 p;
};

using CameraPoint = FramedPoint<Frame::Camera>;
using EffectorPoint = FramedPoint<Frame::Effector>;
using BasePoint = FramedPoint<Frame::Base>;

struct CameraToBaseResult {
    EffectorPoint effector;  ///< intermediate effector-frame point
    BasePoint base;
};

/// Applies the camera -> effector -> base chain:
///   p_E = T_CE^-1 * p_c,   p_B = T_EB^-1 * p_E.
/// Note the inverse composition: T_CE here is the effector pose expressed in
/// the camera frame and T_EB the base pose expressed in the effector frame.
/// A caller holding X = camera-in-effector and FK = effector-in-base passes
/// their inverses.
CameraToBaseResult camera_to_base(const geom::RigidTransform& t_ce,
                                  const geom::RigidTransform& t_eb, const CameraPoint& p_c);

/// Relative-motion pair: A from two effector poses, B from the matching two
/// camera observations. `informative` is false for near-identity motions.
struct MotionPair {
    geom::RigidTransform a;
    geom::RigidTransform b;
    bool informative = true;
};

/// Consecutive differencing: A_i = T_EB(i+1)^-1 * T_EB(i), B_i analogously.
/// `effector_poses` are effector-in-base (forward kinematics); `camera_poses`
/// are camera-in-target, so that A_i X = X B_i holds for the eye-in-hand
/// X = camera-in-effector. Throws on length mismatch or fewer than 3 poses.
std::vector<MotionPair> collect_motion_pairs(
    const std::vector<geom::RigidTransform>& effector_poses,
    const std::vector<geom::RigidTransform>& camera_poses);

struct HandEyeSolution {
    geom::RigidTransform t_ce;  ///< camera pose w.r.t. the effector
    double max_rotation_residual = 0.0;     ///< rad, over A X vs X B
    double max_translation_residual = 0.0;  ///< m
    double rms_rotation_residual = 0.0;
    double rms_translation_residual = 0.0;
};

/// Tsai-Lenz style AX = XB solve: the rotation from the axis constraints by
/// linear least squares, then the translation from
/// (R_A - I) t_X = R_X t_B - t_A stacked over pairs.
/// Throws std::invalid_argument when fewer than 2 informative pairs remain
/// and std::runtime_error on a degenerate (parallel-axes) configuration,
/// reporting the rank deficiency.
HandEyeSolution solve_hand_eye(const std::vector<MotionPair>& pairs);

}  // namespace aggsort::handeye
