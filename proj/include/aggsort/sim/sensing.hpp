// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/detection.hpp"
#include "aggsort/kinematics.hpp"
#include "aggsort/sim/scene.hpp"
#include "aggsort/stereo.hpp"

#include <cstdint>
#include <vector>

namespace aggsort::sim {

struct SensedDetection {
    detect::Detection detection;
    double depth_m = 0.0;  ///< at the box center
    int aggregate_id = -1;
};

struct SenseOptions {
    Fidelity fidelity = Fidelity::Analytic;
    double depth_noise_sigma = 0.0;  ///< analytic mode only
    double box_noise_px = 0.0;
};

/// Synthetic stereo rig used by the simulator (320x240, no distortion).
cam::StereoRig default_sim_rig();

/// Eye-in-hand sensing pass: camera pose = FK(arm) * camera_in_effector.
/// Analytic fidelity projects each aggregate's mid-height footprint and
/// returns ground-truth centroid depth (+ optional seeded noise); full-stereo
/// fidelity renders a textured pair of the top surfaces, runs the Census
/// matcher and reads depth off the disparity map.
std::vector<SensedDetection> sense(const Scene& scene, const kin::JointVector& arm,
                                   const geom::RigidTransform& camera_in_effector,
                                   const cam::StereoRig& rig, const kin::DhChain& chain,
                                   const detect::ConfusionSpec& confusion, std::uint64_t seed,
                                   const SenseOptions& options = {});

/// World-anchored procedural texture render of the scene's top surfaces from
/// `camera_pose` (left camera); `baseline_shift` renders the right view.
stereo::GrayImage render_scene_view(const Scene& scene, const geom::RigidTransform& camera_pose,
                                    const cam::Intrinsics& intr, int width, int height,
                                    double baseline_shift = 0.0, std::uint64_t texture_seed = 7);

/// True class index of an aggregate under the default class map
/// (lithology code + true grade).
int true_class_index(const AggregateSpec& aggregate, const sizing::GradeBands& bands = {});

/// Expands a 4x4 lithology confusion (report order) to the 12-class map:
/// lithology confusion, grade preserved.
detect::ConfusionSpec expand_lithology_confusion(const detect::ConfusionSpec& lithology4);

}  // namespace aggsort::sim
