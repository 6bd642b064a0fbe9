// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/sizing.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace aggsort::sim {

enum class Fidelity { Analytic, FullStereo };

/// Step model of grasp success over particle size (diagonal, cm).
struct GraspModel {
    double threshold_cm = 1.5;
    double p_below = 0.8;
    double p_above = 1.0;

    double success_probability(double size_cm) const {
        return size_cm >= threshold_cm ? p_above : p_below;
    }
    static GraspModel always_succeed() { return {0.0, 1.0, 1.0}; }
};

/// Desk-scale workspace layout. Everything stays inside the arm's 0.2588 m
/// reach and the sensor's [0.25, 2.5] m working range.
struct WorkspaceParams {
    double plane_z = -0.16;        ///< work plane height, base frame (m)
    double annulus_min = 0.09;     ///< aggregate placement radii (m)
    double annulus_max = 0.175;
    double camera_height = 0.135;  ///< camera z while hovering (m); keeps even
                                   ///< the tallest aggregate top >= 0.25 m away
    double grasp_clearance = 0.02; ///< effector above the localized centroid (m)
    double bin_radius = 0.20;
    double bin_drop_z = -0.11;
};

struct SimConfig {
    std::uint64_t master_seed = 1;
    /// Counts in report order: limestone, granite, sandstone, marble.
    std::array<int, 4> counts = {10, 10, 10, 10};
    double size_min_cm = 1.0;
    double size_max_cm = 4.0;
    Fidelity fidelity = Fidelity::Analytic;
    GraspModel grasp;
    sizing::GradeBands bands;
    WorkspaceParams workspace;
    std::string dh_profile = "jetarm";
    std::string dh_file;         ///< overrides dh_profile when set
    std::string confusion_path;  ///< 4x4 lithology matrix; empty = identity
    std::string replay_path;     ///< when set, run_experiment replays instead
    double depth_noise_sigma = 0.0;
    double box_noise_px = 0.0;
};

/// Plain-text key-value config; '#' comments. Unknown keys are rejected.
SimConfig parse_config(std::istream& in);
void write_config(std::ostream& out, const SimConfig& config);

}  // namespace aggsort::sim
