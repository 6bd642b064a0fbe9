// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/handeye.hpp"
#include "aggsort/sim/report.hpp"
#include "aggsort/sim/scene.hpp"
#include "aggsort/sim/sensing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aggsort::sim {

enum class Phase { LoadEnv, Search, Detect, Localize, Measure, PlanGrasp, Grasp, Place, Done };

std::string phase_name(Phase phase);

/// Everything derived once from the config: kinematic chain, rig, mount,
/// confusion, sweep poses.
struct SimContext {
    SimConfig config;
    kin::DhChain chain;
    cam::StereoRig rig;
    geom::RigidTransform camera_in_effector;  ///< camera pose in effector frame
    detect::ConfusionSpec confusion;          ///< 12-class, expanded
    std::vector<geom::Vec3> sweep_points;     ///< hover targets for Search
    kin::JointVector home{};
};

SimContext make_context(const SimConfig& config);

struct AttemptRecord {
    int aggregate_id = -1;
    dataset::Lithology true_lithology = dataset::Lithology::Limestone;
    int reported_class = -1;
    bool classified = false;  ///< reported lithology matches the true one
    bool grasp_ok = false;
    bool placed = false;
    geom::Vec3 localized_base = geom::Vec3::Zero();
    double measured_diagonal_cm = 0.0;
    sizing::Grade grade;
};

struct CurrentTarget {
    int aggregate_id = -1;
    detect::Detection detection;
    double depth_m = 0.0;
    geom::Vec3 base_position = geom::Vec3::Zero();
    double measured_diagonal_cm = 0.0;
    sizing::Grade grade;
    kin::JointVector grasp_config{};
};

struct PipelineState {
    Phase phase = Phase::LoadEnv;
    std::vector<int> remaining;
    std::vector<int> dropped;              ///< grasp failures and skips
    std::array<std::vector<int>, 4> bins;  ///< deposited ids per lithology bin
    std::optional<CurrentTarget> target;
    std::vector<AttemptRecord> attempts;
    std::vector<std::string> events;
    std::size_t sweep_cursor = 0;
    kin::JointVector arm{};
    int step_count = 0;

    int binned_count() const;
};

/// Executes exactly one phase transition of the sorting flow. Pure in
/// (state, scene, context): identical inputs produce identical outputs.
PipelineState step_pipeline(const PipelineState& state, const Scene& scene,
                            const SimContext& context);

/// (remaining + binned + dropped) must equal the scene's aggregate count once
/// LoadEnv has run.
bool conservation_holds(const PipelineState& state, const Scene& scene);

struct ExperimentResult {
    SortReport report;
    PipelineState final_state;
    Scene scene;
};

/// Drives step_pipeline to completion over a generated scene, or tallies a
/// replay file when the config names one. Verifies conservation at every
/// step. Throws std::runtime_error on a malformed replay file or a
/// conservation violation.
ExperimentResult run_experiment(const SimConfig& config);

/// Independent experiments, optionally executed on parallel workers; results
/// are merged by index and bit-identical for any worker count.
std::vector<ExperimentResult> run_experiments(const std::vector<SimConfig>& configs,
                                              int workers = 1);

}  // namespace aggsort::sim
