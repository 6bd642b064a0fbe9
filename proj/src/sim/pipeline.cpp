// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aggsort::sim {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Named seed streams split off the master seed.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t tag) { return mix(master ^ tag); }
constexpr std::uint64_t kDetectTag = 0xDE7EC7ull;
constexpr std::uint64_t kGraspTag = 0x62A59ull;

geom::RigidTransform downward_effector_pose(const geom::Vec3& position, double delta) {
    const geom::Mat3 flip = geom::Vec3(1.0, -1.0, -1.0).asDiagonal();
    return {Eigen::AngleAxisd(delta, geom::Vec3::UnitZ()).toRotationMatrix() * flip, position};
}

// Effector pose that puts the camera at `camera_position` looking straight
// down with in-plane angle `delta`.
geom::RigidTransform effector_pose_for_camera(const geom::Vec3& camera_position, double delta,
                                              const geom::RigidTransform& camera_in_effector) {
    const geom::RigidTransform camera_pose = downward_effector_pose(camera_position, delta);
    return camera_pose * camera_in_effector.inverse();
}

std::optional<kin::JointVector> solve_pose(const SimContext& ctx,
                                           const geom::RigidTransform& target,
                                           const kin::JointVector& reference) {
    kin::IkOptions options;
    options.reference = reference;
    const auto set = kin::inverse_kinematics(ctx.chain, target, options);
    if (set.empty()) return std::nullopt;
    return kin::select_solution(set, reference);
}

Scene visible_subset(const Scene& scene, const std::vector<int>& remaining) {
    Scene filtered = scene;
    filtered.aggregates.clear();
    for (const auto& agg : scene.aggregates) {
        if (std::find(remaining.begin(), remaining.end(), agg.id) != remaining.end()) {
            filtered.aggregates.push_back(agg);
        }
    }
    return filtered;
}

void remove_id(std::vector<int>& ids, int id) {
    ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
}

AttemptRecord* record_for(PipelineState& state, int aggregate_id) {
    for (auto it = state.attempts.rbegin(); it != state.attempts.rend(); ++it) {
        if (it->aggregate_id == aggregate_id) return &*it;
    }
    return nullptr;
}

}  // namespace

std::string phase_name(Phase phase) {
    switch (phase) {
        case Phase::LoadEnv: return "LoadEnv";
        case Phase::Search: return "Search";
        case Phase::Detect: return "Detect";
        case Phase::Localize: return "Localize";
        case Phase::Measure: return "Measure";
        case Phase::PlanGrasp: return "PlanGrasp";
        case Phase::Grasp: return "Grasp";
        case Phase::Place: return "Place";
        case Phase::Done: return "Done";
    }
    return "?";
}

SimContext make_context(const SimConfig& config) {
    SimContext ctx;
    ctx.config = config;

    if (!config.dh_file.empty()) {
        std::ifstream in(config.dh_file);
        if (!in.good()) throw std::runtime_error("cannot open DH file " + config.dh_file);
        ctx.chain = kin::DhChain::from_stream(in);
    } else {
        const auto profile = kin::DhChain::builtin_profile(config.dh_profile);
        if (!profile) throw std::invalid_argument("unknown DH profile " + config.dh_profile);
        ctx.chain = *profile;
    }

    ctx.rig = default_sim_rig();
    ctx.camera_in_effector = geom::RigidTransform::translate(0.0, 0.0, -0.04);

    if (config.confusion_path.empty()) {
        ctx.confusion = detect::ConfusionSpec::identity(dataset::ClassMap::default_map().size());
    } else {
        std::ifstream in(config.confusion_path);
        if (!in.good()) {
            throw std::runtime_error("cannot open confusion file " + config.confusion_path);
        }
        ctx.confusion = expand_lithology_confusion(detect::ConfusionSpec::from_stream(in));
    }

    const WorkspaceParams& ws = config.workspace;
    const std::array<double, 3> radii = {
        ws.annulus_min + 0.1 * (ws.annulus_max - ws.annulus_min),
        ws.annulus_min + 0.5 * (ws.annulus_max - ws.annulus_min),
        ws.annulus_min + 0.9 * (ws.annulus_max - ws.annulus_min)};
    for (const double r : radii) {
        for (int k = 0; k < 8; ++k) {
            const double angle = 2.0 * kPi * k / 8.0;
            ctx.sweep_points.emplace_back(r * std::cos(angle), r * std::sin(angle),
                                          ws.camera_height);
        }
    }
    ctx.home = kin::JointVector{0.0, -0.6, 1.2, -0.6, 0.0};
    return ctx;
}

int PipelineState::binned_count() const {
    int total = 0;
    for (const auto& bin : bins) total += static_cast<int>(bin.size());
    return total;
}

bool conservation_holds(const PipelineState& state, const Scene& scene) {
    if (state.phase == Phase::LoadEnv) return true;
    const int total = static_cast<int>(scene.aggregates.size());
    return static_cast<int>(state.remaining.size()) + state.binned_count() +
               static_cast<int>(state.dropped.size()) ==
           total;
}

PipelineState step_pipeline(const PipelineState& state, const Scene& scene,
                            const SimContext& ctx) {
    PipelineState next = state;
    next.step_count += 1;
    const WorkspaceParams& ws = ctx.config.workspace;

    SenseOptions sense_options;
    sense_options.fidelity = ctx.config.fidelity;
    sense_options.depth_noise_sigma = ctx.config.depth_noise_sigma;
    sense_options.box_noise_px = ctx.config.box_noise_px;
    const std::uint64_t detect_seed = stream_seed(ctx.config.master_seed, kDetectTag);

    switch (state.phase) {
        case Phase::LoadEnv: {
            next.remaining.clear();
            for (const auto& agg : scene.aggregates) next.remaining.push_back(agg.id);
            next.arm = ctx.home;
            next.events.push_back("environment loaded: " +
                                  std::to_string(next.remaining.size()) + " aggregates");
            next.phase = Phase::Search;
            break;
        }

        case Phase::Search: {
            if (next.remaining.empty()) {
                next.events.push_back("no aggregates remain; done");
                next.phase = Phase::Done;
                break;
            }
            if (next.sweep_cursor >= ctx.sweep_points.size()) {
                next.events.push_back("sweep exhausted with " +
                                      std::to_string(next.remaining.size()) +
                                      " aggregates unseen; done");
                next.phase = Phase::Done;
                break;
            }
            const geom::Vec3 point = ctx.sweep_points[next.sweep_cursor];
            // Zero in-plane yaw keeps the camera axes aligned with the world
            // axes, so the axis-aligned detection box measures the footprint
            // without rotation inflation.
            const auto hover =
                solve_pose(ctx, effector_pose_for_camera(point, 0.0, ctx.camera_in_effector),
                           next.arm);
            if (!hover) {
                next.sweep_cursor += 1;
                next.events.push_back("sweep point unreachable; continuing search");
                break;  // Search self-loop
            }
            next.arm = *hover;
            const Scene visible = visible_subset(scene, next.remaining);
            const auto sensed = sense(visible, next.arm, ctx.camera_in_effector, ctx.rig,
                                      ctx.chain, ctx.confusion, detect_seed, sense_options);
            if (sensed.empty()) {
                next.sweep_cursor += 1;
                next.events.push_back("nothing in view; continuing search");
                break;  // Search self-loop
            }

            // Target: detection nearest the image center, ties to lower id.
            const Eigen::Vector2d center(ctx.rig.image_width / 2.0, ctx.rig.image_height / 2.0);
            const SensedDetection* best = nullptr;
            double best_dist = std::numeric_limits<double>::infinity();
            for (const auto& sd : sensed) {
                const double dist = (sd.detection.center() - center).norm();
                if (dist < best_dist ||
                    (dist == best_dist && best && sd.aggregate_id < best->aggregate_id)) {
                    best = &sd;
                    best_dist = dist;
                }
            }

            // Coarse position, then center the camera above the target.
            const geom::Vec3 p_cam = stereo::locate_3d(best->detection.center(), best->depth_m,
                                                       ctx.rig.left, ctx.rig.left_dist);
            const geom::RigidTransform fk = kin::forward_kinematics(ctx.chain, next.arm);
            const auto located = handeye::camera_to_base(
                ctx.camera_in_effector.inverse(), fk.inverse(), handeye::CameraPoint{p_cam});
            const geom::Vec3 coarse = located.base.p;
            const geom::Vec3 hover_point(coarse.x(), coarse.y(), ws.camera_height);
            const auto centered = solve_pose(
                ctx, effector_pose_for_camera(hover_point, 0.0, ctx.camera_in_effector),
                next.arm);
            if (!centered) {
                remove_id(next.remaining, best->aggregate_id);
                next.dropped.push_back(best->aggregate_id);
                next.events.push_back("aggregate " + std::to_string(best->aggregate_id) +
                                      " unreachable for centering; skipped");
                next.sweep_cursor = 0;
                break;
            }
            next.arm = *centered;
            CurrentTarget target;
            target.aggregate_id = best->aggregate_id;
            next.target = target;
            next.sweep_cursor = 0;
            next.events.push_back("target acquired: aggregate " +
                                  std::to_string(best->aggregate_id));
            next.phase = Phase::Detect;
            break;
        }

        case Phase::Detect: {
            const Scene visible = visible_subset(scene, next.remaining);
            const auto sensed = sense(visible, next.arm, ctx.camera_in_effector, ctx.rig,
                                      ctx.chain, ctx.confusion, detect_seed, sense_options);
            const SensedDetection* found = nullptr;
            for (const auto& sd : sensed) {
                if (sd.aggregate_id == next.target->aggregate_id) {
                    found = &sd;
                    break;
                }
            }
            if (!found) {
                const int id = next.target->aggregate_id;
                remove_id(next.remaining, id);
                next.dropped.push_back(id);
                next.target.reset();
                next.events.push_back("target lost at detect; aggregate " + std::to_string(id) +
                                      " skipped");
                next.phase = Phase::Search;
                break;
            }
            next.target->detection = found->detection;
            next.target->depth_m = found->depth_m;

            AttemptRecord record;
            record.aggregate_id = found->aggregate_id;
            record.true_lithology = scene.by_id(found->aggregate_id).lithology;
            record.reported_class = found->detection.class_index;
            const auto [reported_lith, reported_grade] = dataset::ClassMap::parse_class_name(
                dataset::ClassMap::default_map().name(found->detection.class_index));
            record.classified = reported_lith == record.true_lithology;
            next.attempts.push_back(record);
            next.events.push_back("detected aggregate " + std::to_string(found->aggregate_id) +
                                  " as class " + std::to_string(found->detection.class_index) +
                                  " (confidence " + std::to_string(found->detection.confidence) +
                                  ")");
            next.phase = Phase::Localize;
            break;
        }

        case Phase::Localize: {
            const geom::Vec3 p_cam =
                stereo::locate_3d(next.target->detection.center(), next.target->depth_m,
                                  ctx.rig.left, ctx.rig.left_dist);
            const geom::RigidTransform fk = kin::forward_kinematics(ctx.chain, next.arm);
            const auto located = handeye::camera_to_base(
                ctx.camera_in_effector.inverse(), fk.inverse(), handeye::CameraPoint{p_cam});
            next.target->base_position = located.base.p;
            if (auto* record = record_for(next, next.target->aggregate_id)) {
                record->localized_base = located.base.p;
            }
            next.events.push_back("localized target in base frame");
            next.phase = Phase::Measure;
            break;
        }

        case Phase::Measure: {
            const auto& det = next.target->detection;
            const auto mer = sizing::mer_dimensions({det.x1, det.y1}, {det.x2, det.y2});
            const double diag_m =
                sizing::pixel_to_metric(mer.c, next.target->depth_m, ctx.rig.left.fx);
            next.target->measured_diagonal_cm = diag_m * 100.0;
            next.target->grade = sizing::grade(next.target->measured_diagonal_cm,
                                               ctx.config.bands);
            if (auto* record = record_for(next, next.target->aggregate_id)) {
                record->measured_diagonal_cm = next.target->measured_diagonal_cm;
                record->grade = next.target->grade;
            }
            next.events.push_back("measured diagonal " +
                                  std::to_string(next.target->measured_diagonal_cm) + " cm");
            next.phase = Phase::PlanGrasp;
            break;
        }

        case Phase::PlanGrasp: {
            const geom::Vec3& p = next.target->base_position;
            const geom::Vec3 grasp_position(p.x(), p.y(), p.z() + ws.grasp_clearance);
            const double delta = std::atan2(p.y(), p.x());
            const auto solution =
                solve_pose(ctx, downward_effector_pose(grasp_position, delta), next.arm);
            if (!solution) {
                const int id = next.target->aggregate_id;
                remove_id(next.remaining, id);
                next.dropped.push_back(id);
                next.target.reset();
                next.sweep_cursor = 0;
                next.events.push_back("IK failure; aggregate " + std::to_string(id) +
                                      " skipped");
                next.phase = Phase::Search;
                break;
            }
            next.target->grasp_config = *solution;
            next.events.push_back("grasp planned");
            next.phase = Phase::Grasp;
            break;
        }

        case Phase::Grasp: {
            const int id = next.target->aggregate_id;
            const double true_size_cm = scene.by_id(id).footprint_diagonal_cm();
            const double p_success = ctx.config.grasp.success_probability(true_size_cm);

            bool success = true;
            if (p_success < 1.0) {
                const std::uint64_t grasp_seed = stream_seed(ctx.config.master_seed, kGraspTag);
                std::mt19937_64 rng(mix(grasp_seed ^ std::uint64_t(next.attempts.size())));
                std::uniform_real_distribution<double> uni(0.0, 1.0);
                success = uni(rng) < p_success;
            }

            next.arm = next.target->grasp_config;
            if (auto* record = record_for(next, id)) record->grasp_ok = success;
            if (!success) {
                remove_id(next.remaining, id);
                next.dropped.push_back(id);
                next.target.reset();
                next.sweep_cursor = 0;
                next.events.push_back("grasp failed on aggregate " + std::to_string(id));
                next.phase = Phase::Search;
                break;
            }
            next.events.push_back("grasped aggregate " + std::to_string(id));
            next.phase = Phase::Place;
            break;
        }

        case Phase::Place: {
            const int id = next.target->aggregate_id;
            const auto [reported_lith, reported_grade] = dataset::ClassMap::parse_class_name(
                dataset::ClassMap::default_map().name(next.target->detection.class_index));
            const int bin = report_index(reported_lith);

            const geom::Vec3& bin_pos = scene.bins[bin];
            const geom::Vec3 drop_position(bin_pos.x(), bin_pos.y(), ws.bin_drop_z);
            const auto solution = solve_pose(
                ctx,
                downward_effector_pose(drop_position,
                                       std::atan2(bin_pos.y(), bin_pos.x())),
                next.arm);
            if (solution) next.arm = *solution;

            next.bins[bin].push_back(id);
            remove_id(next.remaining, id);
            if (auto* record = record_for(next, id)) record->placed = true;
            next.target.reset();
            next.sweep_cursor = 0;
            next.events.push_back("placed aggregate " + std::to_string(id) + " in bin " +
                                  dataset::lithology_code(kReportOrder[bin]));
            next.phase = Phase::Search;
            break;
        }

        case Phase::Done:
            break;
    }
    return next;
}

namespace {

SortReport report_from_attempts(const std::vector<AttemptRecord>& attempts) {
    SortReport report;
    for (const auto& attempt : attempts) {
        LithologyTally& row = report.rows[report_index(attempt.true_lithology)];
        row.attempted += 1;
        row.grasped += attempt.grasp_ok ? 1 : 0;
        row.correct += (attempt.placed && attempt.classified) ? 1 : 0;
    }
    return report;
}

}  // namespace

ExperimentResult run_experiment(const SimConfig& config) {
    ExperimentResult result;
    if (!config.replay_path.empty()) {
        std::ifstream in(config.replay_path);
        if (!in.good()) {
            throw std::runtime_error("cannot open replay file " + config.replay_path);
        }
        result.report = tally_replay(parse_replay(in));
        result.final_state.phase = Phase::Done;
        return result;
    }

    const SimContext ctx = make_context(config);
    result.scene = generate_scene(config);

    PipelineState state;
    const int step_cap = 400 + 80 * static_cast<int>(result.scene.aggregates.size());
    while (state.phase != Phase::Done) {
        state = step_pipeline(state, result.scene, ctx);
        if (!conservation_holds(state, result.scene)) {
            throw std::runtime_error("conservation invariant violated at step " +
                                     std::to_string(state.step_count));
        }
        if (state.step_count > step_cap) {
            throw std::runtime_error("pipeline failed to terminate");
        }
    }
    result.final_state = std::move(state);
    result.report = report_from_attempts(result.final_state.attempts);
    return result;
}

std::vector<ExperimentResult> run_experiments(const std::vector<SimConfig>& configs,
                                              int workers) {
    std::vector<ExperimentResult> results(configs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            results[i] = run_experiment(configs[i]);
        }
        return results;
    }
    std::vector<std::future<void>> futures;
    const int lanes = std::min<int>(workers, static_cast<int>(configs.size()));
    for (int lane = 0; lane < lanes; ++lane) {
        futures.push_back(std::async(std::launch::async, [&, lane]() {
            for (std::size_t i = lane; i < configs.size(); i += lanes) {
                results[i] = run_experiment(configs[i]);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return results;
}

}  // namespace aggsort::sim
