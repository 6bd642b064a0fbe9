// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, each with its pinned
// tolerance and runtime budget. Exits nonzero when any criterion fails.

#include "aggsort/camera.hpp"
#include "aggsort/handeye.hpp"
#include "aggsort/kinematics.hpp"
#include "aggsort/sim/pipeline.hpp"
#include "aggsort/sizing.hpp"
#include "aggsort/stereo.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace aggsort;
using Clock = std::chrono::steady_clock;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void run_criterion(int number, const std::string& label, double budget_ms,
                   const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const bool in_budget = elapsed_ms <= budget_ms;
    const bool pass = outcome.pass && in_budget;
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %2d: %s (%s; %.2f ms of %.0f ms budget)\n",
                pass ? "PASS" : "FAIL", number, label.c_str(), outcome.detail.c_str(),
                elapsed_ms, budget_ms);
}

kin::JointVector random_reachable_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> full(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> half(-std::numbers::pi / 2.0,
                                                std::numbers::pi / 2.0);
    kin::JointVector q{};
    q[0] = full(rng);
    q[1] = half(rng);
    q[2] = half(rng);
    q[3] = -(q[1] + q[2]);
    q[4] = full(rng);
    return q;
}

std::string expected_table3_render() {
    // The published per-lithology outcomes, frozen byte for byte.
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %9s %8s %14s %8s %10s\n", "category", "attempted",
                  "grasped", "success_rate_%", "correct", "accuracy_%");
    out << line;
    const struct {
        const char* label;
        int attempted, grasped;
        const char* rate;
        int correct;
        const char* accuracy;
    } rows[] = {
        {"limestone (SH)", 10, 10, "100", 10, "100"},
        {"granite (H)", 10, 10, "100", 9, "90"},
        {"sandstone (S)", 10, 9, "90", 10, "100"},
        {"marble (D)", 10, 10, "100", 10, "100"},
    };
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-16s %9d %8d %14s %8d %10s\n", row.label,
                      row.attempted, row.grasped, row.rate, row.correct, row.accuracy);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-16s %9d %8d %14s %8d %10s\n", "overall", 40, 39,
                  "97.5", 39, "97.5");
    out << line;
    return out.str();
}

sim::SimConfig end_to_end_config() {
    sim::SimConfig config;
    config.master_seed = 7;
    config.counts = {10, 10, 10, 10};
    config.grasp = sim::GraspModel::always_succeed();
    config.fidelity = sim::Fidelity::Analytic;
    return config;
}

sim::SimConfig replay_config() {
    sim::SimConfig config;
    config.replay_path = AGGSORT_DATA_DIR "/table3_replay.txt";
    return config;
}

}  // namespace

int main() {
    const kin::DhChain jetarm = kin::DhChain::jetarm();

    run_criterion(1, "FK desk check: |p| = 0.2588 m at [90,0,0,0,0] deg (tol 1e-4)", 1.0, [&] {
        const kin::JointVector q{90.0 * kDeg, 0, 0, 0, 0};
        const auto pose = kin::forward_kinematics(jetarm, q);
        const double norm = pose.translation().norm();
        Outcome out;
        out.pass = std::abs(norm - 0.2588) < 1e-4;
        out.detail = "|p| = " + std::to_string(norm);
        return out;
    });

    run_criterion(2, "FK dual-path: chain vs closed form, 1000 configs (tol 1e-10)", 1000.0,
                  [&] {
                      std::mt19937_64 rng(2024);
                      std::uniform_real_distribution<double> full(-std::numbers::pi,
                                                                  std::numbers::pi);
                      double worst = 0.0;
                      for (int i = 0; i < 1000; ++i) {
                          kin::JointVector q{};
                          for (auto& angle : q) angle = full(rng);
                          const auto fk = kin::forward_kinematics(jetarm, q);
                          const auto closed = kin::closed_form_position(jetarm, q);
                          worst = std::max(worst, (fk.translation() - closed).norm());
                      }
                      Outcome out;
                      out.pass = worst < 1e-10;
                      out.detail = "max |p_chain - p_closed| = " + std::to_string(worst);
                      return out;
                  });

    run_criterion(
        3, "IK round-trip over 1000 reachable targets (1e-9 m / 1e-9 rad, theta4 identity)",
        5000.0, [&] {
            std::mt19937_64 rng(777);
            double worst_pos = 0.0, worst_rot = 0.0, worst_identity = 0.0;
            int targets = 0;
            for (int i = 0; i < 1000; ++i) {
                const kin::JointVector q = random_reachable_config(rng);
                if (!jetarm.within_limits(q)) continue;
                const auto target = kin::forward_kinematics(jetarm, q);
                const auto set = kin::inverse_kinematics(jetarm, target);
                if (set.empty()) {
                    return Outcome{false, "empty solution set for a reachable target"};
                }
                double best_pos = 1e9;
                for (const auto& sol : set.solutions) {
                    const auto fk = kin::forward_kinematics(jetarm, sol.q);
                    const double pos = (fk.translation() - target.translation()).norm();
                    const double rot =
                        geom::rotation_distance(fk.rotation(), target.rotation());
                    best_pos = std::min(best_pos, std::max(pos, rot));
                    worst_pos = std::max(worst_pos, pos);
                    worst_rot = std::max(worst_rot, rot);
                    worst_identity = std::max(
                        worst_identity, std::abs(sol.q[3] + (sol.q[1] + sol.q[2])));
                }
                if (best_pos > 1e-9) {
                    return Outcome{false, "no solution reproduced the target"};
                }
                ++targets;
            }
            Outcome out;
            out.pass = worst_pos < 1e-9 && worst_rot < 1e-9 && worst_identity < 1e-10 &&
                       targets == 1000;
            std::ostringstream detail;
            detail << "max pos " << worst_pos << " m, max rot " << worst_rot
                   << " rad, max |theta4 + theta2 + theta3| = " << worst_identity;
            out.detail = detail.str();
            return out;
        });

    run_criterion(4, "IK paper case: corrected pose yields [90,0,0,0,0] deg (tol 1e-6 rad)",
                  1000.0, [&] {
                      const kin::JointVector expected{90.0 * kDeg, 0, 0, 0, 0};
                      const auto target = kin::forward_kinematics(jetarm, expected);
                      const auto set = kin::inverse_kinematics(jetarm, target);
                      for (const auto& sol : set.solutions) {
                          double worst = 0.0;
                          for (int j = 0; j < 5; ++j) {
                              worst = std::max(
                                  worst,
                                  std::abs(kin::wrap_angle(sol.q[j] - expected[j])));
                          }
                          if (worst < 1e-6) {
                              return Outcome{true, std::to_string(set.solutions.size()) +
                                                       " solutions; joint error " +
                                                       std::to_string(worst) + " rad"};
                          }
                      }
                      return Outcome{false, "expected joint vector not in the solution set"};
                  });

    run_criterion(5, "hand-eye recovery (1e-8 rad / 1e-8 m) and degeneracy detection", 1000.0,
                  [&] {
                      std::mt19937_64 rng(99);
                      std::normal_distribution<double> gauss(0.0, 1.0);
                      std::uniform_real_distribution<double> uni(-0.2, 0.2);
                      const geom::RigidTransform x_true(
                          Eigen::AngleAxisd(0.5, geom::Vec3(0.3, 0.8, -0.4).normalized())
                              .toRotationMatrix(),
                          geom::Vec3(0.04, -0.02, 0.09));
                      std::vector<geom::RigidTransform> effector, camera;
                      for (int i = 0; i < 11; ++i) {  // 10 motion pairs
                          Eigen::Quaterniond quat(gauss(rng), gauss(rng), gauss(rng),
                                                  gauss(rng));
                          quat.normalize();
                          const geom::RigidTransform g(
                              quat.toRotationMatrix(),
                              geom::Vec3(uni(rng), uni(rng), uni(rng)));
                          effector.push_back(g);
                          camera.push_back(g * x_true);
                      }
                      const auto solution = handeye::solve_hand_eye(
                          handeye::collect_motion_pairs(effector, camera));
                      const double rot_err = geom::rotation_distance(
                          solution.t_ce.rotation(), x_true.rotation());
                      const double trans_err =
                          (solution.t_ce.translation() - x_true.translation()).norm();

                      bool degenerate_caught = false;
                      try {
                          std::vector<handeye::MotionPair> parallel;
                          for (int i = 1; i <= 3; ++i) {
                              const geom::RigidTransform a(
                                  Eigen::AngleAxisd(0.2 * i, geom::Vec3::UnitZ())
                                      .toRotationMatrix(),
                                  geom::Vec3(0.01 * i, 0.0, -0.01));
                              parallel.push_back(handeye::MotionPair{
                                  a, x_true.inverse() * a * x_true});
                          }
                          handeye::solve_hand_eye(parallel);
                      } catch (const std::runtime_error&) {
                          degenerate_caught = true;
                      }

                      Outcome out;
                      out.pass = rot_err < 1e-8 && trans_err < 1e-8 && degenerate_caught;
                      std::ostringstream detail;
                      detail << "rot err " << rot_err << " rad, trans err " << trans_err
                             << " m, parallel-axis degeneracy "
                             << (degenerate_caught ? "detected" : "MISSED");
                      out.detail = detail.str();
                      return out;
                  });

    run_criterion(
        6, "calibration: noiseless recovery (1e-6 rel, rms < 1e-6 px); 0.5 px noise <= 1.5 px",
        30000.0, [&] {
            const cam::Intrinsics truth{1000.0, 1010.0, 640.0, 400.0, 0.0};
            const cam::Distortion truth_dist{-0.0000716, 0.00000003, 0.0016, -0.000247};
            const auto poses = cam::default_target_poses(20);
            const auto clean_views = cam::synthesize_target_views(
                cam::PlanarTarget{}, poses, truth, truth_dist, 0.0, 0);
            const auto clean = cam::calibrate_planar(clean_views);

            const double rel_err = std::max(
                {std::abs(clean.intrinsics.fx - truth.fx) / truth.fx,
                 std::abs(clean.intrinsics.fy - truth.fy) / truth.fy,
                 std::abs(clean.intrinsics.cx - truth.cx) / truth.cx,
                 std::abs(clean.intrinsics.cy - truth.cy) / truth.cy});

            const auto noisy_views = cam::synthesize_target_views(
                cam::PlanarTarget{}, poses, truth, truth_dist, 0.5, 424242);
            const auto noisy = cam::calibrate_planar(noisy_views);

            Outcome out;
            out.pass = rel_err < 1e-6 && clean.rms_reprojection < 1e-6 &&
                       noisy.rms_reprojection <= 1.5;
            std::ostringstream detail;
            detail << "rel err " << rel_err << ", clean rms " << clean.rms_reprojection
                   << " px, noisy rms " << noisy.rms_reprojection << " px";
            out.detail = detail.str();
            return out;
        });

    run_criterion(
        7, "stereo shift oracle (s in {3,7,15}, >= 95%) and census remap invariance", 5000.0,
        [&] {
            stereo::MatchOptions options;
            options.d_max = 32;
            double worst_fraction = 1.0;
            for (const int shift : {3, 7, 15}) {
                std::mt19937_64 rng(1000 + shift);
                std::uniform_int_distribution<int> value(0, 255);
                stereo::GrayImage wide(320 + shift, 240);
                for (auto& px : wide.pixels) px = std::uint8_t(value(rng));
                stereo::GrayImage left(320, 240), right(320, 240);
                for (int y = 0; y < 240; ++y) {
                    for (int x = 0; x < 320; ++x) {
                        left.set(x, y, wide.at(x, y));
                        right.set(x, y, wide.at(x + shift, y));
                    }
                }
                const auto map = stereo::compute_disparity(left, right, options);
                int valid = 0, correct = 0;
                const int border = options.census_w / 2 + 1;
                for (int y = border; y < 240 - border; ++y) {
                    for (int x = options.d_max + border; x < 320 - border; ++x) {
                        const auto d = map.at(x, y);
                        if (d == stereo::DisparityMap::kInvalid) continue;
                        ++valid;
                        if (d == shift) ++correct;
                    }
                }
                if (valid == 0) return Outcome{false, "no valid interior pixels"};
                worst_fraction = std::min(worst_fraction, double(correct) / valid);
            }

            // The v^2/255 remap is strictly increasing on [128, 255] only
            // (8-bit floor collapses lower values), so draw intensities there.
            std::mt19937_64 rng(55);
            std::uniform_int_distribution<int> value(128, 255);
            stereo::GrayImage img(160, 120);
            for (auto& px : img.pixels) px = std::uint8_t(value(rng));
            stereo::GrayImage remapped = img;
            for (auto& px : remapped.pixels) {
                px = std::uint8_t((unsigned(px) * unsigned(px)) / 255);
            }
            const auto census_a = stereo::census_transform(img);
            const auto census_b = stereo::census_transform(remapped);
            int mismatches = 0;
            for (std::size_t i = 0; i < census_a.bits.size(); ++i) {
                if (census_a.valid[i] && census_a.bits[i] != census_b.bits[i]) ++mismatches;
            }

            Outcome out;
            out.pass = worst_fraction >= 0.95 && mismatches == 0;
            std::ostringstream detail;
            detail << "worst shift-recovery fraction " << worst_fraction << ", census mismatches "
                   << mismatches;
            out.detail = detail.str();
            return out;
        });

    run_criterion(8, "sizing: 3-4-5 box, half-open grade bands, pixel_to_metric", 1000.0, [&] {
        const auto dims = sizing::mer_dimensions({0, 0}, {3, 4});
        const bool mer_ok = dims.a == 4.0 && dims.b == 3.0 && dims.c == 5.0;
        const bool bands_ok = sizing::grade(0.99).rejected() &&
                              sizing::grade(1.0).value == sizing::GradeValue::G1 &&
                              sizing::grade(1.999).value == sizing::GradeValue::G1 &&
                              sizing::grade(2.0).value == sizing::GradeValue::G2 &&
                              sizing::grade(2.999).value == sizing::GradeValue::G2 &&
                              sizing::grade(3.0).value == sizing::GradeValue::G3 &&
                              sizing::grade(50.0).value == sizing::GradeValue::G3;
        const bool metric_ok = sizing::pixel_to_metric(100.0, 1.0, 1000.0) == 0.1;
        Outcome out;
        out.pass = mer_ok && bands_ok && metric_ok;
        out.detail = std::string("mer ") + (mer_ok ? "ok" : "BAD") + ", bands " +
                     (bands_ok ? "ok" : "BAD") + ", metric " + (metric_ok ? "ok" : "BAD");
        return out;
    });

    run_criterion(9, "Table-3 replay reproduces the published rates bit-exactly", 1000.0, [&] {
        const auto result = sim::run_experiment(replay_config());
        const std::string rendered =
            sim::render_report(result.report, sim::ReportFormat::Table);
        const std::string expected = expected_table3_render();
        Outcome out;
        out.pass = rendered == expected;
        out.detail = out.pass ? "rendered table matches byte for byte"
                              : "rendered table differs from the published values";
        return out;
    });

    run_criterion(
        10, "end-to-end zero-noise run: 100%/100%, conservation, localize <= 1e-6 m", 10000.0,
        [&] {
            const sim::SimConfig config = end_to_end_config();
            const auto ctx = sim::make_context(config);
            const auto scene = sim::generate_scene(config);

            sim::PipelineState state;
            int steps = 0;
            while (state.phase != sim::Phase::Done && steps < 4000) {
                state = sim::step_pipeline(state, scene, ctx);
                if (!sim::conservation_holds(state, scene)) {
                    return Outcome{false, "conservation violated at step " +
                                              std::to_string(state.step_count)};
                }
                ++steps;
            }
            if (state.phase != sim::Phase::Done) {
                return Outcome{false, "pipeline did not terminate"};
            }

            int grasped = 0, correct = 0;
            double worst_localize = 0.0;
            for (const auto& attempt : state.attempts) {
                grasped += attempt.grasp_ok ? 1 : 0;
                correct += (attempt.placed && attempt.classified) ? 1 : 0;
                const auto& agg = scene.by_id(attempt.aggregate_id);
                worst_localize = std::max(
                    worst_localize, (attempt.localized_base - agg.centroid()).norm());
            }
            Outcome out;
            out.pass = state.attempts.size() == 40 && grasped == 40 && correct == 40 &&
                       worst_localize < 1e-6;
            std::ostringstream detail;
            detail << grasped << "/40 grasped, " << correct
                   << "/40 correctly binned, worst localize error " << worst_localize << " m";
            out.detail = detail.str();
            return out;
        });

    run_criterion(
        11, "determinism: replay and e2e re-runs byte-identical, also on 4 workers", 30000.0,
        [&] {
            const auto replay_once = sim::run_experiment(replay_config());
            const auto replay_twice = sim::run_experiment(replay_config());
            const auto e2e_once = sim::run_experiment(end_to_end_config());
            const auto e2e_twice = sim::run_experiment(end_to_end_config());

            const auto render = [](const sim::ExperimentResult& r) {
                return sim::render_report(r.report, sim::ReportFormat::Table) +
                       sim::render_report(r.report, sim::ReportFormat::Csv);
            };
            bool pass = render(replay_once) == render(replay_twice) &&
                        render(e2e_once) == render(e2e_twice);

            const std::vector<sim::SimConfig> batch = {replay_config(), end_to_end_config(),
                                                       replay_config(), end_to_end_config()};
            const auto serial = sim::run_experiments(batch, 1);
            const auto parallel = sim::run_experiments(batch, 4);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                pass = pass && render(serial[i]) == render(parallel[i]);
            }
            pass = pass && render(serial[1]) == render(e2e_once);
            return Outcome{pass, pass ? "all renders byte-identical"
                                      : "renders differ between runs"};
        });

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criterion(s) failed\n", g_failures);
    return 1;
}
