// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include "aggsort/camera.hpp"
#include "aggsort/dataset.hpp"
#include "aggsort/handeye.hpp"
#include "aggsort/kinematics.hpp"
#include "aggsort/sim/pipeline.hpp"
#include "aggsort/sizing.hpp"
#include "aggsort/stereo.hpp"

#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

aggsort::kin::DhChain load_chain(const std::string& profile, const std::string& file) {
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in.good()) throw CLI::ValidationError("--chain-file", "cannot open " + file);
        return aggsort::kin::DhChain::from_stream(in);
    }
    const auto chain = aggsort::kin::DhChain::builtin_profile(profile);
    if (!chain) throw CLI::ValidationError("--profile", "unknown profile " + profile);
    return *chain;
}

aggsort::kin::JointVector parse_joints_deg(const std::vector<double>& values) {
    if (values.size() != 5) {
        throw CLI::ValidationError("--joints-deg", "need exactly 5 angles");
    }
    aggsort::kin::JointVector q{};
    for (std::size_t i = 0; i < 5; ++i) q[i] = values[i] * kDegToRad;
    return q;
}

std::vector<std::string> read_listing(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw CLI::ValidationError("listing", "cannot open " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace aggsort;

    CLI::App app{"Vision-guided aggregate sorting toolkit"};
    app.require_subcommand(1);

    // ---- fk ----------------------------------------------------------------
    auto* fk_cmd = app.add_subcommand("fk", "Forward kinematics of a joint configuration");
    std::string fk_profile = "jetarm", fk_chain_file;
    std::vector<double> fk_joints;
    fk_cmd->add_option("--profile", fk_profile, "built-in DH profile");
    fk_cmd->add_option("--chain-file", fk_chain_file, "DH config file");
    fk_cmd->add_option("--joints-deg", fk_joints, "five joint angles, degrees")->expected(5);

    // ---- ik ----------------------------------------------------------------
    auto* ik_cmd = app.add_subcommand("ik", "Analytic inverse kinematics for a target pose");
    std::string ik_profile = "jetarm", ik_chain_file, ik_pose_file;
    std::vector<double> ik_pose, ik_reference;
    ik_cmd->add_option("--profile", ik_profile, "built-in DH profile");
    ik_cmd->add_option("--chain-file", ik_chain_file, "DH config file");
    ik_cmd->add_option("--pose", ik_pose, "16 row-major numbers")->expected(16);
    ik_cmd->add_option("--pose-file", ik_pose_file, "file with one transform line");
    ik_cmd->add_option("--reference-deg", ik_reference, "reference joints, degrees")
        ->expected(5);

    // ---- calibrate ---------------------------------------------------------
    auto* cal_cmd = app.add_subcommand("calibrate", "Planar calibration on synthetic views");
    int cal_views = 20;
    double cal_noise = 0.0;
    std::uint64_t cal_seed = 1;
    std::string cal_out;
    cal_cmd->add_option("--views", cal_views, "number of synthetic board views");
    cal_cmd->add_option("--noise", cal_noise, "pixel noise sigma");
    cal_cmd->add_option("--seed", cal_seed, "noise seed");
    cal_cmd->add_option("--out", cal_out, "write the calibration result here");

    // ---- handeye -----------------------------------------------------------
    auto* he_cmd = app.add_subcommand("handeye", "Solve AX=XB from a motion-pair file");
    std::string he_pairs_file, he_out;
    int he_synth = 0;
    std::uint64_t he_seed = 1;
    he_cmd->add_option("--pairs", he_pairs_file,
                       "transform lines alternating A/B, one pair per two lines");
    he_cmd->add_option("--synthesize", he_synth, "generate N synthetic motion pairs instead");
    he_cmd->add_option("--seed", he_seed, "synthesis seed");
    he_cmd->add_option("--out", he_out, "write the solution here");

    // ---- stereo ------------------------------------------------------------
    auto* st_cmd = app.add_subcommand("stereo", "Disparity from a rectified PGM pair");
    std::string st_left, st_right, st_out, st_depth_out;
    int st_dmax = 64;
    double st_fx = 0.0, st_baseline = 0.0;
    st_cmd->add_option("--left", st_left, "left image (PGM)")->required();
    st_cmd->add_option("--right", st_right, "right image (PGM)")->required();
    st_cmd->add_option("--dmax", st_dmax, "disparity search range");
    st_cmd->add_option("--out", st_out, "disparity map output (P2, 255 = invalid)");
    st_cmd->add_option("--depth-out", st_depth_out, "depth map output (text grid)");
    st_cmd->add_option("--fx", st_fx, "focal length, px (for depth)");
    st_cmd->add_option("--baseline", st_baseline, "baseline, m (for depth)");

    // ---- size --------------------------------------------------------------
    auto* size_cmd = app.add_subcommand("size", "Box sizing and grade assignment");
    std::vector<double> size_box;
    double size_depth = 0.0, size_fx = 0.0;
    size_cmd->add_option("--box", size_box, "x1 y1 x2 y2 in pixels")->expected(4)->required();
    size_cmd->add_option("--depth", size_depth, "depth at the box center, m");
    size_cmd->add_option("--fx", size_fx, "focal length, px");

    // ---- dataset -----------------------------------------------------------
    auto* ds_cmd = app.add_subcommand("dataset", "Dataset utilities");
    auto* ds_verify = ds_cmd->add_subcommand("verify", "Check image/label listings");
    std::string ds_images, ds_labels;
    ds_verify->add_option("--images", ds_images, "file listing image names")->required();
    ds_verify->add_option("--labels", ds_labels, "file listing label names")->required();
    auto* ds_name = ds_cmd->add_subcommand("name", "Canonical sample name");
    std::string ds_code = "D";
    int ds_grade = 1, ds_seq = 1;
    ds_name->add_option("--code", ds_code, "lithology code (D/H/S/SH)");
    ds_name->add_option("--grade", ds_grade, "grade 1..3");
    ds_name->add_option("--seq", ds_seq, "sequence number");

    // ---- simulate ----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Run the sorting experiment");
    std::string sim_config, sim_replay, sim_out;
    bool sim_csv = false;
    sim_cmd->add_option("--config", sim_config, "config file (key value per line)");
    sim_cmd->add_option("--replay", sim_replay, "replay file overriding the config");
    sim_cmd->add_option("--out", sim_out, "write the report here");
    sim_cmd->add_flag("--csv", sim_csv, "render CSV instead of the table");

    // ---- report ------------------------------------------------------------
    auto* rep_cmd = app.add_subcommand("report", "Render a report from a replay file");
    std::string rep_replay, rep_format = "table";
    rep_cmd->add_option("--replay", rep_replay, "replay file")->required();
    rep_cmd->add_option("--format", rep_format, "table|csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fk_cmd) {
            const auto chain = load_chain(fk_profile, fk_chain_file);
            const auto q = parse_joints_deg(fk_joints);
            const auto pose = kin::forward_kinematics(chain, q);
            std::cout << pose.matrix() << "\n";
            std::cout << "position_m " << pose.translation().transpose() << "\n";
            std::cout << "position_norm_m " << pose.translation().norm() << "\n";
        } else if (*ik_cmd) {
            const auto chain = load_chain(ik_profile, ik_chain_file);
            geom::RigidTransform target;
            if (!ik_pose_file.empty()) {
                std::ifstream in(ik_pose_file);
                std::stringstream buffer;
                buffer << in.rdbuf();
                target = geom::parse_line(buffer.str(), 1e-3);
            } else if (ik_pose.size() == 16) {
                std::ostringstream line;
                for (const double v : ik_pose) line << v << ' ';
                target = geom::parse_line(line.str(), 1e-3);
            } else {
                throw CLI::ValidationError("ik", "need --pose or --pose-file");
            }
            kin::IkOptions options;
            if (ik_reference.size() == 5) options.reference = parse_joints_deg(ik_reference);
            const auto set = kin::inverse_kinematics(chain, target, options);
            if (set.empty()) {
                std::cout << "no solution: "
                          << (set.failure == kin::IkFailure::OutOfReach
                                  ? "out of reach"
                                  : "orientation infeasible for the 5-DOF wrist")
                          << "\n";
                return 2;
            }
            for (const auto& sol : set.solutions) {
                std::cout << "solution elbow " << (sol.elbow > 0 ? '+' : '-') << " deg:";
                for (const double angle : sol.q) std::cout << ' ' << angle / kDegToRad;
                std::cout << "\n";
            }
        } else if (*cal_cmd) {
            cam::Intrinsics truth{1000.0, 1005.0, 640.0, 400.0, 0.0};
            cam::Distortion truth_dist{-0.0000716, 0.00000003, 0.0016, -0.000247};
            const auto poses = cam::default_target_poses(cal_views);
            const auto views = cam::synthesize_target_views(cam::PlanarTarget{}, poses, truth,
                                                            truth_dist, cal_noise, cal_seed);
            const auto result = cam::calibrate_planar(views);
            std::cout << "fx " << result.intrinsics.fx << "\nfy " << result.intrinsics.fy
                      << "\ncx " << result.intrinsics.cx << "\ncy " << result.intrinsics.cy
                      << "\nrms_px " << result.rms_reprojection << "\n";
            std::cout << (result.rms_reprojection < 1.5 ? "PASS" : "FAIL")
                      << " reprojection gate (< 1.5 px)\n";
            if (!cal_out.empty()) {
                std::ofstream out(cal_out);
                cam::write_calibration(out, result);
            }
        } else if (*he_cmd) {
            std::vector<handeye::MotionPair> pairs;
            if (he_synth > 0) {
                std::mt19937_64 rng(he_seed);
                std::normal_distribution<double> gauss(0.0, 1.0);
                std::uniform_real_distribution<double> uni(-0.2, 0.2);
                const geom::RigidTransform x_true(
                    Eigen::AngleAxisd(0.4, geom::Vec3(1, 2, -1).normalized())
                        .toRotationMatrix(),
                    geom::Vec3(0.03, -0.05, 0.08));
                std::vector<geom::RigidTransform> effector, camera;
                for (int i = 0; i < he_synth + 1; ++i) {
                    Eigen::Quaterniond quat(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
                    quat.normalize();
                    const geom::RigidTransform g(quat.toRotationMatrix(),
                                                 geom::Vec3(uni(rng), uni(rng), uni(rng)));
                    effector.push_back(g);
                    camera.push_back(g * x_true);  // camera-in-target, target frame = base
                }
                pairs = handeye::collect_motion_pairs(effector, camera);
                std::cout << "true X line: " << geom::to_line(x_true) << "\n";
            } else if (!he_pairs_file.empty()) {
                std::ifstream in(he_pairs_file);
                const auto transforms = geom::read_transforms(in, 1e-3);
                if (transforms.size() < 4 || transforms.size() % 2 != 0) {
                    throw CLI::ValidationError("--pairs",
                                               "need an even number (>= 4) of transforms");
                }
                for (std::size_t i = 0; i < transforms.size(); i += 2) {
                    pairs.push_back(handeye::MotionPair{transforms[i], transforms[i + 1]});
                }
            } else {
                throw CLI::ValidationError("handeye", "need --pairs or --synthesize");
            }
            if (pairs.size() < 5) {
                std::cerr << "warning: fewer than 5 motion pairs; the solve is poorly"
                             " conditioned against noise\n";
            }
            const auto solution = handeye::solve_hand_eye(pairs);
            std::cout << "X line: " << geom::to_line(solution.t_ce) << "\n";
            std::cout << "max residual rot_rad " << solution.max_rotation_residual
                      << " trans_m " << solution.max_translation_residual << "\n";
            if (!he_out.empty()) {
                std::ofstream out(he_out);
                out << geom::to_line(solution.t_ce) << "\n";
                out << "# residuals rot_rad " << solution.max_rotation_residual << " trans_m "
                    << solution.max_translation_residual << "\n";
            }
        } else if (*st_cmd) {
            std::ifstream left_in(st_left), right_in(st_right);
            const auto left = stereo::read_pgm(left_in);
            const auto right = stereo::read_pgm(right_in);
            stereo::MatchOptions options;
            options.d_max = st_dmax;
            const auto disparity = stereo::compute_disparity(left, right, options);
            if (!st_out.empty()) {
                std::ofstream out(st_out);
                stereo::write_disparity_pgm(out, disparity);
            }
            int valid = 0;
            for (const auto d : disparity.values) {
                if (d != stereo::DisparityMap::kInvalid) ++valid;
            }
            std::cout << "valid px " << valid << " / " << disparity.values.size() << "\n";
            if (!st_depth_out.empty()) {
                if (st_fx <= 0.0 || st_baseline <= 0.0) {
                    throw CLI::ValidationError("stereo", "--fx and --baseline required");
                }
                const auto depth =
                    stereo::disparity_map_to_depth(disparity, st_fx, st_baseline);
                std::ofstream out(st_depth_out);
                stereo::write_depth_text(out, depth);
            }
        } else if (*size_cmd) {
            const auto mer = sizing::mer_dimensions({size_box[0], size_box[1]},
                                                    {size_box[2], size_box[3]});
            std::cout << "a_px " << mer.a << " b_px " << mer.b << " c_px " << mer.c << "\n";
            if (size_depth > 0.0 && size_fx > 0.0) {
                const double c_cm = sizing::pixel_to_metric(mer.c, size_depth, size_fx) * 100.0;
                const auto grade = sizing::grade(c_cm);
                std::cout << "c_cm " << c_cm << "\n";
                if (grade.rejected()) {
                    std::cout << "grade rejected (below the 1 cm band)\n";
                } else {
                    std::cout << "grade " << static_cast<int>(grade.value)
                              << (grade.oversize ? " (oversize)" : "") << "\n";
                }
            }
        } else if (*ds_verify) {
            const auto report =
                dataset::verify_dataset(read_listing(ds_images), read_listing(ds_labels));
            for (const auto& entry : report.entries) {
                const char* status = entry.status == dataset::EntryStatus::Matched
                                         ? "matched"
                                     : entry.status == dataset::EntryStatus::MissingLabel
                                         ? "missing label"
                                     : entry.status == dataset::EntryStatus::MissingImage
                                         ? "missing image"
                                         : "order mismatch";
                std::cout << entry.position << " " << entry.image_stem << " / "
                          << entry.label_stem << ": " << status << "\n";
            }
            std::cout << (report.pass ? "PASS" : "FAIL") << "\n";
            return report.pass ? 0 : 2;
        } else if (*ds_name) {
            dataset::SampleName sample{dataset::lithology_from_code(ds_code), ds_grade, ds_seq};
            std::cout << dataset::canonical_name(sample) << "\n";
        } else if (*sim_cmd) {
            sim::SimConfig config;
            if (!sim_config.empty()) {
                std::ifstream in(sim_config);
                if (!in.good()) {
                    throw CLI::ValidationError("--config", "cannot open " + sim_config);
                }
                config = sim::parse_config(in);
            }
            if (!sim_replay.empty()) config.replay_path = sim_replay;
            const auto result = sim::run_experiment(config);
            const std::string rendered = sim::render_report(
                result.report, sim_csv ? sim::ReportFormat::Csv : sim::ReportFormat::Table);
            std::cout << rendered;
            if (!sim_out.empty()) {
                std::ofstream out(sim_out);
                out << rendered;
            }
        } else if (*rep_cmd) {
            std::ifstream in(rep_replay);
            if (!in.good()) {
                throw CLI::ValidationError("--replay", "cannot open " + rep_replay);
            }
            const auto report = sim::tally_replay(sim::parse_replay(in));
            std::cout << sim::render_report(report, rep_format == "csv"
                                                        ? sim::ReportFormat::Csv
                                                        : sim::ReportFormat::Table);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
