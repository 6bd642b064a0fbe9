// SPDX-License-Identifier: Apache-2.0

#include "aggsort/camera.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aggsort::cam {

namespace {

Eigen::Vector2d apply_distortion(const Distortion& dist, const Eigen::Vector2d& n) {
    const double x = n.x(), y = n.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + dist.k1 * r2 + dist.k2 * r2 * r2;
    const double dx = 2.0 * dist.p1 * x * y + dist.p2 * (r2 + 2.0 * x * x);
    const double dy = dist.p1 * (r2 + 2.0 * y * y) + 2.0 * dist.p2 * x * y;
    return {x * radial + dx, y * radial + dy};
}

}  // namespace

Pixel project(const Intrinsics& intr, const Distortion& dist, const geom::Vec3& p_cam) {
    if (!(p_cam.z() > 0.0)) {
        throw std::domain_error("project: point depth must be positive");
    }
    const Eigen::Vector2d n(p_cam.x() / p_cam.z(), p_cam.y() / p_cam.z());
    const Eigen::Vector2d d = apply_distortion(dist, n);
    return {intr.fx * d.x() + intr.skew * d.y() + intr.cx, intr.fy * d.y() + intr.cy};
}

Eigen::Vector2d undistort(const Intrinsics& intr, const Distortion& dist, const Pixel& pixel) {
    const double yd = (pixel.y() - intr.cy) / intr.fy;
    const double xd = (pixel.x() - intr.cx - intr.skew * yd) / intr.fx;

    Eigen::Vector2d n(xd, yd);
    for (int iter = 0; iter < 20; ++iter) {
        const double x = n.x(), y = n.y();
        const double r2 = x * x + y * y;
        const double radial = 1.0 + dist.k1 * r2 + dist.k2 * r2 * r2;
        const double dx = 2.0 * dist.p1 * x * y + dist.p2 * (r2 + 2.0 * x * x);
        const double dy = dist.p1 * (r2 + 2.0 * y * y) + 2.0 * dist.p2 * x * y;
        const Eigen::Vector2d next((xd - dx) / radial, (yd - dy) / radial);
        const double step = (next - n).cwiseAbs().maxCoeff();
        n = next;
        if (step < 1e-10) {
            return n;
        }
    }
    // Tolerate stagnation at the fixed point instead of demanding a last
    // sub-1e-10 step.
    if ((apply_distortion(dist, n) - Eigen::Vector2d(xd, yd)).cwiseAbs().maxCoeff() < 1e-9) {
        return n;
    }
    throw std::runtime_error("undistort: fixed-point iteration did not converge");
}

std::vector<BoardView> synthesize_target_views(const PlanarTarget& target,
                                               const std::vector<geom::RigidTransform>& poses,
                                               const Intrinsics& intr, const Distortion& dist,
                                               double noise_sigma_px, std::uint64_t seed) {
    if (target.rows < 2 || target.cols < 2 || target.square_size <= 0.0) {
        throw std::invalid_argument("invalid planar target");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<BoardView> views;
    views.reserve(poses.size());
    for (const auto& pose : poses) {
        BoardView view;
        for (int i = 0; i < target.rows; ++i) {
            for (int j = 0; j < target.cols; ++j) {
                const geom::Vec3 board_point(i * target.square_size, j * target.square_size, 0.0);
                const geom::Vec3 p_cam = pose * board_point;
                if (!(p_cam.z() > 0.0)) {
                    throw std::domain_error("synthesize_target_views: board behind camera");
                }
                Pixel px = project(intr, dist, p_cam);
                if (noise_sigma_px > 0.0) {
                    px.x() += noise_sigma_px * gauss(rng);
                    px.y() += noise_sigma_px * gauss(rng);
                }
                view.board_points.push_back(board_point);
                view.pixels.push_back(px);
            }
        }
        views.push_back(std::move(view));
    }
    return views;
}

std::vector<geom::RigidTransform> default_target_poses(int count) {
    std::vector<geom::RigidTransform> poses;
    poses.reserve(count);
    for (int i = 0; i < count; ++i) {
        // Deterministic sweep of tilts, in-plane rotations and standoffs.
        const double rx = 0.45 * std::sin(0.9 * i + 0.3);
        const double ry = 0.45 * std::cos(1.1 * i + 1.2);
        const double rz = 0.5 * std::sin(0.7 * i);
        const double z = 0.6 + 0.05 * (i % 7);
        const double x = -0.12 + 0.02 * (i % 5);
        const double y = -0.10 + 0.025 * (i % 4);
        const geom::RigidTransform pose =
            geom::RigidTransform::translate(x, y, z) * geom::RigidTransform::rot_x(rx) *
            geom::RigidTransform::rot_y(ry) * geom::RigidTransform::rot_z(rz) *
            geom::RigidTransform::translate(-0.11, -0.07, 0.0);
        poses.push_back(pose);
    }
    return poses;
}

double reprojection_error(const CalibrationResult& result, const std::vector<BoardView>& views) {
    if (views.size() != result.extrinsics.size()) {
        throw std::invalid_argument("reprojection_error: view count mismatch");
    }
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto& view = views[v];
        for (std::size_t i = 0; i < view.board_points.size(); ++i) {
            const geom::Vec3 p_cam = result.extrinsics[v] * view.board_points[i];
            const Pixel predicted = project(result.intrinsics, result.distortion, p_cam);
            sum_sq += (predicted - view.pixels[i]).squaredNorm();
            ++count;
        }
    }
    if (count == 0) return 0.0;
    return std::sqrt(sum_sq / static_cast<double>(count));
}

void write_calibration(std::ostream& out, const CalibrationResult& result) {
    out.precision(17);
    out << "fx " << result.intrinsics.fx << "\n"
        << "fy " << result.intrinsics.fy << "\n"
        << "cx " << result.intrinsics.cx << "\n"
        << "cy " << result.intrinsics.cy << "\n"
        << "skew " << result.intrinsics.skew << "\n"
        << "k1 " << result.distortion.k1 << "\n"
        << "k2 " << result.distortion.k2 << "\n"
        << "p1 " << result.distortion.p1 << "\n"
        << "p2 " << result.distortion.p2 << "\n"
        << "rms " << result.rms_reprojection << "\n";
    for (const auto& pose : result.extrinsics) {
        out << "view " << geom::to_line(pose) << "\n";
    }
}

CalibrationResult read_calibration(std::istream& in) {
    CalibrationResult result;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key) || key[0] == '#') continue;
        if (key == "view") {
            std::string rest;
            std::getline(fields, rest);
            result.extrinsics.push_back(geom::parse_line(rest, 1e-6));
            continue;
        }
        double value;
        if (!(fields >> value)) {
            throw std::invalid_argument("calibration file: bad line: " + line);
        }
        if (key == "fx") result.intrinsics.fx = value;
        else if (key == "fy") result.intrinsics.fy = value;
        else if (key == "cx") result.intrinsics.cx = value;
        else if (key == "cy") result.intrinsics.cy = value;
        else if (key == "skew") result.intrinsics.skew = value;
        else if (key == "k1") result.distortion.k1 = value;
        else if (key == "k2") result.distortion.k2 = value;
        else if (key == "p1") result.distortion.p1 = value;
        else if (key == "p2") result.distortion.p2 = value;
        else if (key == "rms") result.rms_reprojection = value;
        else throw std::invalid_argument("calibration file: unknown key " + key);
    }
    return result;
}

StereoRig read_stereo_rig(std::istream& in, double rigidity_tol) {
    std::map<std::string, std::vector<double>> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key) || key[0] == '#') continue;
        std::vector<double> values;
        double v;
        while (fields >> v) values.push_back(v);
        entries[key] = values;
    }

    auto scalar = [&](const std::string& key, double fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        if (it->second.size() != 1) {
            throw std::invalid_argument("stereo rig: key " + key + " needs one value");
        }
        return it->second[0];
    };

    StereoRig rig;
    rig.left.fx = scalar("left.fx", 1.0);
    rig.left.fy = scalar("left.fy", 1.0);
    rig.left.cx = scalar("left.cx", 0.0);
    rig.left.cy = scalar("left.cy", 0.0);
    rig.left.skew = scalar("left.skew", 0.0);
    rig.left_dist = {scalar("left.k1", 0.0), scalar("left.k2", 0.0), scalar("left.p1", 0.0),
                     scalar("left.p2", 0.0)};
    rig.right.fx = scalar("right.fx", 1.0);
    rig.right.fy = scalar("right.fy", 1.0);
    rig.right.cx = scalar("right.cx", 0.0);
    rig.right.cy = scalar("right.cy", 0.0);
    rig.right.skew = scalar("right.skew", 0.0);
    rig.right_dist = {scalar("right.k1", 0.0), scalar("right.k2", 0.0), scalar("right.p1", 0.0),
                      scalar("right.p2", 0.0)};
    rig.image_width = static_cast<int>(scalar("image.width", 1280));
    rig.image_height = static_cast<int>(scalar("image.height", 800));

    if (auto it = entries.find("rotation"); it != entries.end()) {
        if (it->second.size() != 9) {
            throw std::invalid_argument("stereo rig: rotation needs 9 values");
        }
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rig.rotation(r, c) = it->second[r * 3 + c];
    }
    if (auto it = entries.find("translation_mm"); it != entries.end()) {
        if (it->second.size() != 3) {
            throw std::invalid_argument("stereo rig: translation_mm needs 3 values");
        }
        rig.translation = geom::Vec3(it->second[0], it->second[1], it->second[2]) / 1000.0;
    }
    rig.baseline = rig.translation.norm();

    if (rig.left.fx <= 0.0 || rig.left.fy <= 0.0 || rig.right.fx <= 0.0 || rig.right.fy <= 0.0) {
        throw std::invalid_argument("stereo rig: focal lengths must be positive");
    }
    geom::Mat4 rot4 = geom::Mat4::Identity();
    rot4.topLeftCorner<3, 3>() = rig.rotation;
    const auto report = geom::validate_rigid(rot4, rigidity_tol);
    if (!report.passed) {
        std::ostringstream msg;
        msg << "stereo rig: rotation fails rigidity at tol " << rigidity_tol
            << " (orthonormality " << report.orthonormality << ", det " << report.determinant
            << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!(rig.baseline > 0.0)) {
        throw std::invalid_argument("stereo rig: baseline must be positive");
    }
    return rig;
}

void write_stereo_rig(std::ostream& out, const StereoRig& rig) {
    out.precision(17);
    out << "left.fx " << rig.left.fx << "\nleft.fy " << rig.left.fy << "\nleft.cx "
        << rig.left.cx << "\nleft.cy " << rig.left.cy << "\nleft.skew " << rig.left.skew
        << "\n";
    out << "left.k1 " << rig.left_dist.k1 << "\nleft.k2 " << rig.left_dist.k2 << "\nleft.p1 "
        << rig.left_dist.p1 << "\nleft.p2 " << rig.left_dist.p2 << "\n";
    out << "right.fx " << rig.right.fx << "\nright.fy " << rig.right.fy << "\nright.cx "
        << rig.right.cx << "\nright.cy " << rig.right.cy << "\nright.skew " << rig.right.skew
        << "\n";
    out << "right.k1 " << rig.right_dist.k1 << "\nright.k2 " << rig.right_dist.k2
        << "\nright.p1 " << rig.right_dist.p1 << "\nright.p2 " << rig.right_dist.p2 << "\n";
    out << "rotation";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out << ' ' << rig.rotation(r, c);
    out << "\ntranslation_mm " << rig.translation.x() * 1000.0 << ' '
        << rig.translation.y() * 1000.0 << ' ' << rig.translation.z() * 1000.0 << "\n";
    out << "image.width " << rig.image_width << "\nimage.height " << rig.image_height << "\n";
}

}  // namespace aggsort::cam
