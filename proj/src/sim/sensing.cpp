// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sim/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace aggsort::sim {

namespace {

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// World-anchored value noise, two octaves with bilinear interpolation, so
// both stereo views sample a consistent pattern. The base pitch stays a few
// pixels wide at working distance; census orderings then survive the
// sub-pixel offset between the integer match grid and the true disparity.
double noise_octave(double wx, double wy, double pitch, std::uint64_t salt) {
    const double gx = wx / pitch, gy = wy / pitch;
    const auto ix = static_cast<std::int64_t>(std::floor(gx));
    const auto iy = static_cast<std::int64_t>(std::floor(gy));
    const double fx = gx - double(ix), fy = gy - double(iy);

    auto lattice = [&](std::int64_t x, std::int64_t y) {
        const std::uint64_t h =
            mix(salt ^ mix(std::uint64_t(x) * 0x9E3779B97F4A7C15ull ^ std::uint64_t(y)));
        return double(h & 0xFFu);
    };
    const double v00 = lattice(ix, iy), v10 = lattice(ix + 1, iy);
    const double v01 = lattice(ix, iy + 1), v11 = lattice(ix + 1, iy + 1);
    const double top = v00 + (v10 - v00) * fx;
    const double bottom = v01 + (v11 - v01) * fx;
    return top + (bottom - top) * fy;
}

double texture_value(double wx, double wy, std::uint64_t salt) {
    return 0.7 * noise_octave(wx, wy, 0.006, salt) +
           0.3 * noise_octave(wx, wy, 0.012, salt ^ 0xA5A5ull);
}

struct Surface {
    double z;                      // world height of the horizontal face
    double x0, x1, y0, y1;         // footprint, world frame
    std::uint64_t salt;
};

}  // namespace

cam::StereoRig default_sim_rig() {
    cam::StereoRig rig;
    rig.left = {230.0, 230.0, 160.0, 120.0, 0.0};
    rig.right = rig.left;
    rig.left_dist = {};
    rig.right_dist = {};
    rig.rotation = geom::Mat3::Identity();
    rig.translation = geom::Vec3(0.02, 0.0, 0.0);
    rig.baseline = 0.02;
    rig.image_width = 320;
    rig.image_height = 240;
    return rig;
}

int true_class_index(const AggregateSpec& aggregate, const sizing::GradeBands& bands) {
    const dataset::ClassMap map = dataset::ClassMap::default_map();
    const int grade = aggregate.true_grade(bands);
    if (grade < 1) {
        throw std::invalid_argument("aggregate grades below the minimum band");
    }
    const std::string name =
        dataset::lithology_code(aggregate.lithology) + "-" + std::to_string(grade);
    const int index = map.index(name);
    if (index < 0) throw std::logic_error("class map misses " + name);
    return index;
}

detect::ConfusionSpec expand_lithology_confusion(const detect::ConfusionSpec& lithology4) {
    if (lithology4.classes() != 4) {
        throw std::invalid_argument("lithology confusion must be 4x4");
    }
    const dataset::ClassMap map = dataset::ClassMap::default_map();
    const int n = map.size();
    Eigen::MatrixXd expanded = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const auto [true_lith, true_grade] = dataset::ClassMap::parse_class_name(map.name(i));
        for (int j = 0; j < n; ++j) {
            const auto [rep_lith, rep_grade] = dataset::ClassMap::parse_class_name(map.name(j));
            if (rep_grade != true_grade) continue;  // grade preserved
            expanded(i, j) = lithology4.mass(report_index(true_lith), report_index(rep_lith));
        }
    }
    return detect::ConfusionSpec(expanded);
}

stereo::GrayImage render_scene_view(const Scene& scene, const geom::RigidTransform& camera_pose,
                                    const cam::Intrinsics& intr, int width, int height,
                                    double baseline_shift, std::uint64_t texture_seed) {
    // Right view: camera translated along its own x-axis by the baseline.
    const geom::RigidTransform pose =
        camera_pose * geom::RigidTransform::translate(baseline_shift, 0.0, 0.0);
    const geom::Vec3 origin = pose.translation();
    const geom::Mat3 rot = pose.rotation();

    std::vector<Surface> surfaces;
    surfaces.reserve(scene.aggregates.size() + 1);
    for (const auto& agg : scene.aggregates) {
        const geom::Vec3 c = agg.centroid();
        surfaces.push_back(Surface{agg.top_z(), c.x() - agg.size_m.x() / 2.0,
                                   c.x() + agg.size_m.x() / 2.0, c.y() - agg.size_m.y() / 2.0,
                                   c.y() + agg.size_m.y() / 2.0,
                                   texture_seed ^ mix(0x51u + agg.id)});
    }

    stereo::GrayImage img(width, height);
    for (int py = 0; py < height; ++py) {
        for (int px = 0; px < width; ++px) {
            const double xn = (px - intr.cx) / intr.fx;
            const double yn = (py - intr.cy) / intr.fy;
            const geom::Vec3 dir = rot * geom::Vec3(xn, yn, 1.0);

            double best_t = std::numeric_limits<double>::infinity();
            double value = 0.0;
            auto try_surface = [&](double z, double x0, double x1, double y0, double y1,
                                   std::uint64_t salt) {
                if (std::abs(dir.z()) < 1e-12) return;
                const double t = (z - origin.z()) / dir.z();
                if (t <= 0.0 || t >= best_t) return;
                const double hx = origin.x() + t * dir.x();
                const double hy = origin.y() + t * dir.y();
                if (hx < x0 || hx > x1 || hy < y0 || hy > y1) return;
                best_t = t;
                value = texture_value(hx, hy, salt);
            };

            for (const auto& s : surfaces) try_surface(s.z, s.x0, s.x1, s.y0, s.y1, s.salt);
            // Unbounded ground plane.
            if (std::abs(dir.z()) > 1e-12) {
                const double t = (scene.plane_z - origin.z()) / dir.z();
                if (t > 0.0 && t < best_t) {
                    const double hx = origin.x() + t * dir.x();
                    const double hy = origin.y() + t * dir.y();
                    best_t = t;
                    value = texture_value(hx, hy, texture_seed ^ 0xF100Du);
                }
            }
            img.set(px, py, std::uint8_t(std::clamp(value, 0.0, 255.0)));
        }
    }
    return img;
}

std::vector<SensedDetection> sense(const Scene& scene, const kin::JointVector& arm,
                                   const geom::RigidTransform& camera_in_effector,
                                   const cam::StereoRig& rig, const kin::DhChain& chain,
                                   const detect::ConfusionSpec& confusion, std::uint64_t seed,
                                   const SenseOptions& options) {
    const geom::RigidTransform camera_pose =
        kin::forward_kinematics(chain, arm) * camera_in_effector;
    const geom::RigidTransform world_to_camera = camera_pose.inverse();

    detect::ViewGeometry geometry;
    geometry.intrinsics = rig.left;
    geometry.distortion = rig.left_dist;
    geometry.image_width = rig.image_width;
    geometry.image_height = rig.image_height;

    detect::OracleOptions oracle;
    oracle.box_noise_px = options.box_noise_px;

    stereo::DisparityMap disparity;
    if (options.fidelity == Fidelity::FullStereo) {
        const stereo::GrayImage left = render_scene_view(
            scene, camera_pose, rig.left, rig.image_width, rig.image_height, 0.0);
        const stereo::GrayImage right = render_scene_view(
            scene, camera_pose, rig.left, rig.image_width, rig.image_height, rig.baseline);
        stereo::MatchOptions match;
        match.d_max = 32;
        disparity = stereo::compute_disparity(left, right, match);
    }

    std::vector<SensedDetection> sensed;
    for (const auto& agg : scene.aggregates) {
        detect::AggregateView view;
        view.id = agg.id;
        view.true_class = true_class_index(agg);

        // Analytic fidelity measures the mid-height footprint (center =
        // centroid); full-stereo uses the visible top face.
        const geom::Vec3 c = agg.centroid();
        const double face_z =
            options.fidelity == Fidelity::Analytic ? c.z() : agg.top_z();
        const double hx = agg.size_m.x() / 2.0, hy = agg.size_m.y() / 2.0;
        for (const double sx : {-1.0, 1.0}) {
            for (const double sy : {-1.0, 1.0}) {
                view.corners_cam.push_back(
                    world_to_camera * geom::Vec3(c.x() + sx * hx, c.y() + sy * hy, face_z));
            }
        }

        const auto detections =
            detect::detect({view}, geometry, confusion, mix(seed ^ 0xDE7Ec7ull), oracle);
        if (detections.empty()) continue;

        SensedDetection sd;
        sd.detection = detections.front();
        sd.aggregate_id = agg.id;

        if (options.fidelity == Fidelity::Analytic) {
            sd.depth_m = (world_to_camera * c).z();
            if (options.depth_noise_sigma > 0.0) {
                std::mt19937_64 rng(mix(seed ^ (0xDE9174ull + agg.id)));
                std::normal_distribution<double> gauss(0.0, options.depth_noise_sigma);
                sd.depth_m += gauss(rng);
            }
        } else {
            const Eigen::Vector2d center = sd.detection.center();
            const int cx = std::clamp(int(std::lround(center.x())), 0, rig.image_width - 1);
            const int cy = std::clamp(int(std::lround(center.y())), 0, rig.image_height - 1);
            std::int16_t d = stereo::DisparityMap::kInvalid;
            // Nearest valid disparity in a small spiral around the center.
            for (int radius = 0; radius <= 5 && d == stereo::DisparityMap::kInvalid; ++radius) {
                for (int dy = -radius; dy <= radius && d == stereo::DisparityMap::kInvalid; ++dy) {
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int x = cx + dx, y = cy + dy;
                        if (x < 0 || x >= disparity.width || y < 0 || y >= disparity.height) {
                            continue;
                        }
                        if (disparity.at(x, y) != stereo::DisparityMap::kInvalid) {
                            d = disparity.at(x, y);
                            break;
                        }
                    }
                }
            }
            if (d == stereo::DisparityMap::kInvalid || d <= 0) continue;
            sd.depth_m = stereo::disparity_to_depth(double(d), rig.left.fx, rig.baseline);
        }
        sensed.push_back(std::move(sd));
    }
    return sensed;
}

}  // namespace aggsort::sim
