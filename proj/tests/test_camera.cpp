// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aggsort/camera.hpp"

#include <fstream>
#include <random>
#include <sstream>

using namespace aggsort;
using cam::Distortion;
using cam::Intrinsics;
using geom::Vec3;

namespace {

const Intrinsics kIntr{1000.0, 1010.0, 640.0, 400.0, 0.0};
const Distortion kDist{-0.0000716, 0.00000003, 0.0016, -0.000247};

}  // namespace

TEST_CASE("projection basics") {
    CHECK((cam::project(kIntr, kDist, Vec3(0, 0, 1)) -
           Eigen::Vector2d(kIntr.cx, kIntr.cy))
              .norm() < 1e-12);

    // Zero distortion: plain similar triangles.
    const auto px = cam::project(kIntr, Distortion{}, Vec3(0.25, 0.0, 2.0));
    CHECK(px.x() == doctest::Approx(kIntr.fx * 0.125 + kIntr.cx));
    CHECK(px.y() == doctest::Approx(kIntr.cy));

    CHECK_THROWS_AS(cam::project(kIntr, kDist, Vec3(0, 0, -1)), std::domain_error);
    CHECK_THROWS_AS(cam::project(kIntr, kDist, Vec3(0, 0, 0)), std::domain_error);
}

TEST_CASE("positive k1 pushes points radially outward") {
    Distortion barrel{0.1, 0.0, 0.0, 0.0};
    const Vec3 p(0.2, 0.1, 1.0);
    const auto distorted = cam::project(kIntr, barrel, p);
    const auto clean = cam::project(kIntr, Distortion{}, p);
    const Eigen::Vector2d center(kIntr.cx, kIntr.cy);
    CHECK((distorted - center).norm() > (clean - center).norm());
}

TEST_CASE("undistort fixed points and round trips") {
    const auto at_center = cam::undistort(kIntr, kDist, {kIntr.cx, kIntr.cy});
    CHECK(at_center.norm() < 1e-12);

    // Zero distortion: exact linear unprojection.
    const auto linear = cam::undistort(kIntr, Distortion{}, {kIntr.cx + 100.0, kIntr.cy});
    CHECK(linear.x() == doctest::Approx(100.0 / kIntr.fx));
    CHECK(linear.y() == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(40.0, 1240.0), uy(40.0, 760.0);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector2d pixel(ux(rng), uy(rng));
        const auto n = cam::undistort(kIntr, kDist, pixel);
        const auto back = cam::project(kIntr, kDist, Vec3(n.x() * 2.0, n.y() * 2.0, 2.0));
        CHECK((back - pixel).norm() < 1e-8);
    }
}

TEST_CASE("projection/unprojection consistency in 3D") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lateral(-0.4, 0.4), depth(0.5, 3.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 p(lateral(rng), lateral(rng), depth(rng));
        const auto pixel = cam::project(kIntr, kDist, p);
        const auto n = cam::undistort(kIntr, kDist, pixel);
        const Vec3 back(n.x() * p.z(), n.y() * p.z(), p.z());
        CHECK((back - p).norm() < 1e-8);
    }
}

TEST_CASE("synthesized target views") {
    cam::PlanarTarget target;  // 9x6, 27 mm
    CHECK(target.square_size == doctest::Approx(0.027));

    // Frontal board 1 m out, fx = 1000: grid pitch 27 px.
    Intrinsics simple{1000.0, 1000.0, 640.0, 400.0, 0.0};
    const auto views = cam::synthesize_target_views(
        target, {geom::RigidTransform::translate(0, 0, 1.0)}, simple, Distortion{});
    REQUIRE(views.size() == 1);
    REQUIRE(views[0].board_points.size() == 54);
    CHECK(views[0].board_points[0].norm() == 0.0);  // corner (0,0) at board origin
    const auto& px = views[0].pixels;
    // Corner (i, j) vs (i, j+1) differ by one squared pitch in v.
    CHECK((px[1] - px[0]).norm() == doctest::Approx(27.0).epsilon(1e-9));

    CHECK_THROWS_AS(
        cam::synthesize_target_views(target, {geom::RigidTransform::translate(0, 0, -1.0)},
                                     simple, Distortion{}),
        std::domain_error);
}

TEST_CASE("calibration recovers ground truth from noiseless views") {
    const auto poses = cam::default_target_poses(20);
    const auto views =
        cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr, kDist, 0.0, 0);
    const auto result = cam::calibrate_planar(views);

    CHECK(std::abs(result.intrinsics.fx - kIntr.fx) / kIntr.fx < 1e-6);
    CHECK(std::abs(result.intrinsics.fy - kIntr.fy) / kIntr.fy < 1e-6);
    CHECK(std::abs(result.intrinsics.cx - kIntr.cx) / kIntr.cx < 1e-6);
    CHECK(std::abs(result.intrinsics.cy - kIntr.cy) / kIntr.cy < 1e-6);
    CHECK(result.rms_reprojection < 1e-6);

    // Stored rms equals an independent recomputation.
    CHECK(result.rms_reprojection ==
          doctest::Approx(cam::reprojection_error(result, views)).epsilon(1e-12));
}

TEST_CASE("calibration error paths") {
    const auto poses = cam::default_target_poses(2);
    const auto views =
        cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr, kDist, 0.0, 0);
    CHECK_THROWS_AS(cam::calibrate_planar(views), std::invalid_argument);

    // All boards parallel (pure translations): degenerate for Zhang.
    std::vector<geom::RigidTransform> parallel;
    for (int i = 0; i < 6; ++i) {
        parallel.push_back(geom::RigidTransform::translate(0.02 * i, -0.01 * i, 0.8 + 0.1 * i));
    }
    const auto flat_views =
        cam::synthesize_target_views(cam::PlanarTarget{}, parallel, kIntr, Distortion{});
    CHECK_THROWS_AS(cam::calibrate_planar(flat_views), std::invalid_argument);
}

TEST_CASE("noisy calibration passes the published acceptance gate") {
    const auto poses = cam::default_target_poses(20);
    const auto views =
        cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr, kDist, 0.5, 77);
    const auto result = cam::calibrate_planar(views);
    CHECK(result.rms_reprojection <= 1.5);
    CHECK(result.rms_reprojection > 0.0);
}

TEST_CASE("noise never improves the rms (one-sided, over seeds)") {
    const auto poses = cam::default_target_poses(12);
    double previous_mean = -1.0;
    for (const double noise : {0.0, 0.25, 0.5}) {
        double mean = 0.0;
        for (const std::uint64_t seed : {11ull, 22ull, 33ull}) {
            const auto views = cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr,
                                                            kDist, noise, seed);
            mean += cam::calibrate_planar(views).rms_reprojection;
        }
        mean /= 3.0;
        CHECK(mean >= previous_mean);
        previous_mean = mean;
    }
}

TEST_CASE("reprojection error definition") {
    // One residual of 3 px among N otherwise perfect points -> sqrt(9/N).
    const auto poses = cam::default_target_poses(3);
    auto views = cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr, kDist);
    cam::CalibrationResult truth;
    truth.intrinsics = kIntr;
    truth.distortion = kDist;
    truth.extrinsics = poses;
    CHECK(cam::reprojection_error(truth, views) == doctest::Approx(0.0));

    views[0].pixels[0].x() += 3.0;
    const double n = 3.0 * 54.0;
    CHECK(cam::reprojection_error(truth, views) == doctest::Approx(std::sqrt(9.0 / n)));

    views.pop_back();
    CHECK_THROWS_AS(cam::reprojection_error(truth, views), std::invalid_argument);
}

TEST_CASE("calibration result serialization round-trip") {
    const auto poses = cam::default_target_poses(4);
    const auto views = cam::synthesize_target_views(cam::PlanarTarget{}, poses, kIntr, kDist);
    const auto result = cam::calibrate_planar(views);

    std::stringstream buffer;
    cam::write_calibration(buffer, result);
    const auto back = cam::read_calibration(buffer);
    CHECK(back.intrinsics.fx == doctest::Approx(result.intrinsics.fx).epsilon(1e-14));
    CHECK(back.distortion.p2 == doctest::Approx(result.distortion.p2).epsilon(1e-14));
    CHECK(back.rms_reprojection == doctest::Approx(result.rms_reprojection).epsilon(1e-14));
    REQUIRE(back.extrinsics.size() == result.extrinsics.size());
    CHECK((back.extrinsics[2].matrix() - result.extrinsics[2].matrix()).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("published stereo rig figures parse verbatim but fail strict rigidity") {
    std::ifstream in(AGGSORT_DATA_DIR "/gemini_section51.rig");
    REQUIRE(in.good());
    // The printed rotation block is garbled (row2.row3 ~ -0.01): strict 1e-3
    // ingestion must reject it.
    CHECK_THROWS_AS(cam::read_stereo_rig(in, 1e-3), std::invalid_argument);

    std::ifstream again(AGGSORT_DATA_DIR "/gemini_section51.rig");
    const auto rig = cam::read_stereo_rig(again, 5e-2);
    CHECK(rig.left.fx == 22.9741);
    CHECK(rig.left.cy == 430.6781);
    CHECK(rig.left_dist.k1 == -0.0000716);
    CHECK(rig.right_dist.p2 == -0.000252);
    CHECK(rig.rotation(2, 1) == -0.0120);
    CHECK(rig.translation.y() == doctest::Approx(0.1212709));
    CHECK(rig.baseline == doctest::Approx(0.12148).epsilon(1e-3));

    geom::Mat4 rot4 = geom::Mat4::Identity();
    rot4.topLeftCorner<3, 3>() = rig.rotation;
    const auto report = geom::validate_rigid(rot4, 1e-3);
    CHECK_FALSE(report.passed);
    CHECK(report.orthonormality > 5e-3);

    std::stringstream buffer;
    cam::write_stereo_rig(buffer, rig);
    const auto back = cam::read_stereo_rig(buffer, 5e-2);
    CHECK(back.right.fx == rig.right.fx);
    CHECK(back.translation.x() == doctest::Approx(rig.translation.x()).epsilon(1e-14));
}
