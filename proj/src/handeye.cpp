// SPDX-License-Identifier: Apache-2.0

#include "aggsort/handeye.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aggsort::handeye {

CameraToBaseResult camera_to_base(const geom::RigidTransform& t_ce,
                                  const geom::RigidTransform& t_eb, const CameraPoint& p_c) {
    CameraToBaseResult out;
    out.effector.p = t_ce.inverse() * p_c.p;
    out.base.p = t_eb.inverse() * out.effector.p;
    return out;
}

std::vector<MotionPair> collect_motion_pairs(
    const std::vector<geom::RigidTransform>& effector_poses,
    const std::vector<geom::RigidTransform>& camera_poses) {
    if (effector_poses.size() != camera_poses.size()) {
        throw std::invalid_argument("collect_motion_pairs: pose list length mismatch");
    }
    if (effector_poses.size() < 3) {
        throw std::invalid_argument("collect_motion_pairs: at least 3 poses required");
    }
    std::vector<MotionPair> pairs;
    pairs.reserve(effector_poses.size() - 1);
    for (std::size_t i = 0; i + 1 < effector_poses.size(); ++i) {
        MotionPair pair;
        pair.a = effector_poses[i + 1].inverse() * effector_poses[i];
        pair.b = camera_poses[i + 1].inverse() * camera_poses[i];
        const double angle_a = Eigen::AngleAxisd(pair.a.rotation()).angle();
        pair.informative = angle_a > 1e-10 || pair.a.translation().norm() > 1e-12;
        pairs.push_back(pair);
    }
    return pairs;
}

namespace {

// Modified Rodrigues vector used by the Tsai-Lenz linearization:
// p = 2 sin(theta/2) * axis.
geom::Vec3 tsai_vector(const geom::Mat3& r) {
    const Eigen::AngleAxisd aa(r);
    return 2.0 * std::sin(aa.angle() / 2.0) * aa.axis();
}

}  // namespace

HandEyeSolution solve_hand_eye(const std::vector<MotionPair>& pairs) {
    std::vector<const MotionPair*> informative;
    for (const auto& pair : pairs) {
        const double angle = Eigen::AngleAxisd(pair.a.rotation()).angle();
        if (angle > 1e-8) informative.push_back(&pair);
    }
    if (informative.size() < 2) {
        throw std::invalid_argument(
            "solve_hand_eye: fewer than 2 pairs with non-trivial rotation (underdetermined)");
    }

    const auto n = static_cast<Eigen::Index>(informative.size());

    // Rotation: skew(p_a + p_b) p' = p_b - p_a, stacked.
    Eigen::MatrixXd lhs(3 * n, 3);
    Eigen::VectorXd rhs(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const geom::Vec3 pa = tsai_vector(informative[i]->a.rotation());
        const geom::Vec3 pb = tsai_vector(informative[i]->b.rotation());
        lhs.block<3, 3>(3 * i, 0) = geom::skew(pa + pb);
        rhs.segment<3>(3 * i) = pb - pa;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> rot_svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    {
        const auto& sigma = rot_svd.singularValues();
        if (sigma(0) <= 0.0 || sigma(2) / sigma(0) < 1e-9) {
            std::ostringstream msg;
            msg << "solve_hand_eye: degenerate rotation system (parallel rotation axes), "
                << "rank " << (sigma(2) / std::max(sigma(0), 1e-300) < 1e-9 ? 2 : 3)
                << " of 3, singular values " << sigma.transpose();
            throw std::runtime_error(msg.str());
        }
    }
    const geom::Vec3 p_prime = rot_svd.solve(rhs);
    const geom::Vec3 p_x = 2.0 * p_prime / std::sqrt(1.0 + p_prime.squaredNorm());
    const double norm2 = p_x.squaredNorm();
    const geom::Mat3 r_x = (1.0 - norm2 / 2.0) * geom::Mat3::Identity() +
                           0.5 * (p_x * p_x.transpose() +
                                  std::sqrt(4.0 - norm2) * geom::skew(p_x));

    // Translation: (R_A - I) t_X = R_X t_B - t_A, stacked.
    Eigen::MatrixXd t_lhs(3 * n, 3);
    Eigen::VectorXd t_rhs(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t_lhs.block<3, 3>(3 * i, 0) =
            informative[i]->a.rotation() - geom::Mat3::Identity();
        t_rhs.segment<3>(3 * i) =
            r_x * informative[i]->b.translation() - informative[i]->a.translation();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> t_svd(t_lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    {
        const auto& sigma = t_svd.singularValues();
        if (sigma(0) <= 0.0 || sigma(2) / sigma(0) < 1e-9) {
            throw std::runtime_error(
                "solve_hand_eye: translation system rank-deficient (parallel rotation axes)");
        }
    }
    const geom::Vec3 t_x = t_svd.solve(t_rhs);

    HandEyeSolution solution;
    solution.t_ce = geom::RigidTransform(r_x, t_x);

    double rot_sq = 0.0, trans_sq = 0.0;
    for (const auto& pair : pairs) {
        const geom::RigidTransform lhs_t = pair.a * solution.t_ce;
        const geom::RigidTransform rhs_t = solution.t_ce * pair.b;
        const double rot_res = geom::rotation_distance(lhs_t.rotation(), rhs_t.rotation());
        const double trans_res = (lhs_t.translation() - rhs_t.translation()).norm();
        solution.max_rotation_residual = std::max(solution.max_rotation_residual, rot_res);
        solution.max_translation_residual =
            std::max(solution.max_translation_residual, trans_res);
        rot_sq += rot_res * rot_res;
        trans_sq += trans_res * trans_res;
    }
    const double count = static_cast<double>(pairs.size());
    solution.rms_rotation_residual = std::sqrt(rot_sq / count);
    solution.rms_translation_residual = std::sqrt(trans_sq / count);
    return solution;
}

}  // namespace aggsort::handeye
