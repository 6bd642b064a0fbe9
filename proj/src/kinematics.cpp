// SPDX-License-Identifier: Apache-2.0

#include "aggsort/kinematics.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace aggsort::kin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

double wrap_angle(double angle) {
    double a = std::fmod(angle, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    } else if (a > kPi) {
        a -= 2.0 * kPi;
    }
    return a;
}

JointLimits JointLimits::symmetric(double bound) {
    JointLimits limits{};
    limits.lower.fill(-bound);
    limits.upper.fill(bound);
    return limits;
}

DhChain::DhChain() : DhChain(jetarm()) {}

DhChain::DhChain(const std::array<DhRow, kJointCount>& rows, const JointLimits& limits)
    : rows_(rows), limits_(limits) {
    for (const DhRow& row : rows_) {
        if (!std::isfinite(row.theta_offset) || !std::isfinite(row.d) ||
            !std::isfinite(row.a) || !std::isfinite(row.alpha)) {
            throw std::invalid_argument("DH row contains non-finite values");
        }
        if (row.a < 0.0 || row.d < 0.0) {
            throw std::invalid_argument("DH link lengths a, d must be >= 0 for this arm");
        }
    }
}

DhChain DhChain::jetarm() {
    std::array<DhRow, kJointCount> rows{};
    rows[1].alpha = -90.0 * kDegToRad;
    rows[2].a = 0.1294;
    rows[3].a = 0.1294;
    rows[4].alpha = -90.0 * kDegToRad;
    return {rows, JointLimits::symmetric(kPi)};
}

DhChain DhChain::from_stream(std::istream& in) {
    std::array<DhRow, kJointCount> rows{};
    std::size_t count = 0;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (count >= kJointCount) {
            throw std::invalid_argument("DH config has more than 5 rows");
        }
        std::istringstream fields(line);
        double theta_offset_deg, d_m, a_m, alpha_deg;
        if (!(fields >> theta_offset_deg >> d_m >> a_m >> alpha_deg)) {
            throw std::invalid_argument("DH row needs 4 fields: " + line);
        }
        rows[count] = DhRow{theta_offset_deg * kDegToRad, d_m, a_m, alpha_deg * kDegToRad};
        ++count;
    }
    if (count != kJointCount) {
        throw std::invalid_argument("DH config needs exactly 5 rows");
    }
    return {rows, JointLimits::symmetric(kPi)};
}

std::optional<DhChain> DhChain::builtin_profile(const std::string& name) {
    if (name == "jetarm") return jetarm();
    return std::nullopt;
}

bool DhChain::within_limits(const JointVector& q) const {
    for (std::size_t i = 0; i < kJointCount; ++i) {
        if (q[i] < limits_.lower[i] || q[i] > limits_.upper[i]) return false;
    }
    return true;
}

bool DhChain::has_jetarm_alpha_pattern() const {
    constexpr double tol = 1e-12;
    const double half_pi = kPi / 2.0;
    return std::abs(rows_[0].alpha) <= tol && std::abs(rows_[1].alpha + half_pi) <= tol &&
           std::abs(rows_[2].alpha) <= tol && std::abs(rows_[3].alpha) <= tol &&
           std::abs(rows_[4].alpha + half_pi) <= tol;
}

geom::RigidTransform dh_link_transform(const DhRow& row, double theta) {
    const double t = theta + row.theta_offset;
    const double ct = std::cos(t), st = std::sin(t);
    const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);

    geom::Mat3 r;
    r << ct, -st, 0.0,
         st * ca, ct * ca, -sa,
         st * sa, ct * sa, ca;
    const geom::Vec3 p(row.a, -sa * row.d, ca * row.d);
    return {r, p};
}

geom::RigidTransform forward_kinematics(const DhChain& chain, const JointVector& q) {
    if (!chain.within_limits(q)) {
        throw std::out_of_range("joint vector violates joint limits");
    }
    geom::RigidTransform t;
    for (std::size_t i = 0; i < DhChain::kJointCount; ++i) {
        t = t * dh_link_transform(chain.rows()[i], q[i]);
    }
    return t;
}

geom::Vec3 closed_form_position(const DhChain& chain, const JointVector& q) {
    if (!chain.has_jetarm_alpha_pattern()) {
        throw std::invalid_argument(
            "closed-form position requires the (0, -90, 0, 0, -90) alpha pattern");
    }
    const auto& rows = chain.rows();
    const double t1 = q[0] + rows[0].theta_offset;
    const double t2 = q[1] + rows[1].theta_offset;
    const double t3 = q[2] + rows[2].theta_offset;
    const double t4 = q[3] + rows[3].theta_offset;

    const double c1 = std::cos(t1), s1 = std::sin(t1);
    const double c2 = std::cos(t2), s2 = std::sin(t2);
    const double c23 = std::cos(t2 + t3), s23 = std::sin(t2 + t3);
    const double c234 = std::cos(t2 + t3 + t4), s234 = std::sin(t2 + t3 + t4);

    const double a2 = rows[1].a, a3 = rows[2].a, a4 = rows[3].a, a5 = rows[4].a;
    const double d5 = rows[4].d;
    const double h = rows[1].d + rows[2].d + rows[3].d;

    const double radius = a2 + c2 * a3 + c23 * a4 + c234 * a5 - s234 * d5;
    const double drop = s2 * a3 + s23 * a4 + s234 * a5 + c234 * d5;

    return {rows[0].a + c1 * radius - s1 * h,
            s1 * radius + c1 * h,
            rows[0].d - drop};
}

namespace {

struct OrientationDecomp {
    bool feasible = false;
    bool pinned = false;   // u and w fully determined by the rotation
    bool sum_mode = false; // delta = u + w (phi0 near pi) instead of u - w
    double delta = 0.0;
    double u = 0.0;
    double w = 0.0;
};

// Wrist rotation block for the jetarm alpha pattern:
// RotX(-90) RotZ(phi) RotX(-90) = [c, 0, -s; 0, -1, 0; -s, 0, -c].
geom::Mat3 wrist_block(double phi) {
    geom::Mat3 m;
    const double c = std::cos(phi), s = std::sin(phi);
    m << c, 0.0, -s,
         0.0, -1.0, 0.0,
         -s, 0.0, -c;
    return m;
}

OrientationDecomp decompose_orientation(const geom::Mat3& r, double phi0, double tol) {
    OrientationDecomp out;
    const double sp = std::sin(phi0), cp = std::cos(phi0);

    if (std::abs(sp) > 1e-9) {
        out.pinned = true;
        out.u = std::atan2(-r(1, 2) / sp, -r(0, 2) / sp);
        out.w = std::atan2(r(2, 1) / sp, -r(2, 0) / sp);
        const geom::Mat3 candidate =
            Eigen::AngleAxisd(out.u, geom::Vec3::UnitZ()).toRotationMatrix() * wrist_block(phi0) *
            Eigen::AngleAxisd(out.w, geom::Vec3::UnitZ()).toRotationMatrix();
        out.feasible = (r - candidate).cwiseAbs().maxCoeff() <= tol;
        return out;
    }

    // sin(phi0) ~ 0: only a combination of u and w is fixed by the rotation.
    if (cp > 0.0) {
        // R = Rz(u - w) * diag(1, -1, -1)
        const geom::Mat3 zrot = r * geom::Mat3(geom::Vec3(1.0, -1.0, -1.0).asDiagonal());
        const double residual =
            std::max({std::abs(zrot(0, 2)), std::abs(zrot(1, 2)), std::abs(zrot(2, 0)),
                      std::abs(zrot(2, 1)), std::abs(zrot(2, 2) - 1.0),
                      std::abs(zrot(0, 0) - zrot(1, 1)), std::abs(zrot(0, 1) + zrot(1, 0))});
        out.feasible = residual <= tol;
        out.delta = std::atan2(zrot(1, 0), zrot(0, 0));
    } else {
        // R = Rz(u + w + pi)
        const double residual =
            std::max({std::abs(r(0, 2)), std::abs(r(1, 2)), std::abs(r(2, 0)),
                      std::abs(r(2, 1)), std::abs(r(2, 2) - 1.0),
                      std::abs(r(0, 0) - r(1, 1)), std::abs(r(0, 1) + r(1, 0))});
        out.feasible = residual <= tol;
        out.sum_mode = true;
        out.delta = std::atan2(r(1, 0), r(0, 0)) - kPi;  // u + w
    }
    return out;
}

}  // namespace

IkSolutionSet inverse_kinematics(const DhChain& chain, const geom::RigidTransform& target,
                                 const IkOptions& options) {
    if (!chain.has_jetarm_alpha_pattern()) {
        throw std::invalid_argument(
            "analytic IK requires the (0, -90, 0, 0, -90) alpha pattern");
    }
    const auto& rows = chain.rows();
    const double a3 = rows[2].a, a4 = rows[3].a;
    if (a3 <= 0.0 || a4 <= 0.0) {
        throw std::invalid_argument("analytic IK requires nonzero a3 and a4 link lengths");
    }

    IkSolutionSet set;
    const double phi0 = rows[1].theta_offset + rows[2].theta_offset + rows[3].theta_offset;
    const OrientationDecomp orient =
        decompose_orientation(target.rotation(), phi0, options.orientation_tol);
    if (!orient.feasible) {
        set.failure = IkFailure::OrientationInfeasible;
        return set;
    }

    const double sp = std::sin(phi0), cp = std::cos(phi0);
    const geom::Vec3 p = target.translation();
    const double qx = p.x() - rows[0].a;
    const double qy = p.y();
    const double h = rows[1].d + rows[2].d + rows[3].d;

    // Candidate (u, r): u is the joint-1 rotation, r the signed planar radius.
    std::vector<std::pair<double, double>> base_candidates;
    if (orient.pinned) {
        const double u = orient.u;
        base_candidates.emplace_back(u, std::cos(u) * qx + std::sin(u) * qy);
    } else {
        const double rho2 = qx * qx + qy * qy - h * h;
        if (qx * qx + qy * qy < 1e-24 && std::abs(h) < 1e-12) {
            // Wrist over the base axis: theta1 is undefined; fall back to the
            // reference (or zero).
            const double theta1 = options.reference ? (*options.reference)[0] : 0.0;
            base_candidates.emplace_back(theta1 + rows[0].theta_offset, 0.0);
        } else if (rho2 >= -1e-18) {
            const double r0 = std::sqrt(std::max(0.0, rho2));
            const double bearing = std::atan2(qy, qx);
            base_candidates.emplace_back(bearing - std::atan2(h, r0), r0);
            if (r0 > 1e-12) {
                base_candidates.emplace_back(bearing - std::atan2(h, -r0), -r0);
            }
        }
        // rho2 < 0 means no joint-1 angle fits the radial geometry; fall
        // through with no candidates -> OutOfReach.
    }

    for (const auto& [u, r] : base_candidates) {
        const double u2 = r - rows[1].a - cp * rows[4].a + sp * rows[4].d;
        const double v2 = (rows[0].d - p.z()) - sp * rows[4].a - cp * rows[4].d;
        const double reach2 = u2 * u2 + v2 * v2;
        double cos_elbow = (reach2 - a3 * a3 - a4 * a4) / (2.0 * a3 * a4);
        if (cos_elbow > 1.0 + 1e-9 || cos_elbow < -1.0 - 1e-9) continue;
        // Snap the stretched/folded boundary: acos near +-1 would turn
        // last-bit roundoff into ~1e-8 of joint angle.
        if (cos_elbow > 1.0 - 1e-14) cos_elbow = 1.0;
        if (cos_elbow < -1.0 + 1e-14) cos_elbow = -1.0;

        for (const int elbow : {+1, -1}) {
            const double big_t3 = elbow * std::acos(cos_elbow);
            const double big_t2 = std::atan2(v2, u2) -
                                  std::atan2(a4 * std::sin(big_t3), a3 + a4 * std::cos(big_t3));

            JointVector q{};
            q[0] = wrap_angle(u - rows[0].theta_offset);
            q[1] = wrap_angle(big_t2 - rows[1].theta_offset);
            q[2] = wrap_angle(big_t3 - rows[2].theta_offset);
            // Eq.-4.9 structural constraint, kept exact (unwrapped); the joint
            // limit filter below rejects it when it falls outside the range.
            q[3] = -(q[1] + q[2]);

            double w = 0.0;
            if (orient.pinned) {
                w = orient.w;
            } else if (orient.sum_mode) {
                w = orient.delta - u;
            } else {
                w = u - orient.delta;
            }
            q[4] = wrap_angle(w - rows[4].theta_offset);

            if (!chain.within_limits(q)) continue;
            const geom::RigidTransform fk = forward_kinematics(chain, q);
            const double pos_err = (fk.translation() - p).norm();
            const double rot_err = geom::rotation_distance(fk.rotation(), target.rotation());
            if (pos_err > options.verify_tol || rot_err > options.verify_tol) continue;

            bool duplicate = false;
            for (const IkSolution& existing : set.solutions) {
                bool same = true;
                for (std::size_t i = 0; i < DhChain::kJointCount; ++i) {
                    if (std::abs(existing.q[i] - q[i]) > 1e-9) {
                        same = false;
                        break;
                    }
                }
                if (same) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) set.solutions.push_back(IkSolution{q, elbow});
        }
    }

    if (set.solutions.empty()) set.failure = IkFailure::OutOfReach;
    return set;
}

JointVector select_solution(const IkSolutionSet& set, const JointVector& reference,
                            const std::array<double, 5>& weights) {
    if (set.empty()) {
        throw std::invalid_argument("select_solution: empty solution set");
    }
    const IkSolution* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const IkSolution& candidate : set.solutions) {
        double dist = 0.0;
        for (std::size_t i = 0; i < DhChain::kJointCount; ++i) {
            const double diff = wrap_angle(candidate.q[i] - reference[i]);
            dist += weights[i] * diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = &candidate;
        }
    }
    return best->q;
}

}  // namespace aggsort::kin
