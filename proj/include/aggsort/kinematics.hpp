// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/geometry.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aggsort::kin {

/// One row of the DH table. Following the modified (Craig) convention of the
/// link transform
///   T_i = RotX(alpha) * TransX(a) * RotZ(theta_offset + theta_i) * TransZ(d),
/// row i's (a, alpha) occupy the (a_{i-1}, alpha_{i-1}) slots of transform i.
struct DhRow {
    double theta_offset = 0.0;  ///< rad
    double d = 0.0;             ///< m
    double a = 0.0;             ///< m
    double alpha = 0.0;         ///< rad
};

/// Joint configuration of the 5-revolute-joint arm, radians.
using JointVector = std::array<double, 5>;

struct JointLimits {
    std::array<double, 5> lower;
    std::array<double, 5> upper;
    static JointLimits symmetric(double bound);  // [-bound, +bound] per joint
};

/// 5-row DH parameter table plus joint limits. The gripper servo is not a
/// kinematic joint and has no row.
class DhChain {
  public:
    static constexpr std::size_t kJointCount = 5;

    /// Default-constructs the "jetarm" profile (a3 = a4 = 0.1294 m,
    /// alpha = 0, -90deg, 0, 0, -90deg, everything else zero).
    DhChain();
    DhChain(const std::array<DhRow, kJointCount>& rows, const JointLimits& limits);

    static DhChain jetarm();

    /// Loads from a plain-text config: one row per line,
    /// "theta_offset_deg d_m a_m alpha_deg". Lines starting with '#' skipped.
    static DhChain from_stream(std::istream& in);

    /// Resolves a named built-in profile ("jetarm") or returns nullopt.
    static std::optional<DhChain> builtin_profile(const std::string& name);

    const std::array<DhRow, kJointCount>& rows() const { return rows_; }
    const JointLimits& limits() const { return limits_; }
    bool within_limits(const JointVector& q) const;

    /// True when the alpha pattern matches the jetarm layout
    /// (0, -90deg, 0, 0, -90deg) within 1e-12; the closed-form FK position and
    /// the analytic IK require it.
    bool has_jetarm_alpha_pattern() const;

  private:
    std::array<DhRow, kJointCount> rows_;
    JointLimits limits_;
};

/// Link transform of Eq.-style modified DH for one row at joint angle `theta`.
geom::RigidTransform dh_link_transform(const DhRow& row, double theta);

/// Chain product of the five link transforms.
/// Throws std::out_of_range when q violates the chain's joint limits.
geom::RigidTransform forward_kinematics(const DhChain& chain, const JointVector& q);

/// Closed-form end-effector position, derived symbolically for chains with
/// the jetarm alpha pattern. Independent of the chain-product code path.
/// Throws std::invalid_argument for other alpha patterns.
geom::Vec3 closed_form_position(const DhChain& chain, const JointVector& q);

enum class IkFailure { None, OutOfReach, OrientationInfeasible };

struct IkSolution {
    JointVector q;
    int elbow;  ///< +1 / -1 branch of the +-arccos in theta3
};

struct IkSolutionSet {
    std::vector<IkSolution> solutions;
    IkFailure failure = IkFailure::None;  ///< reason when `solutions` is empty
    bool empty() const { return solutions.empty(); }
};

struct IkOptions {
    /// Joint angles of the current configuration; used to resolve the theta1
    /// singularity (wrist over the base axis) and nothing else.
    std::optional<JointVector> reference;
    double orientation_tol = 1e-8;  ///< feasibility gate on the target rotation
    double verify_tol = 1e-9;       ///< FK round-trip acceptance, m and rad
};

/// Analytic inverse kinematics. The solver enforces theta4 = -(theta2+theta3)
/// (vertical approach axis), decouples theta1 from the position projection,
/// solves theta2/theta3 as a planar two-link problem, and takes theta5 from
/// the orientation residual. Returns all base/elbow branches that reproduce
/// the target within `verify_tol`; an empty set carries a failure reason.
IkSolutionSet inverse_kinematics(const DhChain& chain, const geom::RigidTransform& target,
                                 const IkOptions& options = {});

/// Member of `set` minimizing the weighted squared wrapped joint distance to
/// `reference`. Throws std::invalid_argument on an empty set.
JointVector select_solution(const IkSolutionSet& set, const JointVector& reference,
                            const std::array<double, 5>& weights = {1, 1, 1, 1, 1});

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace aggsort::kin
