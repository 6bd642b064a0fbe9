// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace aggsort::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Per-check residuals of the rigidity validation on a 4x4 homogeneous matrix.
struct RigidityReport {
    double orthonormality = 0.0;  ///< max of |row norm - 1| and |row_i . row_j|, i != j
    double determinant = 0.0;     ///< |det(R) - 1|
    double bottom_row = 0.0;      ///< max deviation from (0, 0, 0, 1)
    double tolerance = 0.0;
    bool passed = false;
};

/// Checks orthonormality, determinant and bottom-row exactness of `m`.
/// Always returns a report; never throws.
RigidityReport validate_rigid(const Mat4& m, double tol);

/// Rotation + translation, stored as a 3x3 matrix and a vector, viewed
/// homogeneously as a 4x4 with bottom row (0,0,0,1). Immutable value type.
class RigidTransform {
  public:
    RigidTransform() : rot_(Mat3::Identity()), trans_(Vec3::Zero()) {}
    RigidTransform(const Mat3& rotation, const Vec3& translation)
        : rot_(rotation), trans_(translation) {}

    static RigidTransform identity() { return {}; }
    static RigidTransform rot_x(double angle);
    static RigidTransform rot_y(double angle);
    static RigidTransform rot_z(double angle);
    static RigidTransform translate(double x, double y, double z);
    static RigidTransform translate(const Vec3& t) { return {Mat3::Identity(), t}; }

    /// Builds from a 4x4 matrix, validating rigidity at `tol`.
    /// Throws std::invalid_argument when the validation fails.
    static RigidTransform from_matrix(const Mat4& m, double tol = 1e-9);

    const Mat3& rotation() const { return rot_; }
    const Vec3& translation() const { return trans_; }
    Mat4 matrix() const;

    /// Inverse transform: rotation R^T, translation -R^T t.
    RigidTransform inverse() const;

    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
        return {a.rot_ * b.rot_, a.rot_ * b.trans_ + a.trans_};
    }

    /// Maps a point: R p + t.
    Vec3 operator*(const Vec3& p) const { return rot_ * p + trans_; }

  private:
    Mat3 rot_;
    Vec3 trans_;
};

inline RigidTransform compose(const RigidTransform& first, const RigidTransform& second) {
    return first * second;
}

inline RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t * p; }

/// Geodesic distance on SO(3) between two rotations, in radians.
double rotation_distance(const Mat3& a, const Mat3& b);

Mat3 skew(const Vec3& v);

// Serialization: 16 decimal numbers, row-major, whitespace-separated,
// one transform per line.
std::string to_line(const RigidTransform& t);
RigidTransform parse_line(const std::string& line, double tol = 1e-3);
std::vector<RigidTransform> read_transforms(std::istream& in, double tol = 1e-3);
void write_transforms(std::ostream& out, const std::vector<RigidTransform>& transforms);

}  // namespace aggsort::geom
