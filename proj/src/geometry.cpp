// SPDX-License-Identifier: Apache-2.0

#include "aggsort/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aggsort::geom {

RigidityReport validate_rigid(const Mat4& m, double tol) {
    RigidityReport report;
    report.tolerance = tol;

    const Mat3 r = m.topLeftCorner<3, 3>();
    double ortho = 0.0;
    for (int i = 0; i < 3; ++i) {
        ortho = std::max(ortho, std::abs(r.row(i).norm() - 1.0));
        for (int j = i + 1; j < 3; ++j) {
            ortho = std::max(ortho, std::abs(r.row(i).dot(r.row(j))));
        }
    }
    report.orthonormality = ortho;
    report.determinant = std::abs(r.determinant() - 1.0);

    const Eigen::RowVector4d bottom = m.row(3);
    const Eigen::RowVector4d expected(0.0, 0.0, 0.0, 1.0);
    report.bottom_row = (bottom - expected).cwiseAbs().maxCoeff();

    report.passed = report.orthonormality <= tol && report.determinant <= tol &&
                    report.bottom_row <= tol;
    return report;
}

RigidTransform RigidTransform::rot_x(double angle) {
    return {Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix(), Vec3::Zero()};
}

RigidTransform RigidTransform::rot_y(double angle) {
    return {Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix(), Vec3::Zero()};
}

RigidTransform RigidTransform::rot_z(double angle) {
    return {Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero()};
}

RigidTransform RigidTransform::translate(double x, double y, double z) {
    return {Mat3::Identity(), Vec3(x, y, z)};
}

RigidTransform RigidTransform::from_matrix(const Mat4& m, double tol) {
    const RigidityReport report = validate_rigid(m, tol);
    if (!report.passed) {
        std::ostringstream msg;
        msg << "matrix is not rigid at tol " << tol << " (orthonormality "
            << report.orthonormality << ", det " << report.determinant << ", bottom row "
            << report.bottom_row << ")";
        throw std::invalid_argument(msg.str());
    }
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Mat4 RigidTransform::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rot_;
    m.topRightCorner<3, 1>() = trans_;
    return m;
}

RigidTransform RigidTransform::inverse() const {
    const Mat3 rt = rot_.transpose();
    return {rt, -(rt * trans_)};
}

double rotation_distance(const Mat3& a, const Mat3& b) {
    // atan2 of the skew-part magnitude against the trace keeps full precision
    // near zero, where acos((tr-1)/2) bottoms out around 1e-8.
    const Mat3 rel = a * b.transpose();
    const Vec3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
    const double s = axis.norm() / 2.0;
    const double c = (rel.trace() - 1.0) / 2.0;
    return std::atan2(s, c);
}

Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return s;
}

std::string to_line(const RigidTransform& t) {
    const Mat4 m = t.matrix();
    std::ostringstream out;
    out.precision(17);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (r != 0 || c != 0) out << ' ';
            out << m(r, c);
        }
    }
    return out.str();
}

RigidTransform parse_line(const std::string& line, double tol) {
    std::istringstream in(line);
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (!(in >> m(r, c))) {
                throw std::invalid_argument("transform line needs 16 numbers: " + line);
            }
        }
    }
    double extra;
    if (in >> extra) {
        throw std::invalid_argument("transform line has more than 16 numbers: " + line);
    }
    return RigidTransform::from_matrix(m, tol);
}

std::vector<RigidTransform> read_transforms(std::istream& in, double tol) {
    std::vector<RigidTransform> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_line(line, tol));
    }
    return out;
}

void write_transforms(std::ostream& out, const std::vector<RigidTransform>& transforms) {
    for (const auto& t : transforms) out << to_line(t) << '\n';
}

}  // namespace aggsort::geom
