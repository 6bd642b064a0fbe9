// SPDX-License-Identifier: Apache-2.0
//
// Planar calibration: homography-based intrinsics initialization followed by
// joint nonlinear least-squares refinement (Levenberg damping) over
// intrinsics, distortion and per-view extrinsics.

#include "aggsort/camera.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aggsort::cam {

namespace {

using geom::Mat3;
using geom::Vec3;

Mat3 rodrigues(const Vec3& rvec) {
    const double angle = rvec.norm();
    if (angle < 1e-14) return Mat3::Identity();
    return Eigen::AngleAxisd(angle, rvec / angle).toRotationMatrix();
}

Vec3 rodrigues_inverse(const Mat3& r) {
    const Eigen::AngleAxisd aa(r);
    return aa.angle() * aa.axis();
}

struct Normalization {
    Mat3 transform;  // similarity mapping raw -> normalized
};

Normalization normalize_2d(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());
    const double scale = mean_dist > 1e-15 ? std::sqrt(2.0) / mean_dist : 1.0;

    Normalization n;
    n.transform << scale, 0.0, -scale * centroid.x(),
                   0.0, scale, -scale * centroid.y(),
                   0.0, 0.0, 1.0;
    return n;
}

// Direct linear transform homography: board plane (z = 0) to pixels.
Mat3 homography_dlt(const BoardView& view) {
    const std::size_t n = view.board_points.size();
    if (n < 4) throw std::invalid_argument("homography needs at least 4 points");

    std::vector<Eigen::Vector2d> board(n), image(n);
    for (std::size_t i = 0; i < n; ++i) {
        board[i] = view.board_points[i].head<2>();
        image[i] = view.pixels[i];
    }
    const Normalization nb = normalize_2d(board);
    const Normalization ni = normalize_2d(image);

    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d pb = nb.transform * board[i].homogeneous();
        const Eigen::Vector3d pi = ni.transform * image[i].homogeneous();
        const double x = pb.x(), y = pb.y();
        const double u = pi.x(), v = pi.y();
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y, -v;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const Eigen::VectorXd h = svd.matrixV().col(8);
    Mat3 hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    Mat3 result = ni.transform.inverse() * hn * nb.transform;
    if (std::abs(result(2, 2)) > 1e-15) result /= result(2, 2);
    return result;
}

Eigen::Matrix<double, 6, 1> zhang_constraint(const Mat3& h, int i, int j) {
    Eigen::Matrix<double, 6, 1> v;
    v << h(0, i) * h(0, j),
         h(0, i) * h(1, j) + h(1, i) * h(0, j),
         h(1, i) * h(1, j),
         h(2, i) * h(0, j) + h(0, i) * h(2, j),
         h(2, i) * h(1, j) + h(1, i) * h(2, j),
         h(2, i) * h(2, j);
    return v;
}

Intrinsics intrinsics_from_homographies(const std::vector<Mat3>& homographies) {
    const std::size_t n = homographies.size();
    Eigen::MatrixXd v(2 * n, 6);
    for (std::size_t k = 0; k < n; ++k) {
        v.row(2 * k) = zhang_constraint(homographies[k], 0, 1).transpose();
        v.row(2 * k + 1) =
            (zhang_constraint(homographies[k], 0, 0) - zhang_constraint(homographies[k], 1, 1))
                .transpose();
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    if (sigma(4) / sigma(0) < 1e-9) {
        throw std::invalid_argument(
            "calibrate_planar: degenerate homographies (boards all parallel)");
    }
    Eigen::VectorXd b = svd.matrixV().col(5);
    if (b(0) < 0.0) b = -b;

    const double b11 = b(0), b12 = b(1), b22 = b(2), b13 = b(3), b23 = b(4), b33 = b(5);
    const double denom = b11 * b22 - b12 * b12;
    if (b11 <= 0.0 || denom <= 0.0) {
        throw std::invalid_argument("calibrate_planar: intrinsic extraction failed");
    }
    const double v0 = (b12 * b13 - b11 * b23) / denom;
    const double lambda = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11;
    if (lambda <= 0.0) {
        throw std::invalid_argument("calibrate_planar: intrinsic extraction failed");
    }
    Intrinsics intr;
    intr.fx = std::sqrt(lambda / b11);
    intr.fy = std::sqrt(lambda * b11 / denom);
    intr.skew = -b12 * intr.fx * intr.fx * intr.fy / lambda;
    intr.cx = intr.skew * v0 / intr.fy - b13 * intr.fx * intr.fx / lambda;
    intr.cy = v0;
    return intr;
}

geom::RigidTransform extrinsics_from_homography(const Intrinsics& intr, const Mat3& h) {
    Mat3 k;
    k << intr.fx, intr.skew, intr.cx,
         0.0, intr.fy, intr.cy,
         0.0, 0.0, 1.0;
    const Mat3 k_inv = k.inverse();

    Vec3 r1 = k_inv * h.col(0);
    Vec3 r2 = k_inv * h.col(1);
    Vec3 t = k_inv * h.col(2);
    const double scale = 2.0 / (r1.norm() + r2.norm());
    r1 *= scale;
    r2 *= scale;
    t *= scale;
    if (t.z() < 0.0) {
        r1 = -r1;
        r2 = -r2;
        t = -t;
    }
    Mat3 r;
    r.col(0) = r1;
    r.col(1) = r2;
    r.col(2) = r1.cross(r2);
    const Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 ortho = svd.matrixU() * svd.matrixV().transpose();
    if (ortho.determinant() < 0.0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1.0;
        ortho = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return {ortho, t};
}

struct Problem {
    const std::vector<BoardView>* views;
    std::size_t residual_count;

    static constexpr int kIntrinsicParams = 9;  // fx fy cx cy skew k1 k2 p1 p2

    Eigen::VectorXd pack(const CalibrationResult& r) const {
        Eigen::VectorXd x(kIntrinsicParams + 6 * r.extrinsics.size());
        x << r.intrinsics.fx, r.intrinsics.fy, r.intrinsics.cx, r.intrinsics.cy,
            r.intrinsics.skew, r.distortion.k1, r.distortion.k2, r.distortion.p1,
            r.distortion.p2;
        for (std::size_t v = 0; v < r.extrinsics.size(); ++v) {
            x.segment<3>(kIntrinsicParams + 6 * v) =
                rodrigues_inverse(r.extrinsics[v].rotation());
            x.segment<3>(kIntrinsicParams + 6 * v + 3) = r.extrinsics[v].translation();
        }
        return x;
    }

    CalibrationResult unpack(const Eigen::VectorXd& x) const {
        CalibrationResult r;
        r.intrinsics = {x(0), x(1), x(2), x(3), x(4)};
        r.distortion = {x(5), x(6), x(7), x(8)};
        const std::size_t view_count = (x.size() - kIntrinsicParams) / 6;
        for (std::size_t v = 0; v < view_count; ++v) {
            r.extrinsics.emplace_back(rodrigues(x.segment<3>(kIntrinsicParams + 6 * v)),
                                      x.segment<3>(kIntrinsicParams + 6 * v + 3));
        }
        return r;
    }

    Eigen::VectorXd residuals(const Eigen::VectorXd& x) const {
        const CalibrationResult r = unpack(x);
        Eigen::VectorXd res(residual_count);
        std::size_t idx = 0;
        for (std::size_t v = 0; v < views->size(); ++v) {
            const auto& view = (*views)[v];
            for (std::size_t i = 0; i < view.board_points.size(); ++i) {
                const Vec3 p_cam = r.extrinsics[v] * view.board_points[i];
                Eigen::Vector2d predicted;
                if (p_cam.z() > 1e-9) {
                    predicted = project(r.intrinsics, r.distortion, p_cam);
                } else {
                    predicted = view.pixels[i] + Eigen::Vector2d(1e6, 1e6);
                }
                res(idx++) = predicted.x() - view.pixels[i].x();
                res(idx++) = predicted.y() - view.pixels[i].y();
            }
        }
        return res;
    }
};

Eigen::VectorXd levenberg_refine(const Problem& problem, Eigen::VectorXd x) {
    const auto n = x.size();
    Eigen::VectorXd r = problem.residuals(x);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    for (int iter = 0; iter < 200; ++iter) {
        // Central-difference Jacobian.
        Eigen::MatrixXd jac(r.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double h = 6e-6 * std::max(1e-2, std::abs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            jac.col(j) = (problem.residuals(xp) - problem.residuals(xm)) / (2.0 * h);
        }
        const Eigen::VectorXd gradient = jac.transpose() * r;
        if (gradient.cwiseAbs().maxCoeff() < 1e-14) break;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;

        bool accepted = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
            const Eigen::VectorXd x_new = x + delta;
            const Eigen::VectorXd r_new = problem.residuals(x_new);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                const double improvement = cost - cost_new;
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (improvement < 1e-20 * std::max(1.0, cost)) return x;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) break;
    }
    return x;
}

}  // namespace

CalibrationResult calibrate_planar(const std::vector<BoardView>& views) {
    if (views.size() < 3) {
        throw std::invalid_argument("calibrate_planar: at least 3 views required");
    }
    for (const auto& view : views) {
        if (view.board_points.size() != view.pixels.size() || view.board_points.size() < 4) {
            throw std::invalid_argument("calibrate_planar: malformed view");
        }
    }

    std::vector<Mat3> homographies;
    homographies.reserve(views.size());
    for (const auto& view : views) homographies.push_back(homography_dlt(view));

    CalibrationResult init;
    init.intrinsics = intrinsics_from_homographies(homographies);
    init.distortion = {};
    for (const auto& h : homographies) {
        init.extrinsics.push_back(extrinsics_from_homography(init.intrinsics, h));
    }

    std::size_t residual_count = 0;
    for (const auto& view : views) residual_count += 2 * view.board_points.size();
    Problem problem{&views, residual_count};

    const Eigen::VectorXd refined = levenberg_refine(problem, problem.pack(init));
    CalibrationResult result = problem.unpack(refined);
    result.rms_reprojection = reprojection_error(result, views);
    return result;
}

}  // namespace aggsort::cam
