// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace aggsort::sizing {

/// Axis-aligned enclosing-rectangle dimensions: a = vertical extent,
/// b = horizontal extent, c = diagonal. Unit follows the inputs.
struct MerDimensions {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// a = |y1 - y2|, b = |x1 - x2|, c = sqrt(a^2 + b^2). Symmetric under corner
/// swap and axis reflection.
MerDimensions mer_dimensions(const Eigen::Vector2d& corner1, const Eigen::Vector2d& corner2);

/// Fronto-parallel pinhole scaling: length_px * depth / fx.
/// Throws std::domain_error for non-positive depth or focal length.
double pixel_to_metric(double length_px, double depth_m, double fx_px);

/// Particle-size bands in centimeters; lower edges inclusive.
struct GradeBands {
    double reject_below = 1.0;
    double band2 = 2.0;
    double band3 = 3.0;
    double oversize = 4.0;  ///< flagged (not rejected) above this
};

enum class GradeValue { Rejected = 0, G1 = 1, G2 = 2, G3 = 3 };

struct Grade {
    GradeValue value = GradeValue::Rejected;
    bool oversize = false;

    bool rejected() const { return value == GradeValue::Rejected; }
};

/// Grades by the diagonal in centimeters: Rejected below 1, [1,2) -> 1,
/// [2,3) -> 2, >= 3 -> 3; above 4 cm additionally flagged oversize.
Grade grade(double diagonal_cm, const GradeBands& bands = {});

}  // namespace aggsort::sizing
