// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sizing.hpp"

#include <cmath>
#include <stdexcept>

namespace aggsort::sizing {

MerDimensions mer_dimensions(const Eigen::Vector2d& corner1, const Eigen::Vector2d& corner2) {
    MerDimensions dims;
    dims.a = std::abs(corner1.y() - corner2.y());
    dims.b = std::abs(corner1.x() - corner2.x());
    dims.c = std::hypot(dims.a, dims.b);
    return dims;
}

double pixel_to_metric(double length_px, double depth_m, double fx_px) {
    if (!(depth_m > 0.0)) throw std::domain_error("pixel_to_metric: depth must be positive");
    if (!(fx_px > 0.0)) throw std::domain_error("pixel_to_metric: focal must be positive");
    return length_px * depth_m / fx_px;
}

Grade grade(double diagonal_cm, const GradeBands& bands) {
    if (diagonal_cm < 0.0) throw std::domain_error("grade: diagonal must be >= 0");
    Grade g;
    if (diagonal_cm < bands.reject_below) {
        g.value = GradeValue::Rejected;
    } else if (diagonal_cm < bands.band2) {
        g.value = GradeValue::G1;
    } else if (diagonal_cm < bands.band3) {
        g.value = GradeValue::G2;
    } else {
        g.value = GradeValue::G3;
    }
    g.oversize = diagonal_cm > bands.oversize;
    return g;
}

}  // namespace aggsort::sizing
