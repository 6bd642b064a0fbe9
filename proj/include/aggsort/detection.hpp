// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/camera.hpp"
#include "aggsort/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace aggsort::detect {

/// One detection: reported class, confidence, axis-aligned pixel box.
struct Detection {
    int class_index = 0;
    double confidence = 1.0;
    double x1 = 0.0, y1 = 0.0;
    double x2 = 0.0, y2 = 0.0;

    Eigen::Vector2d center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
};

/// Row-stochastic confusion matrix (rows = true class, columns = reported).
class ConfusionSpec {
  public:
    ConfusionSpec() : matrix_(Eigen::MatrixXd::Identity(1, 1)) {}
    static ConfusionSpec identity(int classes);
    explicit ConfusionSpec(Eigen::MatrixXd matrix);  ///< validates stochasticity
    /// Plain-text matrix, one row per line; '#' comments allowed.
    static ConfusionSpec from_stream(std::istream& in);

    int classes() const { return static_cast<int>(matrix_.rows()); }
    double mass(int true_class, int reported) const { return matrix_(true_class, reported); }
    int sample_reported(int true_class, std::uint64_t seed) const;

  private:
    Eigen::MatrixXd matrix_;
};

/// Silhouette of one scene object handed to the oracle: its true class and
/// corner points in the camera frame.
struct AggregateView {
    int id = 0;
    int true_class = 0;
    std::vector<geom::Vec3> corners_cam;
};

struct ViewGeometry {
    cam::Intrinsics intrinsics;
    cam::Distortion distortion;
    int image_width = 1280;
    int image_height = 800;
};

struct OracleOptions {
    double box_noise_px = 1.0;  ///< per-edge dilation amplitude; 0 = exact
};

/// Ground-truth detector standing in for the trained network: one detection
/// per visible aggregate, box = tight bound of the projected corners plus
/// seeded noise, class drawn from the confusion row of the true class,
/// confidence = probability mass of the reported class. Objects behind the
/// camera or fully outside the image are absent. Deterministic per seed.
std::vector<Detection> detect(const std::vector<AggregateView>& views,
                              const ViewGeometry& geometry, const ConfusionSpec& confusion,
                              std::uint64_t seed, const OracleOptions& options = {});

}  // namespace aggsort::detect
