// SPDX-License-Identifier: Apache-2.0

#include "aggsort/detection.hpp"

#include <algorithm>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aggsort::detect {

ConfusionSpec ConfusionSpec::identity(int classes) {
    return ConfusionSpec(Eigen::MatrixXd::Identity(classes, classes));
}

ConfusionSpec::ConfusionSpec(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        throw std::invalid_argument("confusion matrix must be square");
    }
    for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < matrix_.cols(); ++c) {
            if (matrix_(r, c) < 0.0) {
                throw std::invalid_argument("confusion matrix entries must be >= 0");
            }
            sum += matrix_(r, c);
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("confusion matrix rows must sum to 1");
        }
    }
}

ConfusionSpec ConfusionSpec::from_stream(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::vector<double> row;
        double v;
        while (fields >> v) row.push_back(v);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("confusion matrix: empty file");
    const std::size_t n = rows.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) {
            throw std::invalid_argument("confusion matrix: ragged rows");
        }
        for (std::size_t c = 0; c < n; ++c) m(r, c) = rows[r][c];
    }
    return ConfusionSpec(std::move(m));
}

int ConfusionSpec::sample_reported(int true_class, std::uint64_t seed) const {
    if (true_class < 0 || true_class >= classes()) {
        throw std::out_of_range("confusion: class index out of range");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double draw = uni(rng);
    double cumulative = 0.0;
    for (int c = 0; c < classes(); ++c) {
        cumulative += matrix_(true_class, c);
        if (draw < cumulative) return c;
    }
    return classes() - 1;
}

namespace {

// splitmix64; decorrelates per-aggregate noise streams from one seed.
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<Detection> detect(const std::vector<AggregateView>& views,
                              const ViewGeometry& geometry, const ConfusionSpec& confusion,
                              std::uint64_t seed, const OracleOptions& options) {
    std::vector<Detection> detections;
    for (const AggregateView& view : views) {
        if (view.corners_cam.empty()) continue;
        bool in_front = true;
        for (const auto& corner : view.corners_cam) {
            if (!(corner.z() > 0.0)) {
                in_front = false;
                break;
            }
        }
        if (!in_front) continue;

        double x1 = std::numeric_limits<double>::infinity(), y1 = x1;
        double x2 = -x1, y2 = -y1;
        for (const auto& corner : view.corners_cam) {
            const cam::Pixel px = cam::project(geometry.intrinsics, geometry.distortion, corner);
            x1 = std::min(x1, px.x());
            y1 = std::min(y1, px.y());
            x2 = std::max(x2, px.x());
            y2 = std::max(y2, px.y());
        }
        if (x2 < 0.0 || y2 < 0.0 || x1 > geometry.image_width - 1.0 ||
            y1 > geometry.image_height - 1.0) {
            continue;  // fully outside the view
        }

        Detection det;
        det.x1 = x1;
        det.y1 = y1;
        det.x2 = x2;
        det.y2 = y2;
        if (options.box_noise_px > 0.0) {
            std::mt19937_64 rng(mix(seed ^ (0xD1B54A32D192ED03ull + view.id)));
            std::uniform_real_distribution<double> jitter(-options.box_noise_px,
                                                          options.box_noise_px);
            det.x1 += jitter(rng);
            det.y1 += jitter(rng);
            det.x2 += jitter(rng);
            det.y2 += jitter(rng);
            if (det.x2 < det.x1) std::swap(det.x1, det.x2);
            if (det.y2 < det.y1) std::swap(det.y1, det.y2);
        }
        det.class_index =
            confusion.sample_reported(view.true_class, mix(seed ^ (0xABCC77318CE03FA9ull + view.id)));
        det.confidence = confusion.mass(view.true_class, det.class_index);
        detections.push_back(det);
    }
    return detections;
}

}  // namespace aggsort::detect
