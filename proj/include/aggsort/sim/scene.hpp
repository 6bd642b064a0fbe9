// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/dataset.hpp"
#include "aggsort/geometry.hpp"
#include "aggsort/sim/config.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace aggsort::sim {

/// Report/bin ordering used throughout: limestone, granite, sandstone, marble.
inline constexpr std::array<dataset::Lithology, 4> kReportOrder = {
    dataset::Lithology::Limestone, dataset::Lithology::Granite,
    dataset::Lithology::Sandstone, dataset::Lithology::Marble};

int report_index(dataset::Lithology lith);

/// One aggregate: a world-axis-aligned box resting on the work plane.
struct AggregateSpec {
    int id = 0;
    dataset::Lithology lithology = dataset::Lithology::Limestone;
    geom::Vec3 size_m = geom::Vec3::Zero();  ///< box edge triple
    geom::RigidTransform pose;               ///< centroid pose (identity rotation)

    geom::Vec3 centroid() const { return pose.translation(); }
    double top_z() const { return pose.translation().z() + size_m.z() / 2.0; }
    /// Top-face diagonal, the physical particle size the sieve bands grade.
    double footprint_diagonal_cm() const {
        return std::hypot(size_m.x(), size_m.y()) * 100.0;
    }
    int true_grade(const sizing::GradeBands& bands = {}) const;
};

struct Scene {
    std::vector<AggregateSpec> aggregates;
    double plane_z = -0.16;
    std::array<geom::Vec3, 4> bins{};  ///< per lithology, report order

    const AggregateSpec& by_id(int id) const;
};

/// Seeded, reproducible non-overlapping placement on the work plane; sizes
/// uniform in the configured range. Throws std::runtime_error when a count
/// cannot be placed without overlap after bounded retries, and
/// std::invalid_argument for size ranges outside [1, 4] cm.
Scene generate_scene(const SimConfig& config);

}  // namespace aggsort::sim
