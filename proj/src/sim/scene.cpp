// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sim/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aggsort::sim {

namespace {

constexpr double kReach = 0.2588;  // jetarm reach envelope, m

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

int report_index(dataset::Lithology lith) {
    for (int i = 0; i < 4; ++i) {
        if (kReportOrder[i] == lith) return i;
    }
    throw std::invalid_argument("unknown lithology");
}

int AggregateSpec::true_grade(const sizing::GradeBands& bands) const {
    const sizing::Grade g = sizing::grade(footprint_diagonal_cm(), bands);
    return static_cast<int>(g.value);
}

const AggregateSpec& Scene::by_id(int id) const {
    for (const auto& agg : aggregates) {
        if (agg.id == id) return agg;
    }
    throw std::out_of_range("scene: no aggregate with id " + std::to_string(id));
}

Scene generate_scene(const SimConfig& config) {
    if (config.size_min_cm < 1.0 || config.size_max_cm > 4.0 ||
        config.size_min_cm > config.size_max_cm) {
        throw std::invalid_argument("generate_scene: size range must lie within [1, 4] cm");
    }
    for (const int count : config.counts) {
        if (count < 0) throw std::invalid_argument("generate_scene: negative count");
    }

    const WorkspaceParams& ws = config.workspace;
    Scene scene;
    scene.plane_z = ws.plane_z;
    const std::array<double, 4> bin_angles_deg = {30.0, 110.0, 190.0, 270.0};
    for (int i = 0; i < 4; ++i) {
        const double angle = bin_angles_deg[i] * std::numbers::pi / 180.0;
        scene.bins[i] =
            geom::Vec3(ws.bin_radius * std::cos(angle), ws.bin_radius * std::sin(angle),
                       ws.plane_z);
        if (scene.bins[i].norm() > kReach) {
            throw std::invalid_argument("generate_scene: bin outside the arm's reach");
        }
    }

    std::mt19937_64 rng(mix(config.master_seed ^ 0x5CE4E5ull));  // "scene" stream
    std::uniform_real_distribution<double> size_cm(config.size_min_cm, config.size_max_cm);
    std::uniform_real_distribution<double> radius(ws.annulus_min, ws.annulus_max);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    int id = 0;
    for (int lith_idx = 0; lith_idx < 4; ++lith_idx) {
        for (int k = 0; k < config.counts[lith_idx]; ++k) {
            AggregateSpec agg;
            agg.id = id;
            agg.lithology = kReportOrder[lith_idx];
            agg.size_m = geom::Vec3(size_cm(rng), size_cm(rng), size_cm(rng)) / 100.0;

            bool placed = false;
            for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
                const double r = radius(rng);
                const double phi = angle(rng);
                const geom::Vec3 center(r * std::cos(phi), r * std::sin(phi),
                                        ws.plane_z + agg.size_m.z() / 2.0);
                // Exact footprint-rectangle separation with a 3 mm margin.
                bool overlaps = false;
                for (const auto& other : scene.aggregates) {
                    const double dx = std::abs(other.centroid().x() - center.x());
                    const double dy = std::abs(other.centroid().y() - center.y());
                    const double need_x = (agg.size_m.x() + other.size_m.x()) / 2.0 + 0.003;
                    const double need_y = (agg.size_m.y() + other.size_m.y()) / 2.0 + 0.003;
                    if (dx < need_x && dy < need_y) {
                        overlaps = true;
                        break;
                    }
                }
                if (!overlaps) {
                    agg.pose = geom::RigidTransform::translate(center);
                    placed = true;
                }
            }
            if (!placed) {
                std::ostringstream msg;
                msg << "generate_scene: could not place aggregate " << id
                    << " without overlap after 5000 retries";
                throw std::runtime_error(msg.str());
            }
            scene.aggregates.push_back(agg);
            ++id;
        }
    }
    return scene;
}

}  // namespace aggsort::sim
