// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sim/config.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace aggsort::sim {

SimConfig parse_config(std::istream& in) {
    SimConfig config;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string key;
        fields >> key;

        auto want = [&](auto&... vals) {
            if (!((fields >> vals) && ...)) {
                throw std::invalid_argument("config: bad value(s) for " + key);
            }
        };

        if (key == "seed") {
            want(config.master_seed);
        } else if (key == "counts") {
            want(config.counts[0], config.counts[1], config.counts[2], config.counts[3]);
        } else if (key == "size_range_cm") {
            want(config.size_min_cm, config.size_max_cm);
        } else if (key == "fidelity") {
            std::string mode;
            want(mode);
            if (mode == "analytic") config.fidelity = Fidelity::Analytic;
            else if (mode == "stereo") config.fidelity = Fidelity::FullStereo;
            else throw std::invalid_argument("config: fidelity must be analytic|stereo");
        } else if (key == "grasp.threshold_cm") {
            want(config.grasp.threshold_cm);
        } else if (key == "grasp.p_below") {
            want(config.grasp.p_below);
        } else if (key == "grasp.p_above") {
            want(config.grasp.p_above);
        } else if (key == "bands") {
            want(config.bands.reject_below, config.bands.band2, config.bands.band3,
                 config.bands.oversize);
        } else if (key == "dh_profile") {
            want(config.dh_profile);
        } else if (key == "dh_file") {
            want(config.dh_file);
        } else if (key == "confusion") {
            want(config.confusion_path);
        } else if (key == "replay") {
            want(config.replay_path);
        } else if (key == "depth_noise_sigma") {
            want(config.depth_noise_sigma);
        } else if (key == "box_noise_px") {
            want(config.box_noise_px);
        } else if (key == "plane_z") {
            want(config.workspace.plane_z);
        } else if (key == "annulus") {
            want(config.workspace.annulus_min, config.workspace.annulus_max);
        } else if (key == "camera_height") {
            want(config.workspace.camera_height);
        } else if (key == "bin_radius") {
            want(config.workspace.bin_radius);
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
    if (config.grasp.p_below > config.grasp.p_above) {
        throw std::invalid_argument("config: grasp model must be monotone in size");
    }
    return config;
}

void write_config(std::ostream& out, const SimConfig& config) {
    out << "seed " << config.master_seed << "\n";
    out << "counts " << config.counts[0] << ' ' << config.counts[1] << ' ' << config.counts[2]
        << ' ' << config.counts[3] << "\n";
    out << "size_range_cm " << config.size_min_cm << ' ' << config.size_max_cm << "\n";
    out << "fidelity " << (config.fidelity == Fidelity::Analytic ? "analytic" : "stereo")
        << "\n";
    out << "grasp.threshold_cm " << config.grasp.threshold_cm << "\n";
    out << "grasp.p_below " << config.grasp.p_below << "\n";
    out << "grasp.p_above " << config.grasp.p_above << "\n";
    out << "bands " << config.bands.reject_below << ' ' << config.bands.band2 << ' '
        << config.bands.band3 << ' ' << config.bands.oversize << "\n";
    out << "dh_profile " << config.dh_profile << "\n";
    if (!config.dh_file.empty()) out << "dh_file " << config.dh_file << "\n";
    if (!config.confusion_path.empty()) out << "confusion " << config.confusion_path << "\n";
    if (!config.replay_path.empty()) out << "replay " << config.replay_path << "\n";
    out << "depth_noise_sigma " << config.depth_noise_sigma << "\n";
    out << "box_noise_px " << config.box_noise_px << "\n";
}

}  // namespace aggsort::sim
