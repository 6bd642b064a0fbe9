// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aggsort/stereo.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace aggsort;
using stereo::DisparityMap;
using stereo::GrayImage;
using stereo::MatchOptions;

namespace {

// Random texture image; wide enough to carve a shifted pair out of.
GrayImage random_texture(int width, int height, std::uint64_t seed) {
    GrayImage img(width, height);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> value(0, 255);
    for (auto& px : img.pixels) px = std::uint8_t(value(rng));
    return img;
}

double shift_recovery_fraction(int shift, int width, int height, std::uint64_t seed,
                               const MatchOptions& options) {
    const GrayImage wide = random_texture(width + shift, height, seed);
    GrayImage left(width, height), right(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            left.set(x, y, wide.at(x, y));
            right.set(x, y, wide.at(x + shift, y));
        }
    }
    // right(x) = left(x + shift): left pixel x matches right pixel x - shift,
    // i.e. the true disparity is `shift` everywhere it is defined.
    const DisparityMap map = stereo::compute_disparity(left, right, options);

    const int border = options.census_w / 2 + 1;
    int interior_valid = 0, correct = 0;
    for (int y = border; y < height - border; ++y) {
        for (int x = options.d_max + border; x < width - border; ++x) {
            const auto d = map.at(x, y);
            if (d == DisparityMap::kInvalid) continue;
            ++interior_valid;
            if (d == shift) ++correct;
        }
    }
    REQUIRE(interior_valid > 0);
    return double(correct) / double(interior_valid);
}

}  // namespace

TEST_CASE("census transform basics") {
    GrayImage uniform(9, 9);
    for (auto& px : uniform.pixels) px = 80;
    const auto census = stereo::census_transform(uniform);
    CHECK(census.descriptor_bits() == 24);
    CHECK(census.is_valid(4, 4));
    CHECK_FALSE(census.is_valid(1, 4));  // border
    CHECK(census.at(4, 4) == 0);  // no neighbor strictly darker

    GrayImage peak = uniform;
    peak.set(4, 4, 200);
    const auto peaked = stereo::census_transform(peak);
    CHECK(peaked.at(4, 4) == (std::uint64_t(1) << 24) - 1);  // all neighbors darker

    CHECK_THROWS_AS(stereo::census_transform(uniform, 4, 5), std::invalid_argument);
    CHECK_THROWS_AS(stereo::census_transform(uniform, 11, 5), std::invalid_argument);
    CHECK_THROWS_AS(stereo::census_transform(uniform, 9, 9), std::invalid_argument);
}

TEST_CASE("census descriptors are invariant under monotone intensity remaps") {
    // v -> v^2 / 255 is strictly increasing on [128, 255] (the 8-bit floor
    // collapses neighboring values below that), so draw intensities there.
    GrayImage img(64, 48);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> value(128, 255);
    for (auto& px : img.pixels) px = std::uint8_t(value(rng));
    GrayImage remapped = img;
    for (auto& px : remapped.pixels) {
        px = std::uint8_t((unsigned(px) * unsigned(px)) / 255);
    }
    const auto a = stereo::census_transform(img);
    const auto b = stereo::census_transform(remapped);
    int mismatches = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        if (a.valid[i] && a.bits[i] != b.bits[i]) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("identical images match at disparity zero") {
    const GrayImage img = random_texture(80, 60, 13);
    MatchOptions options;
    options.d_max = 16;
    const auto map = stereo::compute_disparity(img, img, options);
    int valid = 0;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const auto d = map.at(x, y);
            if (d == DisparityMap::kInvalid) continue;
            ++valid;
            CHECK(d == 0);
        }
    }
    CHECK(valid > 0);
}

TEST_CASE("uniform images yield no valid disparities") {
    GrayImage flat(64, 48);
    for (auto& px : flat.pixels) px = 127;
    MatchOptions options;
    options.d_max = 16;
    const auto map = stereo::compute_disparity(flat, flat, options);
    for (const auto d : map.values) CHECK(d == DisparityMap::kInvalid);
}

TEST_CASE("synthetic shift is recovered on at least 95% of interior pixels") {
    MatchOptions options;
    options.d_max = 32;
    for (const int shift : {3, 7, 15}) {
        const double fraction = shift_recovery_fraction(shift, 320, 240, 17 + shift, options);
        CHECK(fraction >= 0.95);
    }
}

TEST_CASE("dimension and range validation") {
    const GrayImage a = random_texture(32, 32, 1);
    const GrayImage b = random_texture(40, 32, 1);
    CHECK_THROWS_AS(stereo::compute_disparity(a, b, {}), std::invalid_argument);
    MatchOptions options;
    options.d_max = 32;
    CHECK_THROWS_AS(stereo::compute_disparity(a, a, options), std::invalid_argument);
}

TEST_CASE("left-right symmetry of surviving pixels") {
    MatchOptions options;
    options.d_max = 16;
    const GrayImage wide = random_texture(148, 60, 23);
    GrayImage left(128, 60), right(128, 60);
    for (int y = 0; y < 60; ++y) {
        for (int x = 0; x < 128; ++x) {
            left.set(x, y, wide.at(x, y));
            right.set(x, y, wide.at(x + 5, y));
        }
    }
    const auto map = stereo::compute_disparity(left, right, options);
    int checked = 0;
    for (int y = 0; y < map.height; ++y) {
        for (int x = options.d_max; x < map.width; ++x) {
            if (map.at(x, y) == DisparityMap::kInvalid) continue;
            ++checked;
            CHECK(map.at(x, y) == 5);
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("worker count does not change the result") {
    const int shift = 7;
    const GrayImage wide = random_texture(256 + shift, 96, 29);
    GrayImage left(256, 96), right(256, 96);
    for (int y = 0; y < 96; ++y) {
        for (int x = 0; x < 256; ++x) {
            left.set(x, y, wide.at(x, y));
            right.set(x, y, wide.at(x + shift, y));
        }
    }
    MatchOptions serial;
    serial.d_max = 24;
    MatchOptions parallel = serial;
    parallel.workers = 4;
    const auto a = stereo::compute_disparity(left, right, serial);
    const auto b = stereo::compute_disparity(left, right, parallel);
    CHECK(a.values == b.values);

    MatchOptions aggregated = serial;
    aggregated.box_aggregate = true;
    MatchOptions aggregated_parallel = aggregated;
    aggregated_parallel.workers = 3;
    const auto c = stereo::compute_disparity(left, right, aggregated);
    const auto d = stereo::compute_disparity(left, right, aggregated_parallel);
    CHECK(c.values == d.values);
}

TEST_CASE("disparity to depth conversions") {
    CHECK(stereo::disparity_to_depth(100.0, 1000.0, 0.1) == doctest::Approx(1.0));
    CHECK(stereo::disparity_to_depth(200.0, 1000.0, 0.1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(stereo::disparity_to_depth(0.0, 1000.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(stereo::disparity_to_depth(-3.0, 1000.0, 0.1), std::domain_error);

    // Z * d stays exactly fx * baseline.
    for (int d = 1; d <= 64; ++d) {
        const double z = stereo::disparity_to_depth(double(d), 460.0, 0.025);
        CHECK(z * d == doctest::Approx(460.0 * 0.025).epsilon(1e-15));
    }
}

TEST_CASE("locate_3d unprojection") {
    const cam::Intrinsics intr{500.0, 500.0, 160.0, 120.0, 0.0};
    const cam::Distortion none{};
    const auto on_axis = stereo::locate_3d({160.0, 120.0}, 1.0, intr, none);
    CHECK((on_axis - geom::Vec3(0, 0, 1)).norm() < 1e-12);

    const auto offset = stereo::locate_3d({160.0 + 500.0, 120.0}, 1.0, intr, none);
    CHECK((offset - geom::Vec3(1, 0, 1)).norm() < 1e-12);

    CHECK_THROWS_AS(stereo::locate_3d({160.0, 120.0}, 0.1, intr, none), std::out_of_range);
    CHECK_THROWS_AS(stereo::locate_3d({160.0, 120.0}, 3.0, intr, none), std::out_of_range);

    // Round trip through the projection model.
    const cam::Distortion dist{-0.0000716, 0.0, 0.0016, -0.000247};
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ux(20.0, 300.0), uy(20.0, 220.0);
    for (int i = 0; i < 100; ++i) {
        const cam::Pixel pixel(ux(rng), uy(rng));
        const auto p = stereo::locate_3d(pixel, 1.2, intr, dist);
        const auto back = cam::project(intr, dist, p);
        CHECK((back - pixel).norm() < 1e-6);
    }
}

TEST_CASE("pgm and depth/disparity serialization round-trips") {
    const GrayImage img = random_texture(37, 23, 41);
    std::stringstream binary;
    stereo::write_pgm(binary, img, true);
    const auto back_binary = stereo::read_pgm(binary);
    CHECK(back_binary.pixels == img.pixels);

    std::stringstream ascii;
    stereo::write_pgm(ascii, img, false);
    const auto back_ascii = stereo::read_pgm(ascii);
    CHECK(back_ascii.pixels == img.pixels);

    DisparityMap map;
    map.width = 8;
    map.height = 2;
    map.values.assign(16, DisparityMap::kInvalid);
    map.values[3] = 12;
    map.values[9] = 0;
    std::stringstream disp;
    stereo::write_disparity_pgm(disp, map);
    const auto back_map = stereo::read_disparity_pgm(disp);
    CHECK(back_map.values == map.values);

    const auto depth = stereo::disparity_map_to_depth(map, 460.0, 0.025);
    CHECK(std::isnan(depth.at(1, 0)));
    CHECK(std::isnan(depth.at(1, 1)));  // disparity 0 has no finite depth
    CHECK(depth.at(3, 0) == doctest::Approx(460.0 * 0.025 / 12.0));
    std::stringstream text;
    stereo::write_depth_text(text, depth);
    const auto back_depth = stereo::read_depth_text(text);
    CHECK(back_depth.width == depth.width);
    CHECK(std::isnan(back_depth.at(1, 0)));
    CHECK(back_depth.at(3, 0) == doctest::Approx(depth.at(3, 0)));
}
