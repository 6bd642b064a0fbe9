// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aggsort/dataset.hpp"

#include <random>
#include <sstream>

using namespace aggsort;
using dataset::EntryStatus;
using dataset::Lithology;

TEST_CASE("parse_label_line basics") {
    const auto r = dataset::parse_label_line("0 0.512 0.431 0.120 0.098");
    CHECK(r.class_index == 0);
    CHECK(dataset::ClassMap::default_map().name(0) == "H-1");
    CHECK(r.x_center == doctest::Approx(0.512));
    CHECK(r.y_center == doctest::Approx(0.431));
    CHECK(r.w0 == doctest::Approx(0.120));
    CHECK(r.h0 == doctest::Approx(0.098));

    CHECK_THROWS_AS(dataset::parse_label_line("3 1.200 0.5 0.1 0.1"), std::invalid_argument);
    CHECK_THROWS_AS(dataset::parse_label_line("0 0.5 0.5 0.1"), std::invalid_argument);
    CHECK_THROWS_AS(dataset::parse_label_line("0 0.5 0.5 0.1 0.1 9"), std::invalid_argument);
    CHECK_THROWS_AS(dataset::parse_label_line("x 0.5 0.5 0.1 0.1"), std::invalid_argument);
    // Box sticking out of the unit square.
    CHECK_THROWS_AS(dataset::parse_label_line("0 0.95 0.5 0.2 0.1"), std::invalid_argument);
}

TEST_CASE("serialize_label format") {
    dataset::LabelRecord r{0, 0.5, 0.5, 0.1, 0.1};
    CHECK(dataset::serialize_label(r) == "0 0.500000 0.500000 0.100000 0.100000");
}

TEST_CASE("label round-trips") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> center(0.3, 0.7);
    std::uniform_real_distribution<double> size(0.0, 0.5);
    std::uniform_int_distribution<int> cls(0, 11);
    for (int i = 0; i < 100; ++i) {
        dataset::LabelRecord r;
        r.class_index = cls(rng);
        r.x_center = center(rng);
        r.y_center = center(rng);
        r.w0 = size(rng);
        r.h0 = size(rng);
        // parse(serialize(r)) == r at the 6-decimal resolution
        const auto back = dataset::parse_label_line(dataset::serialize_label(r));
        CHECK(back.class_index == r.class_index);
        CHECK(back.x_center == doctest::Approx(r.x_center).epsilon(1e-6));
        CHECK(back.h0 == doctest::Approx(r.h0).epsilon(1e-6));
        // serialize . parse is idempotent on well-formed lines
        const std::string line = dataset::serialize_label(r);
        CHECK(dataset::serialize_label(dataset::parse_label_line(line)) == line);
    }
}

TEST_CASE("class map is a bijection over 12 lithology-grade pairs") {
    const auto map = dataset::ClassMap::default_map();
    REQUIRE(map.size() == 12);
    CHECK(map.name(0) == "H-1");
    CHECK(map.name(1) == "H-2");
    for (int i = 0; i < map.size(); ++i) {
        CHECK(map.index(map.name(i)) == i);
        const auto [lith, grade] = dataset::ClassMap::parse_class_name(map.name(i));
        CHECK(grade >= 1);
        CHECK(grade <= 3);
    }
    CHECK(map.index("Z-9") == -1);

    std::istringstream custom("A-1\nA-2\n");
    const auto parsed = dataset::ClassMap::from_stream(custom);
    CHECK(parsed.size() == 2);
    CHECK(parsed.name(1) == "A-2");
}

TEST_CASE("canonical sample names") {
    CHECK(dataset::canonical_name({Lithology::Marble, 1, 7}) == "D-1-0007");
    CHECK(dataset::canonical_name({Lithology::Granite, 3, 1219}) == "H-3-1219");
    CHECK(dataset::canonical_name({Lithology::Limestone, 2, 42}) == "SH-2-0042");
    CHECK_THROWS_AS(dataset::canonical_name({Lithology::Marble, 5, 1}), std::invalid_argument);
    CHECK_THROWS_AS(dataset::canonical_name({Lithology::Marble, 1, 0}), std::invalid_argument);
}

TEST_CASE("lithology codes") {
    CHECK(dataset::lithology_code(Lithology::Marble) == "D");
    CHECK(dataset::lithology_code(Lithology::Granite) == "H");
    CHECK(dataset::lithology_code(Lithology::Sandstone) == "S");
    CHECK(dataset::lithology_code(Lithology::Limestone) == "SH");
    CHECK(dataset::lithology_from_code("SH") == Lithology::Limestone);
    CHECK_THROWS_AS(dataset::lithology_from_code("Q"), std::invalid_argument);
}

TEST_CASE("verify_dataset statuses") {
    const auto pass = dataset::verify_dataset({"D-1-0001.jpg"}, {"D-1-0001.txt"});
    CHECK(pass.pass);
    REQUIRE(pass.entries.size() == 1);
    CHECK(pass.entries[0].status == EntryStatus::Matched);

    const auto missing = dataset::verify_dataset({"D-1-0001.jpg", "D-1-0002.jpg"},
                                                 {"D-1-0001.txt"});
    CHECK_FALSE(missing.pass);
    CHECK(missing.entries[1].status == EntryStatus::MissingLabel);

    const auto reordered = dataset::verify_dataset({"a.jpg", "b.jpg"}, {"b.txt", "a.txt"});
    CHECK_FALSE(reordered.pass);
    CHECK(reordered.entries[0].status == EntryStatus::OrderMismatch);
    CHECK(reordered.entries[1].status == EntryStatus::OrderMismatch);

    const auto extra_label = dataset::verify_dataset({"a.jpg"}, {"a.txt", "b.txt"});
    CHECK_FALSE(extra_label.pass);
    CHECK(extra_label.entries[1].status == EntryStatus::MissingImage);
}
