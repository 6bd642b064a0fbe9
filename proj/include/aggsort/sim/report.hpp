// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "aggsort/dataset.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace aggsort::sim {

struct LithologyTally {
    int attempted = 0;
    int grasped = 0;
    int correct = 0;
};

/// Per-lithology grasp/classification outcomes, rows in report order
/// (limestone, granite, sandstone, marble).
struct SortReport {
    std::array<LithologyTally, 4> rows{};

    int total_attempted() const;
    int total_grasped() const;
    int total_correct() const;
    /// Mean of the four per-lithology rates, percent.
    double mean_grasp_rate() const;
    double mean_accuracy() const;
};

enum class ReportFormat { Table, Csv };

/// Table format mirrors the published columns (category, attempted, grasp
/// successes, success rate %, correct count, accuracy %); CSV uses the same
/// columns with a header row. Percentages render as integers when exact, one
/// decimal otherwise; overall means always carry one decimal.
std::string render_report(const SortReport& report, ReportFormat format);

/// Parses a CSV produced by render_report back into tallies.
SortReport parse_csv_report(std::istream& in);

/// Replay file: one line per attempt, "lithology grasp_ok reported_class".
struct ReplayAttempt {
    dataset::Lithology lithology = dataset::Lithology::Limestone;
    bool grasp_ok = true;
    dataset::Lithology reported = dataset::Lithology::Limestone;
};

/// Throws std::invalid_argument on malformed lines.
std::vector<ReplayAttempt> parse_replay(std::istream& in);
SortReport tally_replay(const std::vector<ReplayAttempt>& attempts);

}  // namespace aggsort::sim
