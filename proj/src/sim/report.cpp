// SPDX-License-Identifier: Apache-2.0

#include "aggsort/sim/report.hpp"

#include "aggsort/sim/scene.hpp"

#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace aggsort::sim {

namespace {

// Integer when exact (matching the published table), one decimal otherwise.
std::string format_rate(int numerator, int denominator, bool force_decimal = false) {
    if (denominator == 0) return force_decimal ? "0.0" : "0";
    const double rate = 100.0 * numerator / denominator;
    if (!force_decimal && (100 * numerator) % denominator == 0) {
        return std::to_string((100 * numerator) / denominator);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", rate);
    return buf;
}

std::string format_mean(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    return buf;
}

std::string row_label(int index) {
    const dataset::Lithology lith = kReportOrder[index];
    return dataset::lithology_name(lith) + " (" + dataset::lithology_code(lith) + ")";
}

}  // namespace

int SortReport::total_attempted() const {
    int total = 0;
    for (const auto& row : rows) total += row.attempted;
    return total;
}

int SortReport::total_grasped() const {
    int total = 0;
    for (const auto& row : rows) total += row.grasped;
    return total;
}

int SortReport::total_correct() const {
    int total = 0;
    for (const auto& row : rows) total += row.correct;
    return total;
}

double SortReport::mean_grasp_rate() const {
    double sum = 0.0;
    int counted = 0;
    for (const auto& row : rows) {
        if (row.attempted == 0) continue;
        sum += 100.0 * row.grasped / row.attempted;
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / counted;
}

double SortReport::mean_accuracy() const {
    double sum = 0.0;
    int counted = 0;
    for (const auto& row : rows) {
        if (row.attempted == 0) continue;
        sum += 100.0 * row.correct / row.attempted;
        ++counted;
    }
    return counted == 0 ? 0.0 : sum / counted;
}

std::string render_report(const SortReport& report, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "category,attempted,grasped,success_rate,correct,accuracy\n";
        for (int i = 0; i < 4; ++i) {
            const auto& row = report.rows[i];
            out << row_label(i) << ',' << row.attempted << ',' << row.grasped << ','
                << format_rate(row.grasped, row.attempted) << ',' << row.correct << ','
                << format_rate(row.correct, row.attempted) << '\n';
        }
        out << "overall," << report.total_attempted() << ',' << report.total_grasped() << ','
            << format_mean(report.mean_grasp_rate()) << ',' << report.total_correct() << ','
            << format_mean(report.mean_accuracy()) << '\n';
        return out.str();
    }

    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %9s %8s %14s %8s %10s\n", "category", "attempted",
                  "grasped", "success_rate_%", "correct", "accuracy_%");
    out << line;
    for (int i = 0; i < 4; ++i) {
        const auto& row = report.rows[i];
        std::snprintf(line, sizeof(line), "%-16s %9d %8d %14s %8d %10s\n", row_label(i).c_str(),
                      row.attempted, row.grasped,
                      format_rate(row.grasped, row.attempted).c_str(), row.correct,
                      format_rate(row.correct, row.attempted).c_str());
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-16s %9d %8d %14s %8d %10s\n", "overall",
                  report.total_attempted(), report.total_grasped(),
                  format_mean(report.mean_grasp_rate()).c_str(), report.total_correct(),
                  format_mean(report.mean_accuracy()).c_str());
    out << line;
    return out.str();
}

SortReport parse_csv_report(std::istream& in) {
    SortReport report;
    std::string line;
    if (!std::getline(in, line) || line.rfind("category,", 0) != 0) {
        throw std::invalid_argument("csv report: missing header");
    }
    int row_index = 0;
    while (std::getline(in, line) && row_index < 4) {
        std::istringstream fields(line);
        std::string cell;
        std::getline(fields, cell, ',');  // label
        LithologyTally tally;
        std::getline(fields, cell, ',');
        tally.attempted = std::stoi(cell);
        std::getline(fields, cell, ',');
        tally.grasped = std::stoi(cell);
        std::getline(fields, cell, ',');  // rate, derived
        std::getline(fields, cell, ',');
        tally.correct = std::stoi(cell);
        report.rows[row_index] = tally;
        ++row_index;
    }
    if (row_index != 4) {
        throw std::invalid_argument("csv report: expected 4 lithology rows");
    }
    return report;
}

std::vector<ReplayAttempt> parse_replay(std::istream& in) {
    std::vector<ReplayAttempt> attempts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::string lith_name, reported_name;
        int grasp_flag;
        if (!(fields >> lith_name >> grasp_flag >> reported_name) ||
            (grasp_flag != 0 && grasp_flag != 1)) {
            throw std::invalid_argument("replay line " + std::to_string(line_no) +
                                        " malformed: " + line);
        }
        ReplayAttempt attempt;
        attempt.lithology = dataset::lithology_from_name(lith_name);
        attempt.grasp_ok = grasp_flag == 1;
        attempt.reported = dataset::lithology_from_name(reported_name);
        attempts.push_back(attempt);
    }
    return attempts;
}

SortReport tally_replay(const std::vector<ReplayAttempt>& attempts) {
    SortReport report;
    for (const auto& attempt : attempts) {
        LithologyTally& row = report.rows[report_index(attempt.lithology)];
        row.attempted += 1;
        row.grasped += attempt.grasp_ok ? 1 : 0;
        row.correct += attempt.reported == attempt.lithology ? 1 : 0;
    }
    return report;
}

}  // namespace aggsort::sim
