// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aggsort::dataset {

/// YOLO label record: class index plus normalized center/size fractions.
struct LabelRecord {
    int class_index = 0;
    double x_center = 0.0;
    double y_center = 0.0;
    double w0 = 0.0;
    double h0 = 0.0;
};

/// Parses "class x_center y_center w h". Enforces [0,1] geometry and box fit
/// (center +- half-size stays inside the unit square).
/// Throws std::invalid_argument on violation.
LabelRecord parse_label_line(const std::string& text);

/// "class x y w h" with geometry printed to exactly 6 decimal places.
std::string serialize_label(const LabelRecord& record);

enum class Lithology { Marble, Granite, Sandstone, Limestone };

/// D = marble, H = granite, S = sandstone, SH = limestone.
std::string lithology_code(Lithology lith);
Lithology lithology_from_code(const std::string& code);
/// Lowercase english name ("marble", ...); inverse of lithology_from_name.
std::string lithology_name(Lithology lith);
Lithology lithology_from_name(const std::string& name);

/// Ordered list of class names (lithology-grade pairs), dense indices from 0.
/// The default order pins 0 = H-1, 1 = H-2 per the labeling convention and
/// continues H-3, S-1..3, SH-1..3, D-1..3.
class ClassMap {
  public:
    static ClassMap default_map();
    /// One class name per line; index = line number.
    static ClassMap from_stream(std::istream& in);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int index) const;
    int index(const std::string& name) const;  ///< -1 when absent

    /// Splits a "CODE-G" name into its lithology and grade.
    /// Throws std::invalid_argument for malformed names.
    static std::pair<Lithology, int> parse_class_name(const std::string& name);

  private:
    std::vector<std::string> names_;
};

struct SampleName {
    Lithology lithology = Lithology::Marble;
    int grade = 1;     ///< 1..3
    int sequence = 1;  ///< positive
};

/// "<code>-<grade>-<seq zero-padded to 4>", e.g. "D-1-0007".
/// Throws std::invalid_argument for invalid grade or sequence.
std::string canonical_name(const SampleName& sample);

enum class EntryStatus { Matched, MissingLabel, MissingImage, OrderMismatch };

struct IntegrityEntry {
    std::size_t position = 0;
    std::string image_stem;
    std::string label_stem;
    EntryStatus status = EntryStatus::Matched;
};

struct IntegrityReport {
    std::vector<IntegrityEntry> entries;
    bool pass = false;  ///< true iff every position matched
};

/// Position-wise comparison of image/label listings after extension strip.
/// Always returns a report; never throws.
IntegrityReport verify_dataset(const std::vector<std::string>& image_names,
                               const std::vector<std::string>& label_names);

}  // namespace aggsort::dataset
