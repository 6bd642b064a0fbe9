// SPDX-License-Identifier: Apache-2.0

#include "aggsort/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aggsort::dataset {

LabelRecord parse_label_line(const std::string& text) {
    std::istringstream in(text);
    LabelRecord r;
    if (!(in >> r.class_index >> r.x_center >> r.y_center >> r.w0 >> r.h0)) {
        throw std::invalid_argument("label line needs 5 fields: " + text);
    }
    std::string extra;
    if (in >> extra) {
        throw std::invalid_argument("label line has trailing fields: " + text);
    }
    if (r.class_index < 0) {
        throw std::invalid_argument("label line: negative class index");
    }
    for (const double v : {r.x_center, r.y_center, r.w0, r.h0}) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw std::invalid_argument("label line: geometry outside [0, 1]: " + text);
        }
    }
    const double eps = 1e-9;  // box-fit slack for 6-decimal serialized values
    if (r.x_center - r.w0 / 2.0 < -eps || r.x_center + r.w0 / 2.0 > 1.0 + eps ||
        r.y_center - r.h0 / 2.0 < -eps || r.y_center + r.h0 / 2.0 > 1.0 + eps) {
        throw std::invalid_argument("label line: box exceeds the unit square: " + text);
    }
    return r;
}

std::string serialize_label(const LabelRecord& record) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f", record.class_index,
                  record.x_center, record.y_center, record.w0, record.h0);
    return buf;
}

std::string lithology_code(Lithology lith) {
    switch (lith) {
        case Lithology::Marble: return "D";
        case Lithology::Granite: return "H";
        case Lithology::Sandstone: return "S";
        case Lithology::Limestone: return "SH";
    }
    throw std::invalid_argument("unknown lithology");
}

Lithology lithology_from_code(const std::string& code) {
    if (code == "D") return Lithology::Marble;
    if (code == "H") return Lithology::Granite;
    if (code == "S") return Lithology::Sandstone;
    if (code == "SH") return Lithology::Limestone;
    throw std::invalid_argument("unknown lithology code: " + code);
}

std::string lithology_name(Lithology lith) {
    switch (lith) {
        case Lithology::Marble: return "marble";
        case Lithology::Granite: return "granite";
        case Lithology::Sandstone: return "sandstone";
        case Lithology::Limestone: return "limestone";
    }
    throw std::invalid_argument("unknown lithology");
}

Lithology lithology_from_name(const std::string& name) {
    if (name == "marble") return Lithology::Marble;
    if (name == "granite") return Lithology::Granite;
    if (name == "sandstone") return Lithology::Sandstone;
    if (name == "limestone") return Lithology::Limestone;
    throw std::invalid_argument("unknown lithology name: " + name);
}

ClassMap ClassMap::default_map() {
    ClassMap map;
    for (const char* code : {"H", "S", "SH", "D"}) {
        for (int grade = 1; grade <= 3; ++grade) {
            map.names_.push_back(std::string(code) + "-" + std::to_string(grade));
        }
    }
    return map;
}

ClassMap ClassMap::from_stream(std::istream& in) {
    ClassMap map;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        map.names_.push_back(line);
    }
    if (map.names_.empty()) {
        throw std::invalid_argument("class map: no entries");
    }
    return map;
}

const std::string& ClassMap::name(int index) const {
    if (index < 0 || index >= size()) {
        throw std::out_of_range("class map: index out of range");
    }
    return names_[index];
}

int ClassMap::index(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

std::pair<Lithology, int> ClassMap::parse_class_name(const std::string& name) {
    const auto dash = name.rfind('-');
    if (dash == std::string::npos || dash + 1 >= name.size()) {
        throw std::invalid_argument("class name not of the form CODE-G: " + name);
    }
    const Lithology lith = lithology_from_code(name.substr(0, dash));
    const int grade = std::stoi(name.substr(dash + 1));
    if (grade < 1 || grade > 3) {
        throw std::invalid_argument("class name grade outside 1..3: " + name);
    }
    return {lith, grade};
}

std::string canonical_name(const SampleName& sample) {
    if (sample.grade < 1 || sample.grade > 3) {
        throw std::invalid_argument("sample grade must be 1..3");
    }
    if (sample.sequence < 1) {
        throw std::invalid_argument("sample sequence must be positive");
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%d-%04d", lithology_code(sample.lithology).c_str(),
                  sample.grade, sample.sequence);
    return buf;
}

namespace {

std::string stem_of(const std::string& name) {
    const auto dot = name.rfind('.');
    if (dot == std::string::npos || dot == 0) return name;
    return name.substr(0, dot);
}

}  // namespace

IntegrityReport verify_dataset(const std::vector<std::string>& image_names,
                               const std::vector<std::string>& label_names) {
    IntegrityReport report;
    std::map<std::string, int> image_stems, label_stems;
    std::vector<std::string> images, labels;
    images.reserve(image_names.size());
    labels.reserve(label_names.size());
    for (const auto& n : image_names) {
        images.push_back(stem_of(n));
        ++image_stems[images.back()];
    }
    for (const auto& n : label_names) {
        labels.push_back(stem_of(n));
        ++label_stems[labels.back()];
    }

    const std::size_t count = std::max(images.size(), labels.size());
    bool pass = true;
    for (std::size_t i = 0; i < count; ++i) {
        IntegrityEntry entry;
        entry.position = i;
        if (i < images.size()) entry.image_stem = images[i];
        if (i < labels.size()) entry.label_stem = labels[i];

        if (i >= labels.size()) {
            entry.status = EntryStatus::MissingLabel;
        } else if (i >= images.size()) {
            entry.status = EntryStatus::MissingImage;
        } else if (images[i] == labels[i]) {
            entry.status = EntryStatus::Matched;
        } else if (label_stems.count(images[i]) == 0) {
            entry.status = EntryStatus::MissingLabel;
        } else if (image_stems.count(labels[i]) == 0) {
            entry.status = EntryStatus::MissingImage;
        } else {
            entry.status = EntryStatus::OrderMismatch;
        }
        pass = pass && entry.status == EntryStatus::Matched;
        report.entries.push_back(std::move(entry));
    }
    report.pass = pass;
    return report;
}

}  // namespace aggsort::dataset
