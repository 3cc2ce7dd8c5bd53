#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "scicorpus/doi.hpp"
#include "scicorpus/hash.hpp"
#include "scicorpus/line_reader.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

// One Unpaywall-style snapshot record. Unknown keys are preserved in `extra`
// instead of being rejected; snapshot schemas drift between dumps.
struct SnapshotEntry {
    std::string doi;           // normalized
    std::string url_for_pdf;   // possibly empty
    std::string genre;
    std::string license_raw;
    std::string title;
    std::optional<int> year;
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const SnapshotEntry& o) const {
        return doi == o.doi && url_for_pdf == o.url_for_pdf && genre == o.genre &&
               license_raw == o.license_raw && title == o.title && year == o.year &&
               extra == o.extra;
    }
};

struct MalformedLine {
    std::size_t line_number = 0;  // 1-based
    std::string reason;
};

using SnapshotItem = std::variant<SnapshotEntry, MalformedLine>;

inline bool is_absolute_url(std::string_view url) {
    std::size_t i = 0;
    if (i >= url.size() || !std::isalpha(static_cast<unsigned char>(url[i]))) return false;
    while (i < url.size() &&
           (std::isalnum(static_cast<unsigned char>(url[i])) || url[i] == '+' ||
            url[i] == '-' || url[i] == '.'))
        ++i;
    return url.substr(i, 3) == "://" && url.size() > i + 3;
}

inline SnapshotItem parse_snapshot_line(std::string_view line, std::size_t line_number) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return MalformedLine{line_number, "invalid record syntax"};

    SnapshotEntry e;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        if (key == "doi" && v.is_string())
            e.doi = normalize_doi(v.get<std::string>());
        else if (key == "url_for_pdf" && v.is_string())
            e.url_for_pdf = v.get<std::string>();
        else if (key == "genre" && v.is_string())
            e.genre = v.get<std::string>();
        else if (key == "license" && v.is_string())
            e.license_raw = v.get<std::string>();
        else if (key == "title" && v.is_string())
            e.title = v.get<std::string>();
        else if (key == "year" && v.is_number_integer())
            e.year = v.get<int>();
        else
            e.extra[key] = v;
    }
    if (e.doi.empty()) return MalformedLine{line_number, "missing doi"};
    if (!e.url_for_pdf.empty() && !is_absolute_url(e.url_for_pdf))
        return MalformedLine{line_number, "url_for_pdf is not an absolute URL"};
    return e;
}

// Streaming parse: every input line yields exactly one item through the
// callback; malformed lines are reported, never dropped.
inline void parse_snapshot_stream(LineReader& reader,
                                  const std::function<void(SnapshotItem)>& sink) {
    std::string line;
    while (reader.next(line)) {
        sink(parse_snapshot_line(line, reader.line_number()));
    }
}

inline nlohmann::json snapshot_entry_to_json(const SnapshotEntry& e) {
    nlohmann::json j = e.extra;
    j["doi"] = e.doi;
    j["url_for_pdf"] = e.url_for_pdf;
    j["genre"] = e.genre;
    if (!e.license_raw.empty()) j["license"] = e.license_raw;
    if (!e.title.empty()) j["title"] = e.title;
    if (e.year) j["year"] = *e.year;
    return j;
}

struct AttritionReport {
    std::uint64_t total = 0;
    std::uint64_t dropped_empty_url = 0;
    std::uint64_t dropped_component = 0;
    std::uint64_t kept = 0;

    // Shard reports merge by summation.
    AttritionReport& operator+=(const AttritionReport& o) {
        total += o.total;
        dropped_empty_url += o.dropped_empty_url;
        dropped_component += o.dropped_component;
        kept += o.kept;
        return *this;
    }

    bool additive() const { return total == kept + dropped_empty_url + dropped_component; }

    std::string to_text() const {
        std::string s;
        s += "total " + std::to_string(total) + "\n";
        s += "dropped_empty_url " + std::to_string(dropped_empty_url) + "\n";
        s += "dropped_component " + std::to_string(dropped_component) + "\n";
        s += "kept " + std::to_string(kept) + "\n";
        return s;
    }
};

// Precedence is fixed: an entry failing both checks is counted once, under
// empty_url, so the attrition arithmetic stays exactly additive.
inline bool filter_entry(const SnapshotEntry& e, AttritionReport& report) {
    ++report.total;
    if (e.url_for_pdf.empty()) {
        ++report.dropped_empty_url;
        return false;
    }
    if (e.genre == "component") {
        ++report.dropped_component;
        return false;
    }
    ++report.kept;
    return true;
}

inline std::size_t partition_of(std::string_view normalized_doi, std::size_t n_partitions) {
    if (n_partitions == 0) throw ConfigError("n_partitions must be >= 1");
    return static_cast<std::size_t>(stable_hash64(normalized_doi) % n_partitions);
}

struct PartitionAssignment {
    std::string entry_doi;
    std::size_t partition_index;
};

inline PartitionAssignment assign_partition(const SnapshotEntry& e, std::size_t n_partitions) {
    return PartitionAssignment{e.doi, partition_of(e.doi, n_partitions)};
}

}  // namespace scicorpus
