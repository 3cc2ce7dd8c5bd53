#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scicorpus/gopher.hpp"
#include "scicorpus/license.hpp"
#include "scicorpus/tei.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

enum class SourceKind { pdf_unpaywall, jats_xml, latex_bundle };

inline const char* source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::pdf_unpaywall: return "pdf_unpaywall";
        case SourceKind::jats_xml: return "jats_xml";
        case SourceKind::latex_bundle: return "latex_bundle";
    }
    return "pdf_unpaywall";
}

inline SourceKind source_kind_from_name(std::string_view name) {
    if (name == "jats_xml") return SourceKind::jats_xml;
    if (name == "latex_bundle") return SourceKind::latex_bundle;
    return SourceKind::pdf_unpaywall;
}

struct VerdictSummary {
    std::string stage;
    bool passed = true;
    std::string failed_rule;
    double measured_value = 0;
};

struct DocumentRecord {
    std::string doc_id;
    std::optional<std::string> doi;
    SourceKind source_kind = SourceKind::pdf_unpaywall;
    std::optional<std::string> title;
    std::optional<std::string> license_raw;
    LicenseClass license_class = LicenseClass::unidentified;
    std::optional<std::string> declared_language;
    std::string detected_language;
    double detected_confidence = 0;
    std::vector<VerdictSummary> filter_verdicts;
    std::optional<std::string> dedup_cluster;
    std::uint64_t whitespace_token_count = 0;
    std::string url;
};

inline nlohmann::json record_to_json(const DocumentRecord& r) {
    nlohmann::json j{{"doc_id", r.doc_id},
                     {"source_kind", source_kind_name(r.source_kind)},
                     {"license_class", license_class_name(r.license_class)},
                     {"detected_language", r.detected_language},
                     {"detected_confidence", r.detected_confidence},
                     {"token_count", r.whitespace_token_count},
                     {"url", r.url}};
    if (r.doi) j["doi"] = *r.doi;
    if (r.title) j["title"] = *r.title;
    if (r.license_raw) j["license_raw"] = *r.license_raw;
    if (r.declared_language) j["declared_language"] = *r.declared_language;
    if (r.dedup_cluster) j["dedup_cluster"] = *r.dedup_cluster;
    nlohmann::json verdicts = nlohmann::json::array();
    for (const VerdictSummary& v : r.filter_verdicts)
        verdicts.push_back({{"stage", v.stage},
                            {"passed", v.passed},
                            {"failed_rule", v.failed_rule},
                            {"measured_value", v.measured_value}});
    j["filter_verdicts"] = verdicts;
    return j;
}

inline DocumentRecord record_from_json(const nlohmann::json& j) {
    DocumentRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.source_kind = source_kind_from_name(j.value("source_kind", "pdf_unpaywall"));
    r.license_class = license_class_from_name(j.value("license_class", "unidentified"));
    r.detected_language = j.value("detected_language", "");
    r.detected_confidence = j.value("detected_confidence", 0.0);
    r.whitespace_token_count = j.value("token_count", std::uint64_t{0});
    r.url = j.value("url", "");
    if (j.contains("doi")) r.doi = j["doi"].get<std::string>();
    if (j.contains("title")) r.title = j["title"].get<std::string>();
    if (j.contains("license_raw")) r.license_raw = j["license_raw"].get<std::string>();
    if (j.contains("declared_language"))
        r.declared_language = j["declared_language"].get<std::string>();
    if (j.contains("dedup_cluster")) r.dedup_cluster = j["dedup_cluster"].get<std::string>();
    for (const nlohmann::json& v : j.value("filter_verdicts", nlohmann::json::array()))
        r.filter_verdicts.push_back(VerdictSummary{v.value("stage", ""), v.value("passed", true),
                                                   v.value("failed_rule", ""),
                                                   v.value("measured_value", 0.0)});
    return r;
}

struct StatsReport {
    std::uint64_t doc_count = 0;
    std::uint64_t token_total = 0;
    std::map<std::string, std::uint64_t> language_histogram;
    std::map<std::string, std::uint64_t> license_histogram;

    double mean_tokens_per_doc() const {
        return doc_count == 0 ? 0.0
                              : static_cast<double>(token_total) / static_cast<double>(doc_count);
    }

    // Associative, commutative merge of per-partition reports.
    StatsReport& operator+=(const StatsReport& o) {
        doc_count += o.doc_count;
        token_total += o.token_total;
        for (const auto& [k, v] : o.language_histogram) language_histogram[k] += v;
        for (const auto& [k, v] : o.license_histogram) license_histogram[k] += v;
        return *this;
    }

    bool operator==(const StatsReport&) const = default;

    std::string to_table() const {
        std::string out;
        out += "documents        " + std::to_string(doc_count) + "\n";
        out += "tokens           " + std::to_string(token_total) + "\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f", mean_tokens_per_doc());
        out += "tokens_per_doc   " + std::string(buf) + "\n";
        out += "languages:\n";
        for (const auto& [k, v] : language_histogram)
            out += "  " + k + " " + std::to_string(v) + "\n";
        out += "licenses:\n";
        for (const auto& [k, v] : license_histogram)
            out += "  " + k + " " + std::to_string(v) + "\n";
        return out;
    }

    std::string to_jsonl() const {
        std::string out;
        out += nlohmann::json{{"metric", "doc_count"}, {"value", doc_count}}.dump() + "\n";
        out += nlohmann::json{{"metric", "token_total"}, {"value", token_total}}.dump() + "\n";
        out += nlohmann::json{{"metric", "mean_tokens_per_doc"}, {"value", mean_tokens_per_doc()}}
                   .dump() +
               "\n";
        for (const auto& [k, v] : language_histogram)
            out += nlohmann::json{{"metric", "language"}, {"key", k}, {"value", v}}.dump() + "\n";
        for (const auto& [k, v] : license_histogram)
            out += nlohmann::json{{"metric", "license"}, {"key", k}, {"value", v}}.dump() + "\n";
        return out;
    }
};

// Minimal SVG bar chart for the language / license histograms.
inline std::string histogram_svg(const std::map<std::string, std::uint64_t>& histogram,
                                 const std::string& title) {
    std::uint64_t max_v = 1;
    for (const auto& [k, v] : histogram) max_v = std::max(max_v, v);
    const int bar_h = 18, gap = 6, left = 140, width = 560;
    int height = 40 + static_cast<int>(histogram.size()) * (bar_h + gap);
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" + title +
           "</text>\n";
    int y = 36;
    for (const auto& [k, v] : histogram) {
        int w = static_cast<int>(static_cast<double>(v) / static_cast<double>(max_v) *
                                 (width - left - 80));
        svg += "<text x=\"10\" y=\"" + std::to_string(y + bar_h - 5) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + k + "</text>\n";
        svg += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + std::to_string(std::max(w, 1)) + "\" height=\"" +
               std::to_string(bar_h) + "\" fill=\"#4878a8\"/>\n";
        svg += "<text x=\"" + std::to_string(left + std::max(w, 1) + 6) + "\" y=\"" +
               std::to_string(y + bar_h - 5) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
               std::to_string(v) + "</text>\n";
        y += bar_h + gap;
    }
    svg += "</svg>\n";
    return svg;
}

// Per-partition document index plus citation graph counters. File layout:
// 16-byte header (magic "SCIX", version u16, reserved u16, record count u64)
// then length-prefixed serialized records, then one graph summary blob.
class MetadataIndex {
public:
    static constexpr char kMagic[4] = {'S', 'C', 'I', 'X'};
    static constexpr std::uint16_t kVersion = 1;

    void upsert_document(DocumentRecord record) {
        auto it = records_.find(record.doc_id);
        if (it != records_.end()) {
            replacements_.push_back(record.doc_id);  // last writer wins, logged
            it->second = std::move(record);
        } else {
            records_.emplace(record.doc_id, std::move(record));
        }
    }

    const DocumentRecord* find(const std::string& doc_id) const {
        auto it = records_.find(doc_id);
        return it == records_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return records_.size(); }
    const std::map<std::string, DocumentRecord>& records() const { return records_; }
    const std::vector<std::string>& replacement_log() const { return replacements_; }

    void store_citation_graph(const std::vector<BibEntry>& nodes,
                              const std::vector<CitationEdge>& edges) {
        node_count_ += nodes.size();
        for (const CitationEdge& e : edges) {
            if (records_.count(e.doc_id)) {
                ++edge_counts_[e.doc_id];
                ++edge_total_;
            } else {
                ++dangling_edges_;
            }
        }
    }

    std::uint64_t node_count() const { return node_count_; }
    std::uint64_t edge_count() const { return edge_total_; }
    std::uint64_t dangling_edge_count() const { return dangling_edges_; }
    std::uint64_t edge_count_for(const std::string& doc_id) const {
        auto it = edge_counts_.find(doc_id);
        return it == edge_counts_.end() ? 0 : it->second;
    }

    StatsReport compute_corpus_stats(
        const std::function<bool(const DocumentRecord&)>& filter = nullptr) const {
        StatsReport report;
        for (const auto& [id, r] : records_) {
            if (filter && !filter(r)) continue;
            ++report.doc_count;
            report.token_total += r.whitespace_token_count;
            ++report.language_histogram[r.detected_language];
            ++report.license_histogram[license_class_name(r.license_class)];
        }
        return report;
    }

    void save(const std::filesystem::path& path) const {
        std::string out;
        out.append(kMagic, 4);
        std::uint16_t v16 = kVersion, zero16 = 0;
        std::uint64_t count = records_.size();
        out.append(reinterpret_cast<const char*>(&v16), 2);
        out.append(reinterpret_cast<const char*>(&zero16), 2);
        out.append(reinterpret_cast<const char*>(&count), 8);
        for (const auto& [id, r] : records_) {
            std::string body = record_to_json(r).dump();
            std::uint32_t len = static_cast<std::uint32_t>(body.size());
            out.append(reinterpret_cast<const char*>(&len), 4);
            out += body;
        }
        nlohmann::json graph{{"node_count", node_count_},
                             {"edge_total", edge_total_},
                             {"dangling_edges", dangling_edges_},
                             {"edge_counts", edge_counts_}};
        std::string graph_body = graph.dump();
        std::uint32_t glen = static_cast<std::uint32_t>(graph_body.size());
        out.append(reinterpret_cast<const char*>(&glen), 4);
        out += graph_body;
        atomic_write_file(path, out);
    }

    static MetadataIndex load(const std::filesystem::path& path) {
        std::string data = read_file(path);
        if (data.size() < 16 || std::memcmp(data.data(), kMagic, 4) != 0)
            throw IoError("not a metadata index: " + path.string());
        std::uint64_t count;
        std::memcpy(&count, data.data() + 8, 8);
        MetadataIndex index;
        std::size_t pos = 16;
        auto next_blob = [&]() {
            if (pos + 4 > data.size()) throw IoError("truncated index: " + path.string());
            std::uint32_t len;
            std::memcpy(&len, data.data() + pos, 4);
            pos += 4;
            if (pos + len > data.size()) throw IoError("truncated index record: " + path.string());
            std::string_view body(data.data() + pos, len);
            pos += len;
            return body;
        };
        for (std::uint64_t i = 0; i < count; ++i) {
            DocumentRecord r = record_from_json(nlohmann::json::parse(next_blob()));
            index.records_.emplace(r.doc_id, std::move(r));
        }
        nlohmann::json graph = nlohmann::json::parse(next_blob());
        index.node_count_ = graph.value("node_count", std::uint64_t{0});
        index.edge_total_ = graph.value("edge_total", std::uint64_t{0});
        index.dangling_edges_ = graph.value("dangling_edges", std::uint64_t{0});
        if (graph.contains("edge_counts"))
            index.edge_counts_ = graph["edge_counts"].get<std::map<std::string, std::uint64_t>>();
        return index;
    }

private:
    std::map<std::string, DocumentRecord> records_;
    std::vector<std::string> replacements_;
    std::map<std::string, std::uint64_t> edge_counts_;
    std::uint64_t node_count_ = 0;
    std::uint64_t edge_total_ = 0;
    std::uint64_t dangling_edges_ = 0;
};

}  // namespace scicorpus
