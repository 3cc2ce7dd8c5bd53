#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "scicorpus/extract.hpp"
#include "scicorpus/gopher.hpp"
#include "scicorpus/langid.hpp"
#include "scicorpus/license.hpp"
#include "scicorpus/line_reader.hpp"
#include "scicorpus/metadata.hpp"
#include "scicorpus/minhash.hpp"
#include "scicorpus/snapshot.hpp"
#include "scicorpus/tei.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

// Canonical stage order; langfilter and quality share a rank, every other
// dependency is strict.
inline const std::vector<std::pair<std::string, int>>& stage_ranks() {
    static const std::vector<std::pair<std::string, int>> ranks = {
        {"manifest", 0}, {"acquire", 1}, {"structure", 2}, {"extract", 3},
        {"langfilter", 4}, {"quality", 4}, {"dedup", 5}, {"index", 6}, {"stats", 7},
    };
    return ranks;
}

inline int stage_rank(const std::string& stage) {
    for (const auto& [name, rank] : stage_ranks())
        if (name == stage) return rank;
    return -1;
}

// Stages that run as a single global unit rather than per partition.
inline bool stage_is_global(const std::string& stage) {
    return stage == "manifest" || stage == "dedup_merge" || stage == "stats";
}

struct LanguageConfig {
    double min_confidence = 0.80;
    std::optional<std::string> target = std::string("en");
    std::string model_path;  // empty: deterministic test backend
};

struct PipelineConfig {
    std::vector<std::string> stages;
    std::size_t n_partitions = 1;
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    std::filesystem::path scratch_dir;
    std::filesystem::path snapshot_path;  // manifest stage input
    std::string structurer_url;
    LanguageConfig language;
    GopherParams gopher;
    bool repetition_enabled = false;
    RepetitionParams repetition;
    DedupConfig dedup;
    std::string dedup_scope = "global";  // or "partition"
    ExtractionConfig extraction;
    std::size_t shard_size = 100000;
    bool emit_charts = false;

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.stages = j.value("stages", std::vector<std::string>{});
    c.n_partitions = j.value("n_partitions", std::size_t{1});
    nlohmann::json paths = j.value("paths", nlohmann::json::object());
    c.input_dir = paths.value("input", "");
    c.output_dir = paths.value("output", "");
    c.scratch_dir = paths.value("scratch", "");
    if (j.contains("manifest")) c.snapshot_path = j["manifest"].value("snapshot", "");
    c.structurer_url = j.value("structurer_url", "");
    if (j.contains("language")) {
        const nlohmann::json& l = j["language"];
        c.language.min_confidence = l.value("min_confidence", 0.80);
        if (l.contains("target")) {
            if (l["target"].is_null()) c.language.target.reset();
            else c.language.target = l["target"].get<std::string>();
        }
        c.language.model_path = l.value("model", "");
    }
    if (j.contains("gopher")) {
        const nlohmann::json& g = j["gopher"];
        c.gopher.min_words = g.value("min_words", c.gopher.min_words);
        c.gopher.max_words = g.value("max_words", c.gopher.max_words);
        c.gopher.min_mean_word_len = g.value("min_mean_word_len", c.gopher.min_mean_word_len);
        c.gopher.max_mean_word_len = g.value("max_mean_word_len", c.gopher.max_mean_word_len);
        c.gopher.max_symbol_word_ratio = g.value("max_symbol_word_ratio", c.gopher.max_symbol_word_ratio);
        c.gopher.max_bullet_line_frac = g.value("max_bullet_line_frac", c.gopher.max_bullet_line_frac);
        c.gopher.max_ellipsis_end_line_frac =
            g.value("max_ellipsis_end_line_frac", c.gopher.max_ellipsis_end_line_frac);
        c.gopher.min_alpha_word_frac = g.value("min_alpha_word_frac", c.gopher.min_alpha_word_frac);
        c.gopher.min_stop_word_hits = g.value("min_stop_word_hits", c.gopher.min_stop_word_hits);
    }
    if (j.contains("repetition")) c.repetition_enabled = j["repetition"].value("enabled", false);
    if (j.contains("dedup")) {
        const nlohmann::json& d = j["dedup"];
        c.dedup.num_hashes = d.value("num_hashes", c.dedup.num_hashes);
        c.dedup.bands = d.value("bands", c.dedup.bands);
        c.dedup.rows = d.value("rows", c.dedup.rows);
        c.dedup.similarity_target = d.value("similarity_target", c.dedup.similarity_target);
        c.dedup.ngram = d.value("ngram", c.dedup.ngram);
        c.dedup.seed = d.value("seed", c.dedup.seed);
        c.dedup_scope = d.value("scope", c.dedup_scope);
    }
    if (j.contains("extraction")) {
        const nlohmann::json& e = j["extraction"];
        c.extraction.include_captions = e.value("include_captions", true);
        c.extraction.exclude_formulas = e.value("exclude_formulas", true);
        c.extraction.exclude_table_bodies = e.value("exclude_table_bodies", true);
        c.extraction.keep_callouts = e.value("keep_callouts", true);
        c.extraction.include_headings = e.value("include_headings", true);
    }
    c.shard_size = j.value("shard_size", std::size_t{100000});
    c.emit_charts = j.value("emit_charts", false);
    return c;
}

inline nlohmann::json PipelineConfig::to_json() const {
    return nlohmann::json{
        {"stages", stages},
        {"n_partitions", n_partitions},
        {"paths",
         {{"input", input_dir.string()},
          {"output", output_dir.string()},
          {"scratch", scratch_dir.string()}}},
    };
}

struct UnitCounts {
    std::uint64_t in = 0;
    std::uint64_t out = 0;
    std::uint64_t rejected = 0;
    std::uint64_t errored = 0;

    UnitCounts& operator+=(const UnitCounts& o) {
        in += o.in;
        out += o.out;
        rejected += o.rejected;
        errored += o.errored;
        return *this;
    }

    bool conserved() const { return in == out + rejected + errored; }
};

struct WorkUnit {
    std::string stage;
    std::size_t partition = 0;  // 0 for global units
};

struct ExecutionPlan {
    PipelineConfig config;
    std::vector<WorkUnit> units;
};

// Validates the config and lays out (stage, partition) units. No side
// effects beyond reading the filesystem.
inline ExecutionPlan plan(const PipelineConfig& config) {
    if (config.n_partitions == 0) throw ConfigError("n_partitions must be >= 1");
    if (config.stages.empty()) throw ConfigError("stages list is empty");
    int prev_rank = -1;
    for (const std::string& stage : config.stages) {
        int rank = stage_rank(stage);
        if (rank < 0) throw ConfigError("unknown stage '" + stage + "'");
        if (rank < prev_rank)
            throw ConfigError("stage '" + stage + "' violates the pipeline dependency order");
        prev_rank = rank;
    }
    config.dedup.validate();  // names the dedup config on violation
    if (config.scratch_dir.empty()) throw ConfigError("paths.scratch is required");
    for (const std::string& stage : config.stages) {
        if (stage == "manifest") {
            if (config.snapshot_path.empty() || !std::filesystem::exists(config.snapshot_path))
                throw ConfigError("manifest.snapshot path missing or does not exist");
        }
        if (stage == "extract" && !std::filesystem::is_directory(config.input_dir) &&
            std::find(config.stages.begin(), config.stages.end(), "structure") ==
                config.stages.end())
            throw ConfigError("paths.input directory does not exist");
        if ((stage == "index" || stage == "stats") && config.output_dir.empty())
            throw ConfigError("paths.output is required for stage '" + stage + "'");
    }

    ExecutionPlan p;
    p.config = config;
    for (const std::string& stage : config.stages) {
        if (stage_is_global(stage)) {
            p.units.push_back({stage, 0});
        } else {
            for (std::size_t i = 0; i < config.n_partitions; ++i) p.units.push_back({stage, i});
            if (stage == "dedup") p.units.push_back({"dedup_merge", 0});
        }
    }
    return p;
}

struct RunReport {
    std::map<std::string, UnitCounts> stage_counts;
    std::vector<std::string> failed_units;

    bool ok() const { return failed_units.empty(); }
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config) : config_(std::move(config)) {}

    // Executes the plan with a bounded worker pool per stage; stage groups
    // are barriers. Completed units are skipped on re-run unless `force`.
    RunReport run(const ExecutionPlan& plan, std::size_t parallelism, bool force = false,
                  const std::string& stop_after = {}) {
        RunReport report;
        std::filesystem::create_directories(checkpoint_dir());

        // group units by stage, preserving order
        std::vector<std::pair<std::string, std::vector<WorkUnit>>> groups;
        for (const WorkUnit& unit : plan.units) {
            if (groups.empty() || groups.back().first != unit.stage)
                groups.push_back({unit.stage, {}});
            groups.back().second.push_back(unit);
        }

        for (const auto& [stage, units] : groups) {
            std::mutex mu;
            std::atomic<std::size_t> cursor{0};
            auto worker = [&]() {
                while (true) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= units.size()) break;
                    const WorkUnit& unit = units[i];
                    std::string unit_name = unit.stage + "/" + std::to_string(unit.partition);
                    std::optional<Checkpoint> existing = load_checkpoint(unit);
                    if (!force && existing && existing->status == "done") {
                        std::lock_guard<std::mutex> lock(mu);
                        report.stage_counts[unit.stage] += existing->counts;
                        continue;
                    }
                    try {
                        UnitCounts counts = execute(unit);
                        save_checkpoint(unit, "done", counts);
                        std::lock_guard<std::mutex> lock(mu);
                        report.stage_counts[unit.stage] += counts;
                    } catch (const std::exception& e) {
                        save_checkpoint(unit, "failed", {});
                        std::lock_guard<std::mutex> lock(mu);
                        report.failed_units.push_back(unit_name + ": " + e.what());
                    }
                }
            };
            std::vector<std::thread> pool;
            std::size_t n = std::max<std::size_t>(1, std::min(parallelism, units.size()));
            for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
            for (std::thread& t : pool) t.join();
            if (!report.failed_units.empty()) break;  // later stages depend on this one
            if (!stop_after.empty() && stage == stop_after) break;
        }
        return report;
    }

    UnitCounts execute(const WorkUnit& unit) {
        if (unit.stage == "manifest") return run_manifest();
        if (unit.stage == "extract") return run_extract(unit.partition);
        if (unit.stage == "langfilter") return run_langfilter(unit.partition);
        if (unit.stage == "quality") return run_quality(unit.partition);
        if (unit.stage == "dedup") return run_dedup_signatures(unit.partition);
        if (unit.stage == "dedup_merge") return run_dedup_merge();
        if (unit.stage == "index") return run_index(unit.partition);
        if (unit.stage == "stats") return run_stats();
        throw ConfigError("stage '" + unit.stage + "' has no local executor");
    }

    const PipelineConfig& config() const { return config_; }

    // --- stage implementations (public so CLI subcommands can call them) ---

    UnitCounts run_manifest() {
        UnitCounts counts;
        AttritionReport attrition;
        std::uint64_t malformed = 0;
        std::vector<std::string> partitions(config_.n_partitions);
        LineReader reader(config_.snapshot_path);
        parse_snapshot_stream(reader, [&](SnapshotItem item) {
            ++counts.in;
            if (const auto* bad = std::get_if<MalformedLine>(&item)) {
                ++malformed;
                ++counts.errored;
                (void)bad;
                return;
            }
            const SnapshotEntry& entry = std::get<SnapshotEntry>(item);
            if (!filter_entry(entry, attrition)) {
                ++counts.rejected;
                return;
            }
            ++counts.out;
            std::size_t p = partition_of(entry.doi, config_.n_partitions);
            partitions[p] += snapshot_entry_to_json(entry).dump() + "\n";
        });
        for (std::size_t p = 0; p < config_.n_partitions; ++p)
            atomic_write_file(manifest_path(p), partitions[p]);
        std::string report = attrition.to_text() + "malformed " + std::to_string(malformed) + "\n";
        atomic_write_file(config_.scratch_dir / "manifest" / "attrition.txt", report);
        return counts;
    }

    // Every TEI file in the input tree whose id hashes into this partition.
    std::vector<std::filesystem::path> partition_inputs(std::size_t partition) const {
        std::vector<std::filesystem::path> files;
        auto scan = [&](const std::filesystem::path& dir) {
            if (!std::filesystem::is_directory(dir)) return;
            for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
                if (!entry.is_regular_file()) continue;
                std::string name = entry.path().filename().string();
                if (name.find(".xml") == std::string::npos) continue;
                if (partition_of(doc_id_for(entry.path()), config_.n_partitions) == partition)
                    files.push_back(entry.path());
            }
        };
        scan(config_.input_dir);
        scan(config_.scratch_dir / "tei");
        std::sort(files.begin(), files.end());
        return files;
    }

    static std::string doc_id_for(const std::filesystem::path& path) {
        std::string name = path.filename().string();
        for (const char* suffix : {".tei.xml.gz", ".tei.xml", ".jats.xml", ".latex.xml",
                                   ".xml.gz", ".xml"}) {
            std::string_view s(suffix);
            if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0)
                return name.substr(0, name.size() - s.size());
        }
        return name;
    }

    static SourceKind source_kind_for(const std::filesystem::path& path) {
        std::string name = path.filename().string();
        if (name.find(".jats.xml") != std::string::npos) return SourceKind::jats_xml;
        if (name.find(".latex.xml") != std::string::npos) return SourceKind::latex_bundle;
        return SourceKind::pdf_unpaywall;
    }

    UnitCounts run_extract(std::size_t partition) {
        UnitCounts counts;
        std::string records, bib_records, edge_records, errors;
        for (const std::filesystem::path& path : partition_inputs(partition)) {
            ++counts.in;
            std::string doc_id = doc_id_for(path);
            try {
                TeiDocument doc = [&] {
                    std::string xml;
                    {  // ByteSource handles gzip transparently
                        ByteSource src(path);
                        char buf[1 << 16];
                        std::size_t n;
                        while ((n = src.read(buf, sizeof buf)) > 0) xml.append(buf, n);
                    }
                    return parse_tei(xml);
                }();
                ExtractedText text = stream_to_text(doc, doc_id, config_.extraction);
                std::vector<BibEntry> bib = extract_bibliography(doc);
                std::vector<CitationEdge> edges = extract_citation_edges(doc, doc_id);

                nlohmann::json rec = extracted_to_json(text, source_kind_name(source_kind_for(path)));
                if (!doc.header.title.empty()) rec["title"] = doc.header.title;
                if (doc.header.doi) rec["doi"] = *doc.header.doi;
                if (doc.header.license_raw) rec["license_raw"] = *doc.header.license_raw;
                if (doc.header.declared_language) rec["declared_language"] = *doc.header.declared_language;
                records += rec.dump() + "\n";

                for (const BibEntry& b : bib) {
                    nlohmann::json bj{{"doc_id", doc_id}, {"local_id", b.local_id},
                                      {"raw", b.raw_citation}};
                    if (b.doi) bj["doi"] = *b.doi;
                    bib_records += bj.dump() + "\n";
                }
                for (const CitationEdge& e : edges) {
                    edge_records += nlohmann::json{{"doc_id", e.doc_id},
                                                   {"target", e.target_local_id.value_or("")},
                                                   {"resolved", e.resolved},
                                                   {"sentence", e.sentence_text},
                                                   {"span", {e.span_start, e.span_end}}}
                                        .dump() +
                                    "\n";
                }
                ++counts.out;
            } catch (const std::exception& e) {
                errors += nlohmann::json{{"id", doc_id}, {"error", e.what()}}.dump() + "\n";
                ++counts.errored;
            }
        }
        atomic_write_file(stage_file("extract", "part", partition), records);
        atomic_write_file(stage_file("extract", "bib", partition), bib_records);
        atomic_write_file(stage_file("extract", "edges", partition), edge_records);
        atomic_write_file(stage_file("extract", "errors", partition), errors);
        return counts;
    }

    UnitCounts run_langfilter(std::size_t partition) {
        UnitCounts counts;
        std::unique_ptr<LangIdBackend> backend = make_backend(config_.language.model_path);
        std::string kept, rejected;
        for_each_record(stage_file("extract", "part", partition), [&](nlohmann::json rec) {
            ++counts.in;
            std::string text = rec.value("text", "");
            std::vector<LineScore> scores;
            std::size_t idx = 0;
            for (std::string_view line : split_lines(text)) {
                if (auto score = classify_line(*backend, line, idx)) scores.push_back(*score);
                ++idx;
            }
            if (scores.empty()) {
                rec["verdict"] = {{"passed", false}, {"failed_rule", "no_text"}, {"measured", 0.0}};
                rejected += rec.dump() + "\n";
                ++counts.rejected;
                return;
            }
            LanguageProfile profile = aggregate_document_language(scores);
            FilterVerdict verdict = language_gate(profile, rec.value("id", ""),
                                                  config_.language.min_confidence,
                                                  config_.language.target);
            rec["lang"] = profile.top_language;
            rec["lang_score"] = profile.top_score;
            if (verdict.passed) {
                kept += rec.dump() + "\n";
                ++counts.out;
            } else {
                rec["verdict"] = {{"passed", false},
                                  {"failed_rule", *verdict.failed_rule},
                                  {"measured", verdict.measured_value.value_or(0)}};
                rejected += rec.dump() + "\n";
                ++counts.rejected;
            }
        });
        atomic_write_file(stage_file("lang", "kept", partition), kept);
        atomic_write_file(stage_file("lang", "rejected", partition), rejected);
        return counts;
    }

    UnitCounts run_quality(std::size_t partition) {
        UnitCounts counts;
        std::string kept, rejected;
        std::map<std::string, std::uint64_t> audit;
        for_each_record(stage_file("lang", "kept", partition), [&](nlohmann::json rec) {
            ++counts.in;
            ExtractedText text;
            text.doc_id = rec.value("id", "");
            text.text = rec.value("text", "");
            FilterVerdict verdict = gopher_quality(text, config_.gopher);
            if (verdict.passed && config_.repetition_enabled)
                verdict = gopher_repetition(text, config_.repetition);
            if (verdict.passed) {
                kept += rec.dump() + "\n";
                ++counts.out;
            } else {
                ++audit[*verdict.failed_rule];
                rec["verdict"] = {{"passed", false},
                                  {"failed_rule", *verdict.failed_rule},
                                  {"measured", verdict.measured_value.value_or(0)}};
                rejected += rec.dump() + "\n";
                ++counts.rejected;
            }
        });
        atomic_write_file(stage_file("quality", "kept", partition), kept);
        atomic_write_file(stage_file("quality", "rejected", partition), rejected);
        atomic_write_file(stage_file("quality", "audit", partition),
                          nlohmann::json(audit).dump() + "\n");
        return counts;
    }

    UnitCounts run_dedup_signatures(std::size_t partition) {
        UnitCounts counts;
        MinHashFamily family(config_.dedup);
        std::vector<MinHashSignature> sigs;
        for_each_record(stage_file("quality", "kept", partition), [&](nlohmann::json rec) {
            ++counts.in;
            std::string doc_id = rec.value("id", "");
            std::vector<std::string> tokens = tokenize_words(rec.value("text", ""));
            if (tokens.empty()) {
                ++counts.errored;
                return;
            }
            sigs.push_back(signature(shingle(tokens, doc_id, config_.dedup.ngram,
                                             config_.dedup.seed),
                                     family));
            ++counts.out;
        });
        atomic_write_file(config_.scratch_dir / "dedup" /
                              ("sig_" + partition_tag(partition) + ".bin"),
                          write_signature_shard(sigs, config_.dedup));
        return counts;
    }

    UnitCounts run_dedup_merge() {
        UnitCounts counts;
        auto clusters_for = [&](const std::vector<MinHashSignature>& sigs) {
            return cluster(collision_pairs(sigs, config_.dedup));
        };

        std::vector<DuplicateCluster> clusters;
        if (config_.dedup_scope == "partition") {
            for (std::size_t p = 0; p < config_.n_partitions; ++p) {
                std::vector<MinHashSignature> sigs = read_signature_shard(
                    read_file(config_.scratch_dir / "dedup" / ("sig_" + partition_tag(p) + ".bin")),
                    config_.dedup);
                counts.in += sigs.size();
                for (DuplicateCluster& c : clusters_for(sigs)) clusters.push_back(std::move(c));
            }
            std::sort(clusters.begin(), clusters.end(),
                      [](const DuplicateCluster& a, const DuplicateCluster& b) {
                          return a.survivor_doc_id < b.survivor_doc_id;
                      });
        } else {
            std::vector<MinHashSignature> all;
            for (std::size_t p = 0; p < config_.n_partitions; ++p) {
                std::vector<MinHashSignature> sigs = read_signature_shard(
                    read_file(config_.scratch_dir / "dedup" / ("sig_" + partition_tag(p) + ".bin")),
                    config_.dedup);
                for (MinHashSignature& s : sigs) all.push_back(std::move(s));
            }
            std::sort(all.begin(), all.end(),
                      [](const MinHashSignature& a, const MinHashSignature& b) {
                          return a.doc_id < b.doc_id;
                      });
            counts.in = all.size();
            clusters = clusters_for(all);
        }

        std::string removal, report;
        std::uint64_t removed = 0;
        for (const DuplicateCluster& c : clusters) {
            report += c.survivor_doc_id + " ->";
            for (const std::string& m : c.member_doc_ids) {
                report += " " + m;
                if (m != c.survivor_doc_id) {
                    removal += m + "\n";
                    ++removed;
                }
            }
            report += "\n";
        }
        atomic_write_file(config_.scratch_dir / "dedup" / "removal.txt", removal);
        atomic_write_file(config_.scratch_dir / "dedup" / "clusters.txt", report);
        counts.rejected = removed;
        counts.out = counts.in - removed;
        return counts;
    }

    std::set<std::string> load_removal_list() const {
        std::set<std::string> removal;
        std::filesystem::path path = config_.scratch_dir / "dedup" / "removal.txt";
        if (std::filesystem::exists(path)) {
            std::string content = read_file(path);
            for (std::string_view line : split_lines(content))
                if (!trim(line).empty()) removal.insert(std::string(trim(line)));
        }
        return removal;
    }

    std::map<std::string, std::string> load_cluster_map() const {
        std::map<std::string, std::string> cluster_of;
        std::filesystem::path path = config_.scratch_dir / "dedup" / "clusters.txt";
        if (!std::filesystem::exists(path)) return cluster_of;
        std::string content = read_file(path);
        for (std::string_view line : split_lines(content)) {
            std::size_t arrow = line.find(" ->");
            if (arrow == std::string_view::npos) continue;
            std::string survivor(line.substr(0, arrow));
            for (std::string_view m : whitespace_tokens(line.substr(arrow + 3)))
                cluster_of[std::string(m)] = survivor;
        }
        return cluster_of;
    }

    UnitCounts run_index(std::size_t partition) {
        UnitCounts counts;
        std::set<std::string> removal = load_removal_list();
        std::map<std::string, std::string> cluster_of = load_cluster_map();

        // verdicts recorded by earlier stages
        std::map<std::string, VerdictSummary> lang_fail, quality_fail;
        std::map<std::string, std::pair<std::string, double>> lang_of;
        auto read_verdicts = [&](const std::filesystem::path& path, const char* stage,
                                 std::map<std::string, VerdictSummary>& sink) {
            for_each_record(path, [&](nlohmann::json rec) {
                std::string id = rec.value("id", "");
                if (rec.contains("lang"))
                    lang_of[id] = {rec.value("lang", ""), rec.value("lang_score", 0.0)};
                if (rec.contains("verdict"))
                    sink[id] = VerdictSummary{stage, false,
                                              rec["verdict"].value("failed_rule", ""),
                                              rec["verdict"].value("measured", 0.0)};
            });
        };
        read_verdicts(stage_file("lang", "kept", partition), "langfilter", lang_fail);
        read_verdicts(stage_file("lang", "rejected", partition), "langfilter", lang_fail);
        read_verdicts(stage_file("quality", "rejected", partition), "quality", quality_fail);

        MetadataIndex index;
        std::string corpus_shard;
        std::size_t shard_docs = 0, shard_no = 0;
        auto flush_shard = [&](bool final_flush) {
            if (!final_flush && shard_docs < config_.shard_size) return;
            if (shard_docs == 0 && shard_no > 0) return;
            atomic_write_file(config_.output_dir / "corpus" /
                                  ("part_" + partition_tag(partition) + "_shard_" +
                                   std::to_string(shard_no) + ".jsonl"),
                              corpus_shard);
            corpus_shard.clear();
            shard_docs = 0;
            ++shard_no;
        };

        for_each_record(stage_file("extract", "part", partition), [&](nlohmann::json rec) {
            ++counts.in;
            std::string id = rec.value("id", "");
            DocumentRecord r;
            r.doc_id = id;
            if (rec.contains("doi")) r.doi = rec["doi"].get<std::string>();
            r.source_kind = source_kind_from_name(rec.value("source_kind", "pdf_unpaywall"));
            if (rec.contains("title")) r.title = rec["title"].get<std::string>();
            if (rec.contains("license_raw")) r.license_raw = rec["license_raw"].get<std::string>();
            r.license_class = normalize_license(r.license_raw.value_or(""));
            if (rec.contains("declared_language"))
                r.declared_language = rec["declared_language"].get<std::string>();
            r.whitespace_token_count = rec.value("token_count", std::uint64_t{0});
            r.url = rec.value("url", "");
            if (auto it = lang_of.find(id); it != lang_of.end()) {
                r.detected_language = it->second.first;
                r.detected_confidence = it->second.second;
            }
            bool passed = true;
            if (auto it = lang_fail.find(id); it != lang_fail.end()) {
                r.filter_verdicts.push_back(it->second);
                passed = false;
            } else {
                r.filter_verdicts.push_back({"langfilter", true, "", 0});
            }
            if (passed) {
                if (auto it = quality_fail.find(id); it != quality_fail.end()) {
                    r.filter_verdicts.push_back(it->second);
                    passed = false;
                } else {
                    r.filter_verdicts.push_back({"quality", true, "", 0});
                }
            }
            bool survivor = removal.count(id) == 0;
            if (auto it = cluster_of.find(id); it != cluster_of.end()) r.dedup_cluster = it->second;
            if (passed && survivor) {
                r.filter_verdicts.push_back({"dedup", true, "", 0});
                corpus_shard += nlohmann::json{{"id", id},
                                               {"text", rec.value("text", "")},
                                               {"lang", r.detected_language},
                                               {"lang_score", r.detected_confidence},
                                               {"token_count", r.whitespace_token_count},
                                               {"source_kind", source_kind_name(r.source_kind)},
                                               {"license_class",
                                                license_class_name(r.license_class)},
                                               {"url", r.url}}
                                     .dump() +
                                "\n";
                ++shard_docs;
                ++counts.out;
                flush_shard(false);
            } else {
                if (passed && !survivor)
                    r.filter_verdicts.push_back({"dedup", false, "duplicate", 0});
                ++counts.rejected;
            }
            index.upsert_document(std::move(r));
        });
        flush_shard(true);

        // citation graph for this partition
        std::vector<BibEntry> nodes;
        for_each_record(stage_file("extract", "bib", partition), [&](nlohmann::json rec) {
            BibEntry b;
            b.local_id = rec.value("local_id", "");
            b.raw_citation = rec.value("raw", "");
            if (rec.contains("doi")) b.doi = rec["doi"].get<std::string>();
            nodes.push_back(std::move(b));
        });
        std::vector<CitationEdge> edges;
        for_each_record(stage_file("extract", "edges", partition), [&](nlohmann::json rec) {
            CitationEdge e;
            e.doc_id = rec.value("doc_id", "");
            std::string target = rec.value("target", "");
            if (!target.empty()) e.target_local_id = target;
            e.resolved = rec.value("resolved", false);
            e.sentence_text = rec.value("sentence", "");
            edges.push_back(std::move(e));
        });
        index.store_citation_graph(nodes, edges);
        index.save(config_.scratch_dir / "index" / ("part_" + partition_tag(partition) + ".idx"));
        return counts;
    }

    UnitCounts run_stats() {
        UnitCounts counts;
        StatsReport corpus;  // filter survivors only
        StatsReport all_docs;
        for (std::size_t p = 0; p < config_.n_partitions; ++p) {
            MetadataIndex index = MetadataIndex::load(config_.scratch_dir / "index" /
                                                      ("part_" + partition_tag(p) + ".idx"));
            corpus += index.compute_corpus_stats([](const DocumentRecord& r) {
                for (const VerdictSummary& v : r.filter_verdicts)
                    if (!v.passed) return false;
                return !r.filter_verdicts.empty();
            });
            all_docs += index.compute_corpus_stats();
        }
        counts.in = all_docs.doc_count;
        counts.out = corpus.doc_count;
        counts.rejected = all_docs.doc_count - corpus.doc_count;
        atomic_write_file(config_.output_dir / "stats.txt", corpus.to_table());
        atomic_write_file(config_.output_dir / "stats.jsonl", corpus.to_jsonl());
        if (config_.emit_charts) {
            atomic_write_file(config_.output_dir / "language_histogram.svg",
                              histogram_svg(corpus.language_histogram, "Language distribution"));
            atomic_write_file(config_.output_dir / "license_histogram.svg",
                              histogram_svg(corpus.license_histogram, "License distribution"));
        }
        return counts;
    }

    std::filesystem::path manifest_path(std::size_t partition) const {
        return config_.scratch_dir / "manifest" / ("partition_" + partition_tag(partition) + ".jsonl");
    }

private:
    struct Checkpoint {
        std::string status;
        UnitCounts counts;
    };

    std::filesystem::path checkpoint_dir() const { return config_.scratch_dir / "checkpoints"; }

    std::filesystem::path checkpoint_path(const WorkUnit& unit) const {
        return checkpoint_dir() / (unit.stage + "_" + partition_tag(unit.partition) + ".json");
    }

    std::optional<Checkpoint> load_checkpoint(const WorkUnit& unit) const {
        std::filesystem::path path = checkpoint_path(unit);
        if (!std::filesystem::exists(path)) return std::nullopt;
        nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        Checkpoint cp;
        cp.status = j.value("status", "failed");
        cp.counts.in = j.value("in", std::uint64_t{0});
        cp.counts.out = j.value("out", std::uint64_t{0});
        cp.counts.rejected = j.value("rejected", std::uint64_t{0});
        cp.counts.errored = j.value("errored", std::uint64_t{0});
        return cp;
    }

    void save_checkpoint(const WorkUnit& unit, const std::string& status, UnitCounts counts) {
        nlohmann::json j{{"stage", unit.stage}, {"partition", unit.partition},
                         {"status", status},  {"in", counts.in},
                         {"out", counts.out}, {"rejected", counts.rejected},
                         {"errored", counts.errored}};
        atomic_write_file(checkpoint_path(unit), j.dump() + "\n");
    }

    std::string partition_tag(std::size_t p) const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04zu", p);
        return buf;
    }

    std::filesystem::path stage_file(const char* stage, const char* kind,
                                     std::size_t partition) const {
        return config_.scratch_dir / stage /
               (std::string(kind) + "_" + partition_tag(partition) + ".jsonl");
    }

    void for_each_record(const std::filesystem::path& path,
                         const std::function<void(nlohmann::json)>& fn) const {
        if (!std::filesystem::exists(path)) return;
        LineReader reader(path);
        std::string line;
        while (reader.next(line)) {
            if (trim(line).empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (!j.is_discarded()) fn(std::move(j));
        }
    }

    PipelineConfig config_;
};

}  // namespace scicorpus
