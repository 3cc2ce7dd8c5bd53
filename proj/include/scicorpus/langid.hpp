#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scicorpus/util.hpp"

namespace scicorpus {

class NoTextError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LineScore {
    std::size_t line_index = 0;
    std::string predicted_language;
    double confidence = 0.0;  // in [0,1]
    std::size_t char_count = 0;
};

struct LanguageProfile {
    std::map<std::string, double> per_language_score;
    std::string top_language;
    double top_score = 0.0;
};

// Line classifier contract. Backends must be safe to call concurrently from
// many threads once constructed.
class LangIdBackend {
public:
    virtual ~LangIdBackend() = default;
    // Top label and confidence for a non-empty line.
    virtual std::pair<std::string, double> classify(std::string_view line) const = 0;
    virtual std::string name() const = 0;
};

namespace detail {

inline std::vector<std::string> lower_words(std::string_view line) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : line) {
        if (std::isspace(c) || (std::ispunct(c) && c != '\'')) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

}  // namespace detail

// Deterministic stop-word frequency backend. The per-language tables are
// pairwise disjoint by construction, so a line hitting only one table scores
// confidence 1.0. Ships so the pipeline is testable without a model file.
class StopwordBackend : public LangIdBackend {
public:
    StopwordBackend() {
        add("en", {"the", "be", "to", "of", "and", "that", "have", "with", "not",
                   "you", "this", "from", "they", "would", "there", "their"});
        add("fr", {"le", "la", "les", "des", "une", "est", "sur", "dans", "pas",
                   "vous", "avec", "cette", "nous", "mais", "leur", "ont"});
        add("de", {"der", "die", "das", "und", "ist", "nicht", "ein", "eine",
                   "mit", "auf", "sich", "werden", "auch", "dem", "wird", "bei"});
        add("es", {"el", "los", "las", "una", "por", "como", "pero", "muy",
                   "cuando", "todo", "esta", "ser", "entre", "hasta", "desde", "porque"});
        add("it", {"il", "gli", "che", "di", "non", "per", "sono", "questo",
                   "anche", "della", "nella", "essere", "piu", "dopo", "hanno", "loro"});
        add("pt", {"os", "as", "um", "uma", "nao", "sao", "voce", "tambem",
                   "isso", "para", "pois", "quando", "pelo", "seus", "ainda", "muito"});
    }

    std::pair<std::string, double> classify(std::string_view line) const override {
        std::map<std::string, std::size_t> hits;
        std::size_t total = 0;
        for (const std::string& w : detail::lower_words(line)) {
            auto it = table_.find(w);
            if (it != table_.end()) {
                ++hits[it->second];
                ++total;
            }
        }
        if (total == 0) return {"und", 0.0};
        std::string best;
        std::size_t best_hits = 0;
        for (const auto& [lang, n] : hits) {
            if (n > best_hits) {  // ties resolved lexicographically via map order
                best = lang;
                best_hits = n;
            }
        }
        return {best, static_cast<double>(best_hits) / static_cast<double>(total)};
    }

    std::string name() const override { return "stopword-test-backend"; }

private:
    void add(const std::string& lang, std::initializer_list<const char*> words) {
        for (const char* w : words) table_.emplace(w, lang);
    }

    std::unordered_map<std::string, std::string> table_;
};

// Adapter for an external supervised classifier exported as a weighted word
// table: one `language<TAB>word<TAB>weight` entry per line.
class FileModelBackend : public LangIdBackend {
public:
    explicit FileModelBackend(const std::filesystem::path& model_path) {
        std::ifstream in(model_path);
        if (!in) throw ConfigError("cannot load language model " + model_path.string());
        std::string line;
        while (std::getline(in, line)) {
            std::string_view v = trim(line);
            if (v.empty() || v[0] == '#') continue;
            std::size_t t1 = v.find('\t');
            std::size_t t2 = v.find('\t', t1 + 1);
            if (t1 == std::string_view::npos || t2 == std::string_view::npos)
                throw ConfigError("malformed model line: " + line);
            std::string lang(v.substr(0, t1));
            std::string word(v.substr(t1 + 1, t2 - t1 - 1));
            double weight = std::stod(std::string(v.substr(t2 + 1)));
            weights_[word][lang] += weight;
        }
        if (weights_.empty()) throw ConfigError("empty language model " + model_path.string());
    }

    std::pair<std::string, double> classify(std::string_view line) const override {
        std::map<std::string, double> score;
        double total = 0;
        for (const std::string& w : detail::lower_words(line)) {
            auto it = weights_.find(w);
            if (it == weights_.end()) continue;
            for (const auto& [lang, wt] : it->second) {
                score[lang] += wt;
                total += wt;
            }
        }
        if (total <= 0) return {"und", 0.0};
        std::string best;
        double best_score = -1;
        for (const auto& [lang, s] : score) {
            if (s > best_score) {
                best = lang;
                best_score = s;
            }
        }
        return {best, best_score / total};
    }

    std::string name() const override { return "file-model-backend"; }

private:
    std::unordered_map<std::string, std::map<std::string, double>> weights_;
};

inline std::unique_ptr<LangIdBackend> make_backend(const std::string& model_path) {
    if (model_path.empty()) return std::make_unique<StopwordBackend>();
    return std::make_unique<FileModelBackend>(model_path);
}

// Empty-after-trim lines are skipped and contribute zero weight.
inline std::optional<LineScore> classify_line(const LangIdBackend& backend,
                                              std::string_view line, std::size_t line_index) {
    if (trim(line).empty()) return std::nullopt;
    auto [lang, confidence] = backend.classify(line);
    return LineScore{line_index, std::move(lang), confidence, utf8_length(line)};
}

// Char-weighted convex combination of per-line confidences:
//   score[L] = sum over lines predicted L of (chars * confidence) / total chars.
// Ties on the argmax break toward the lexicographically smaller code.
inline LanguageProfile aggregate_document_language(const std::vector<LineScore>& scores) {
    if (scores.empty()) throw NoTextError("no classifiable lines in document");
    double total_chars = 0;
    for (const LineScore& s : scores) total_chars += static_cast<double>(s.char_count);
    LanguageProfile profile;
    for (const LineScore& s : scores)
        profile.per_language_score[s.predicted_language] +=
            static_cast<double>(s.char_count) * s.confidence / total_chars;
    for (const auto& [lang, score] : profile.per_language_score) {
        if (score > profile.top_score) {  // map order makes ties lexicographic
            profile.top_language = lang;
            profile.top_score = score;
        }
    }
    return profile;
}

}  // namespace scicorpus
