#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "scicorpus/extract.hpp"
#include "scicorpus/langid.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

struct FilterVerdict {
    std::string doc_id;
    bool passed = true;
    std::optional<std::string> failed_rule;
    std::optional<double> measured_value;

    static FilterVerdict pass(std::string doc_id) { return {std::move(doc_id), true, {}, {}}; }
    static FilterVerdict fail(std::string doc_id, std::string rule, double measured) {
        return {std::move(doc_id), false, std::move(rule), measured};
    }
};

// Confidence gate runs before quality rules; the threshold comparison is
// pinned as >= (a document at exactly the threshold passes).
inline FilterVerdict language_gate(const LanguageProfile& profile, std::string doc_id,
                                   double min_confidence = 0.80,
                                   const std::optional<std::string>& target_language = "en") {
    if (profile.top_score < min_confidence)
        return FilterVerdict::fail(std::move(doc_id), "low_lang_confidence", profile.top_score);
    if (target_language && profile.top_language != *target_language)
        return FilterVerdict::fail(std::move(doc_id), "wrong_language", profile.top_score);
    return FilterVerdict::pass(std::move(doc_id));
}

struct GopherParams {
    std::size_t min_words = 50;
    std::size_t max_words = 100000;
    double min_mean_word_len = 3.0;
    double max_mean_word_len = 10.0;
    double max_symbol_word_ratio = 0.1;  // applied to '#' and to ellipses
    double max_bullet_line_frac = 0.9;
    double max_ellipsis_end_line_frac = 0.3;
    double min_alpha_word_frac = 0.8;
    std::set<std::string> required_stop_words = {"the", "be", "to", "of",
                                                 "and", "that", "have", "with"};
    std::size_t min_stop_word_hits = 2;  // distinct members of the set present
};

namespace gopher_detail {

inline std::string strip_terminal_punct(std::string_view word) {
    static const std::string punct = ".,;:!?\"')]}";
    std::size_t end = word.size();
    while (end > 0 && punct.find(word[end - 1]) != std::string::npos) --end;
    return std::string(word.substr(0, end));
}

inline bool has_alpha(std::string_view word) {
    for (unsigned char c : word)
        if (std::isalpha(c) || c >= 0x80) return true;  // non-ASCII counts as letter
    return false;
}

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

inline bool is_bullet_line(std::string_view line) {
    std::string_view t = trim(line);
    return starts_with(t, "•") || starts_with(t, "‣") || starts_with(t, "▪") ||
           starts_with(t, "- ") || starts_with(t, "* ");
}

inline bool ends_with_ellipsis(std::string_view line) {
    std::string_view t = trim(line);
    return t.size() >= 3 && (t.substr(t.size() - 3) == "..." ||
                             t.substr(t.size() - 3) == "…");
}

}  // namespace gopher_detail

// Rules run in a fixed order so failed_rule attribution is reproducible:
// word count, mean word length, symbol ratios, bullet lines, ellipsis lines,
// alpha-word fraction, stop words.
inline std::vector<FilterVerdict> gopher_quality_all(const ExtractedText& text,
                                                     const GopherParams& params) {
    namespace gd = gopher_detail;
    std::vector<FilterVerdict> failures;
    const std::string& doc_id = text.doc_id;
    std::vector<std::string_view> words = whitespace_tokens(text.text);
    double word_count = static_cast<double>(words.size());

    if (words.size() < params.min_words || words.size() > params.max_words)
        failures.push_back(FilterVerdict::fail(doc_id, "word_count", word_count));

    if (!words.empty()) {
        double len_sum = 0;
        for (std::string_view w : words) len_sum += static_cast<double>(utf8_length(gd::strip_terminal_punct(w)));
        double mean_len = len_sum / word_count;
        if (mean_len < params.min_mean_word_len || mean_len > params.max_mean_word_len)
            failures.push_back(FilterVerdict::fail(doc_id, "mean_word_length", mean_len));

        double hash_ratio = static_cast<double>(gd::count_occurrences(text.text, "#")) / word_count;
        if (hash_ratio > params.max_symbol_word_ratio)
            failures.push_back(FilterVerdict::fail(doc_id, "hash_word_ratio", hash_ratio));
        double ellipsis_count = static_cast<double>(gd::count_occurrences(text.text, "...") +
                                                    gd::count_occurrences(text.text, "…"));
        double ellipsis_ratio = ellipsis_count / word_count;
        if (ellipsis_ratio > params.max_symbol_word_ratio)
            failures.push_back(FilterVerdict::fail(doc_id, "ellipsis_word_ratio", ellipsis_ratio));
    }

    std::vector<std::string_view> lines = split_lines(text.text);
    std::size_t nonempty = 0, bullet = 0, ellipsis_end = 0;
    for (std::string_view line : lines) {
        if (trim(line).empty()) continue;
        ++nonempty;
        if (gd::is_bullet_line(line)) ++bullet;
        if (gd::ends_with_ellipsis(line)) ++ellipsis_end;
    }
    if (nonempty > 0) {
        double bullet_frac = static_cast<double>(bullet) / static_cast<double>(nonempty);
        if (bullet_frac > params.max_bullet_line_frac)
            failures.push_back(FilterVerdict::fail(doc_id, "bullet_lines", bullet_frac));
        double ellipsis_frac = static_cast<double>(ellipsis_end) / static_cast<double>(nonempty);
        if (ellipsis_frac > params.max_ellipsis_end_line_frac)
            failures.push_back(FilterVerdict::fail(doc_id, "ellipsis_end_lines", ellipsis_frac));
    }

    if (!words.empty()) {
        std::size_t alpha = 0;
        for (std::string_view w : words)
            if (gd::has_alpha(w)) ++alpha;
        double alpha_frac = static_cast<double>(alpha) / word_count;
        if (alpha_frac < params.min_alpha_word_frac)
            failures.push_back(FilterVerdict::fail(doc_id, "alpha_word_fraction", alpha_frac));

        std::set<std::string> seen;
        for (std::string_view w : words) {
            std::string lw = to_lower_ascii(gd::strip_terminal_punct(w));
            if (params.required_stop_words.count(lw)) seen.insert(lw);
        }
        if (seen.size() < params.min_stop_word_hits)
            failures.push_back(
                FilterVerdict::fail(doc_id, "stop_words", static_cast<double>(seen.size())));
    }
    return failures;
}

inline FilterVerdict gopher_quality(const ExtractedText& text, const GopherParams& params = {}) {
    std::vector<FilterVerdict> failures = gopher_quality_all(text, params);
    if (failures.empty()) return FilterVerdict::pass(text.doc_id);
    return failures.front();
}

// Gopher repetition thresholds; the stage is off by default in the pipeline.
struct RepetitionParams {
    double max_dup_line_frac = 0.30;
    double max_dup_paragraph_frac = 0.30;
    double max_dup_line_char_frac = 0.20;
    double max_dup_paragraph_char_frac = 0.20;
    // Most-frequent n-gram character fraction caps, n = 2..4.
    std::map<int, double> max_top_ngram_char_frac = {{2, 0.20}, {3, 0.18}, {4, 0.16}};
    // Duplicated n-gram character fraction caps, n = 5..10.
    std::map<int, double> max_dup_ngram_char_frac = {{5, 0.15}, {6, 0.14}, {7, 0.13},
                                                     {8, 0.12}, {9, 0.11}, {10, 0.10}};
};

namespace gopher_detail {

struct DupStats {
    double dup_frac = 0;       // items beyond the first occurrence / items
    double dup_char_frac = 0;  // their characters / all characters
};

inline DupStats duplicate_stats(const std::vector<std::string_view>& items) {
    DupStats st;
    if (items.empty()) return st;
    std::unordered_map<std::string_view, std::size_t> seen;
    std::size_t dup_items = 0;
    double dup_chars = 0, total_chars = 0;
    for (std::string_view item : items) {
        total_chars += static_cast<double>(utf8_length(item));
        if (seen[item]++ > 0) {
            ++dup_items;
            dup_chars += static_cast<double>(utf8_length(item));
        }
    }
    st.dup_frac = static_cast<double>(dup_items) / static_cast<double>(items.size());
    st.dup_char_frac = total_chars > 0 ? dup_chars / total_chars : 0;
    return st;
}

// Fraction of token characters covered by occurrences of the most frequent
// word n-gram (count * n-gram character length / total token characters).
inline double top_ngram_char_frac(const std::vector<std::string_view>& tokens, int n) {
    if (tokens.size() < static_cast<std::size_t>(n)) return 0;
    std::unordered_map<std::string, std::size_t> counts;
    double total_chars = 0;
    for (std::string_view t : tokens) total_chars += static_cast<double>(utf8_length(t));
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int j = 0; j < n; ++j) {
            if (j) key.push_back(' ');
            key += tokens[i + j];
        }
        ++counts[key];
    }
    double best = 0;
    for (const auto& [gram, count] : counts) {
        if (count < 2) continue;
        double gram_chars = 0;
        for (std::string_view t : whitespace_tokens(gram)) gram_chars += static_cast<double>(utf8_length(t));
        best = std::max(best, static_cast<double>(count) * gram_chars / total_chars);
    }
    return best;
}

// Fraction of token characters lying inside any n-gram occurring >= 2 times.
// Positions are marked, so overlapping duplicates are not double counted.
inline double dup_ngram_char_frac(const std::vector<std::string_view>& tokens, int n) {
    if (tokens.size() < static_cast<std::size_t>(n)) return 0;
    std::unordered_map<std::string, std::size_t> counts;
    auto key_at = [&](std::size_t i) {
        std::string key;
        for (int j = 0; j < n; ++j) {
            if (j) key.push_back(' ');
            key += tokens[i + j];
        }
        return key;
    };
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[key_at(i)];
    std::vector<bool> covered(tokens.size(), false);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        if (counts[key_at(i)] >= 2)
            for (int j = 0; j < n; ++j) covered[i + j] = true;
    }
    double covered_chars = 0, total_chars = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        double len = static_cast<double>(utf8_length(tokens[i]));
        total_chars += len;
        if (covered[i]) covered_chars += len;
    }
    return total_chars > 0 ? covered_chars / total_chars : 0;
}

inline std::vector<std::string_view> split_paragraphs(std::string_view text) {
    std::vector<std::string_view> paras;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t sep = text.find("\n\n", start);
        if (sep == std::string_view::npos) {
            paras.push_back(text.substr(start));
            break;
        }
        paras.push_back(text.substr(start, sep - start));
        start = sep + 2;
    }
    // One paragraph per line when no blank-line separators exist.
    if (paras.size() <= 1) return split_lines(text);
    return paras;
}

}  // namespace gopher_detail

inline FilterVerdict gopher_repetition(const ExtractedText& text,
                                       const RepetitionParams& params = {}) {
    namespace gd = gopher_detail;
    const std::string& doc_id = text.doc_id;
    std::vector<std::string_view> lines;
    for (std::string_view line : split_lines(text.text))
        if (!trim(line).empty()) lines.push_back(line);
    std::vector<std::string_view> paras;
    for (std::string_view p : gd::split_paragraphs(text.text))
        if (!trim(p).empty()) paras.push_back(p);

    gd::DupStats line_stats = gd::duplicate_stats(lines);
    if (line_stats.dup_frac > params.max_dup_line_frac)
        return FilterVerdict::fail(doc_id, "dup_line_fraction", line_stats.dup_frac);
    gd::DupStats para_stats = gd::duplicate_stats(paras);
    if (para_stats.dup_frac > params.max_dup_paragraph_frac)
        return FilterVerdict::fail(doc_id, "dup_paragraph_fraction", para_stats.dup_frac);
    if (line_stats.dup_char_frac > params.max_dup_line_char_frac)
        return FilterVerdict::fail(doc_id, "dup_line_char_fraction", line_stats.dup_char_frac);
    if (para_stats.dup_char_frac > params.max_dup_paragraph_char_frac)
        return FilterVerdict::fail(doc_id, "dup_paragraph_char_fraction", para_stats.dup_char_frac);

    std::vector<std::string_view> tokens = whitespace_tokens(text.text);
    for (const auto& [n, cap] : params.max_top_ngram_char_frac) {
        double frac = gd::top_ngram_char_frac(tokens, n);
        if (frac > cap)
            return FilterVerdict::fail(doc_id, "top_" + std::to_string(n) + "_gram_char_fraction", frac);
    }
    for (const auto& [n, cap] : params.max_dup_ngram_char_frac) {
        double frac = gd::dup_ngram_char_frac(tokens, n);
        if (frac > cap)
            return FilterVerdict::fail(doc_id, "dup_" + std::to_string(n) + "_gram_char_fraction", frac);
    }
    return FilterVerdict::pass(doc_id);
}

}  // namespace scicorpus
