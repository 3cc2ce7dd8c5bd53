#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "scicorpus/tei.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

// Defaults reproduce the extraction policy used for the corpus: paragraphs
// and captions in, formulas and table bodies out, callouts kept inline.
struct ExtractionConfig {
    bool include_captions = true;
    bool exclude_formulas = true;
    bool exclude_table_bodies = true;
    bool keep_callouts = true;
    bool include_headings = true;
    std::string paragraph_separator = "\n";
};

struct ExtractedLine {
    std::string text;
    std::size_t char_count = 0;  // code points
};

struct ExtractedText {
    std::string doc_id;
    std::string text;  // lines joined by the paragraph separator
    std::vector<ExtractedLine> lines;
    std::size_t token_count = 0;  // maximal non-whitespace runs
};

// Sentences concatenated in order; a single space goes between adjacent
// sentences only when neither side already provides whitespace at the joint.
inline std::string join_sentences(const std::vector<Sentence>& sentences) {
    std::string out;
    for (const Sentence& s : sentences) {
        if (!out.empty() && !s.text.empty() &&
            !std::isspace(static_cast<unsigned char>(out.back())) &&
            !std::isspace(static_cast<unsigned char>(s.text.front())))
            out.push_back(' ');
        out += s.text;
    }
    return out;
}

namespace detail {

inline std::string strip_callouts(const Sentence& s) {
    std::string out;
    std::size_t cursor = 0;
    for (const CitationCallout& c : s.callouts) {
        out += s.text.substr(cursor, c.span_start - cursor);
        cursor = c.span_end;
    }
    out += s.text.substr(cursor);
    return out;
}

inline std::string render_paragraph(const Paragraph& p, const ExtractionConfig& config) {
    if (config.keep_callouts) return join_sentences(p.sentences);
    std::vector<Sentence> stripped;
    stripped.reserve(p.sentences.size());
    for (const Sentence& s : p.sentences) stripped.push_back(Sentence{strip_callouts(s), {}});
    return join_sentences(stripped);
}

}  // namespace detail

// One emitted line per paragraph / caption / heading, in document order.
inline ExtractedText stream_to_text(const TeiDocument& doc, const std::string& doc_id,
                                    const ExtractionConfig& config = {}) {
    ExtractedText out;
    out.doc_id = doc_id;

    auto emit = [&out](std::string line) {
        if (line.empty()) return;
        out.lines.push_back(ExtractedLine{std::move(line), 0});
    };

    for (const Division& div : doc.body) {
        if (div.heading && config.include_headings) emit(*div.heading);
        for (const Block& block : div.blocks) {
            if (const auto* p = std::get_if<Paragraph>(&block)) {
                emit(detail::render_paragraph(*p, config));
            } else if (const auto* f = std::get_if<Formula>(&block)) {
                if (!config.exclude_formulas) emit(f->raw);
            } else if (const auto* t = std::get_if<TableBlock>(&block)) {
                if (config.include_captions && t->caption)
                    emit(detail::render_paragraph(*t->caption, config));
                if (!config.exclude_table_bodies) emit(t->body_cells);
            } else if (const auto* g = std::get_if<FigureBlock>(&block)) {
                if (config.include_captions && g->caption)
                    emit(detail::render_paragraph(*g->caption, config));
            }
        }
    }

    for (std::size_t i = 0; i < out.lines.size(); ++i) {
        out.lines[i].char_count = utf8_length(out.lines[i].text);
        if (i) out.text += config.paragraph_separator;
        out.text += out.lines[i].text;
    }
    out.token_count = whitespace_token_count(out.text);
    return out;
}

// Shard record for the filtering/dedup stages.
inline nlohmann::json extracted_to_json(const ExtractedText& t, std::string_view source_kind) {
    return nlohmann::json{{"id", t.doc_id},
                          {"text", t.text},
                          {"token_count", t.token_count},
                          {"source_kind", std::string(source_kind)}};
}

}  // namespace scicorpus
