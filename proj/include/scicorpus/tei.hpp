#pragma once

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "scicorpus/doi.hpp"
#include "scicorpus/util.hpp"
#include "scicorpus/xml.hpp"

namespace scicorpus {

class WrongFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inline citation marker anchored to its sentence. Spans are byte offsets;
// surface_text always equals the sentence substring at char_span.
struct CitationCallout {
    std::optional<std::string> target_local_id;
    std::string surface_text;
    int sentence_index = 0;  // document-global sentence counter
    std::size_t span_start = 0;
    std::size_t span_end = 0;

    bool operator==(const CitationCallout&) const = default;
};

struct Sentence {
    std::string text;
    std::vector<CitationCallout> callouts;

    bool operator==(const Sentence&) const = default;
};

struct Paragraph {
    std::vector<Sentence> sentences;

    bool operator==(const Paragraph&) const = default;
};

struct Formula {
    std::string raw;

    bool operator==(const Formula&) const = default;
};

// Caption modeled apart from the cell content so extraction can keep one and
// drop the other.
struct TableBlock {
    std::optional<Paragraph> caption;
    std::string body_cells;

    bool operator==(const TableBlock&) const = default;
};

struct FigureBlock {
    std::optional<Paragraph> caption;

    bool operator==(const FigureBlock&) const = default;
};

using Block = std::variant<Paragraph, Formula, TableBlock, FigureBlock>;

struct Division {
    std::optional<std::string> heading;
    std::vector<Block> blocks;

    bool operator==(const Division&) const = default;
};

struct BibEntry {
    std::string local_id;
    std::string raw_citation;
    std::optional<std::string> doi;
    std::optional<std::string> title;
    std::optional<int> year;

    bool operator==(const BibEntry&) const = default;
};

struct DocHeader {
    std::string title;
    std::optional<std::string> doi;
    std::vector<std::string> authors;
    std::vector<std::string> keywords;  // deduplicated case-insensitively
    std::optional<std::string> license_raw;
    std::optional<std::string> declared_language;

    bool operator==(const DocHeader&) const = default;
};

struct TeiDocument {
    DocHeader header;
    std::vector<Division> body;
    std::vector<BibEntry> bibliography;
    std::vector<std::string> warnings;  // not part of structural equality

    bool operator==(const TeiDocument& o) const {
        return header == o.header && body == o.body && bibliography == o.bibliography;
    }
};

struct CitationEdge {
    std::string doc_id;
    std::optional<std::string> target_local_id;
    bool resolved = false;
    std::string sentence_text;
    std::size_t span_start = 0;
    std::size_t span_end = 0;
};

namespace detail {

// Accumulates character data with whitespace runs collapsed to single spaces,
// so pretty-printed and compact XML parse to identical documents.
class TextBuilder {
public:
    void append(std::string_view raw) {
        for (char c : raw) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!text_.empty() && text_.back() != ' ') text_.push_back(' ');
            } else {
                text_.push_back(c);
            }
        }
    }

    std::size_t size() const { return text_.size(); }

    std::string take() {
        if (!text_.empty() && text_.back() == ' ') text_.pop_back();
        return std::move(text_);
    }

private:
    std::string text_;
};

inline std::string collapse_ws(std::string_view raw) {
    TextBuilder b;
    b.append(raw);
    return b.take();
}

}  // namespace detail

// Streaming TEI parser built on XmlReader. Unknown elements are skipped with
// their text content absorbed into the enclosing block; formula, table-body,
// and figure content is captured raw, never discarded at parse time.
class TeiParser {
public:
    TeiDocument parse(std::istream& in) {
        XmlReader reader(in);
        doc_ = TeiDocument{};
        sentence_counter_ = 0;
        bib_ids_.clear();

        XmlReader::Event ev = reader.next();
        if (ev == XmlReader::Event::Text) ev = reader.next();
        if (ev != XmlReader::Event::StartElement)
            throw WrongFormatError("input has no root element");
        if (reader.local_name() != "TEI")
            throw WrongFormatError("root element is <" + reader.name() + ">, expected TEI");
        std::string_view lang = reader.attribute("xml:lang");
        if (!lang.empty()) doc_.header.declared_language = std::string(lang);

        std::size_t root_depth = reader.depth();
        while (true) {
            ev = reader.next();
            if (ev == XmlReader::Event::EndElement && reader.depth() < root_depth) break;
            if (ev == XmlReader::Event::Eof)
                throw XmlParseError(reader.offset(), "truncated TEI document");
            if (ev != XmlReader::Event::StartElement) continue;
            if (reader.local_name() == "teiHeader") parse_header(reader);
            else if (reader.local_name() == "text") parse_text(reader);
            else skip_element(reader);
        }
        // Drain trailing whitespace so malformed tails are reported.
        while (reader.next() != XmlReader::Event::Eof) {}
        return std::move(doc_);
    }

private:
    // Consumes everything up to and including the end tag of the element the
    // reader just opened; returns its collapsed text content.
    static std::string consume_text(XmlReader& r) {
        detail::TextBuilder b;
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) b.append(r.text());
            else if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            else if (ev == XmlReader::Event::Eof)
                throw XmlParseError(r.offset(), "truncated element");
        }
        return b.take();
    }

    static void skip_element(XmlReader& r) { consume_text(r); }

    // Walks a <table> subtree appending each cell's text, space-separated, so
    // adjacent cells never fuse into one token.
    static void consume_table_cells(XmlReader& r, detail::TextBuilder& cells) {
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated table");
            if (ev != XmlReader::Event::StartElement) continue;
            if (r.local_name() == "cell") {
                std::string c = consume_text(r);
                if (!c.empty()) {
                    if (cells.size() > 0) cells.append(" ");
                    cells.append(c);
                }
            } else {
                consume_table_cells(r, cells);
            }
        }
    }

    void parse_header(XmlReader& r) {
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated teiHeader");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "title") {
                std::string t = consume_text(r);
                if (doc_.header.title.empty()) doc_.header.title = std::move(t);
            } else if (el == "idno") {
                bool is_doi = to_lower_ascii(r.attribute("type")) == "doi";
                std::string t = consume_text(r);
                if (is_doi && !doc_.header.doi) doc_.header.doi = normalize_doi(t);
            } else if (el == "persName") {
                parse_person(r);
            } else if (el == "term") {
                add_keyword(consume_text(r));
            } else if (el == "licence") {
                std::string target(r.attribute("target"));
                std::string t = consume_text(r);
                if (!doc_.header.license_raw)
                    doc_.header.license_raw = t.empty() ? target : t;
            } else if (el == "language") {
                std::string ident(r.attribute("ident"));
                consume_text(r);
                if (!doc_.header.declared_language && !ident.empty())
                    doc_.header.declared_language = ident;
            }
        }
    }

    void parse_person(XmlReader& r) {
        std::size_t depth = r.depth();
        detail::TextBuilder name;
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) name.append(r.text());
            else if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            else if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated persName");
        }
        std::string n = name.take();
        if (!n.empty()) doc_.header.authors.push_back(std::move(n));
    }

    void add_keyword(std::string kw) {
        if (kw.empty()) return;
        std::string folded = to_lower_ascii(kw);
        for (const std::string& existing : doc_.header.keywords)
            if (to_lower_ascii(existing) == folded) return;
        doc_.header.keywords.push_back(std::move(kw));
    }

    void parse_text(XmlReader& r) {
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated text element");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "body") parse_body(r);
            else if (el == "back") parse_back(r);
            else skip_element(r);
        }
    }

    void parse_body(XmlReader& r) {
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated body");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "div") {
                doc_.body.push_back(parse_division(r));
            } else {
                // Blocks directly under <body> go into an anonymous division.
                std::optional<Block> block = parse_block(r, el);
                if (block) {
                    if (doc_.body.empty() || doc_.body.back().heading)
                        doc_.body.push_back(Division{});
                    doc_.body.back().blocks.push_back(std::move(*block));
                }
            }
        }
    }

    Division parse_division(XmlReader& r) {
        Division div;
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated div");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "head" && !div.heading && div.blocks.empty()) {
                div.heading = consume_text(r);
            } else {
                std::optional<Block> block = parse_block(r, el);
                if (block) div.blocks.push_back(std::move(*block));
            }
        }
        return div;
    }

    std::optional<Block> parse_block(XmlReader& r, std::string_view el) {
        if (el == "p") return Block(parse_paragraph(r));
        if (el == "formula") return Block(Formula{consume_text(r)});
        if (el == "table") return Block(parse_table(r));
        if (el == "figure") {
            bool is_table = to_lower_ascii(r.attribute("type")) == "table";
            return parse_figure(r, is_table);
        }
        skip_element(r);
        return std::nullopt;
    }

    Paragraph parse_paragraph(XmlReader& r) {
        Paragraph para;
        std::size_t depth = r.depth();
        detail::TextBuilder loose;  // text outside <s> markup
        std::vector<CitationCallout> loose_callouts;
        bool has_sentences = false;
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) {
                loose.append(r.text());
            } else if (ev == XmlReader::Event::EndElement && r.depth() < depth) {
                break;
            } else if (ev == XmlReader::Event::Eof) {
                throw XmlParseError(r.offset(), "truncated paragraph");
            } else if (ev == XmlReader::Event::StartElement) {
                if (r.local_name() == "s") {
                    has_sentences = true;
                    para.sentences.push_back(parse_sentence(r));
                } else {
                    collect_inline(r, loose, loose_callouts);
                }
            }
        }
        if (!has_sentences) {
            // No sentence markup: the whole paragraph is one sentence.
            Sentence s;
            s.text = loose.take();
            s.callouts = std::move(loose_callouts);
            int idx = sentence_counter_++;
            for (CitationCallout& c : s.callouts) {
                c.sentence_index = idx;
                if (c.span_end > s.text.size()) c.span_end = s.text.size();
                c.surface_text = s.text.substr(c.span_start, c.span_end - c.span_start);
            }
            if (!s.text.empty() || !s.callouts.empty()) para.sentences.push_back(std::move(s));
        }
        return para;
    }

    Sentence parse_sentence(XmlReader& r) {
        Sentence s;
        std::size_t depth = r.depth();
        detail::TextBuilder b;
        std::vector<CitationCallout> callouts;
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) b.append(r.text());
            else if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            else if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated sentence");
            else if (ev == XmlReader::Event::StartElement) collect_inline(r, b, callouts);
        }
        s.text = b.take();
        int idx = sentence_counter_++;
        for (CitationCallout& c : callouts) {
            c.sentence_index = idx;
            if (c.span_end > s.text.size()) c.span_end = s.text.size();
            c.surface_text = s.text.substr(c.span_start, c.span_end - c.span_start);
        }
        s.callouts = std::move(callouts);
        return s;
    }

    // Inline element inside running text: <ref type="bibr"> becomes a callout,
    // anything else contributes its text content in place.
    void collect_inline(XmlReader& r, detail::TextBuilder& b,
                        std::vector<CitationCallout>& callouts) {
        if (r.local_name() == "formula") {
            // Inline formulas never contribute to sentence text.
            skip_element(r);
            return;
        }
        bool is_callout = r.local_name() == "ref" &&
                          to_lower_ascii(r.attribute("type")) == "bibr";
        std::string target(r.attribute("target"));
        std::size_t start = b.size();
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) b.append(r.text());
            else if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            else if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated inline element");
            else if (ev == XmlReader::Event::StartElement) collect_inline(r, b, callouts);
        }
        if (is_callout) {
            CitationCallout c;
            if (!target.empty())
                c.target_local_id = target[0] == '#' ? target.substr(1) : target;
            c.span_start = start;
            c.span_end = b.size();
            callouts.push_back(std::move(c));
        }
    }

    Block parse_figure(XmlReader& r, bool is_table) {
        std::optional<Paragraph> caption;
        detail::TextBuilder cells;
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated figure");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "head" || el == "figDesc") {
                Sentence s;
                std::vector<CitationCallout> callouts;
                detail::TextBuilder b;
                std::size_t d2 = r.depth();
                while (true) {
                    XmlReader::Event e2 = r.next();
                    if (e2 == XmlReader::Event::Text) b.append(r.text());
                    else if (e2 == XmlReader::Event::EndElement && r.depth() < d2) break;
                    else if (e2 == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated caption");
                    else if (e2 == XmlReader::Event::StartElement) collect_inline(r, b, callouts);
                }
                s.text = b.take();
                if (!s.text.empty() && !caption) {
                    int idx = sentence_counter_++;
                    for (CitationCallout& c : callouts) {
                        c.sentence_index = idx;
                        if (c.span_end > s.text.size()) c.span_end = s.text.size();
                        c.surface_text = s.text.substr(c.span_start, c.span_end - c.span_start);
                    }
                    s.callouts = std::move(callouts);
                    caption = Paragraph{{std::move(s)}};
                }
            } else if (el == "table") {
                is_table = true;
                consume_table_cells(r, cells);
            } else if (el == "cell" || el == "row") {
                std::string c = consume_text(r);
                if (cells.size() > 0) cells.append(" ");
                cells.append(c);
            } else {
                skip_element(r);
            }
        }
        if (is_table) return TableBlock{std::move(caption), cells.take()};
        return FigureBlock{std::move(caption)};
    }

    TableBlock parse_table(XmlReader& r) {
        TableBlock t;
        std::size_t depth = r.depth();
        detail::TextBuilder cells;
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated table");
            if (ev == XmlReader::Event::Text) cells.append(r.text());
            if (ev != XmlReader::Event::StartElement) continue;
            if (r.local_name() == "head" && !t.caption) {
                std::string c = consume_text(r);
                if (!c.empty()) t.caption = Paragraph{{Sentence{c, {}}}};
            } else if (r.local_name() == "cell") {
                std::string c = consume_text(r);
                if (!c.empty()) {
                    if (cells.size() > 0) cells.append(" ");
                    cells.append(c);
                }
            } else {
                consume_table_cells(r, cells);  // row or other wrapper
            }
        }
        t.body_cells = cells.take();
        return t;
    }

    void parse_back(XmlReader& r) {
        std::size_t depth = r.depth();
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated back matter");
            if (ev != XmlReader::Event::StartElement) continue;
            std::string_view el = r.local_name();
            if (el == "biblStruct" || el == "bibl") parse_bib_entry(r);
            // listBibl / div wrappers fall through and keep streaming
        }
    }

    void parse_bib_entry(XmlReader& r) {
        BibEntry entry;
        std::string id(r.attribute("xml:id"));
        std::size_t depth = r.depth();
        detail::TextBuilder raw;
        std::optional<std::string> raw_note;  // <note type="raw_reference"> wins over concatenation
        while (true) {
            XmlReader::Event ev = r.next();
            if (ev == XmlReader::Event::Text) raw.append(r.text());
            else if (ev == XmlReader::Event::EndElement && r.depth() < depth) break;
            else if (ev == XmlReader::Event::Eof) throw XmlParseError(r.offset(), "truncated bibl entry");
            else if (ev == XmlReader::Event::StartElement) {
                std::string_view el = r.local_name();
                if (el == "idno" && to_lower_ascii(r.attribute("type")) == "doi") {
                    std::string t = consume_text(r);
                    if (raw.size() > 0) raw.append(" ");
                    raw.append(t);
                    if (!entry.doi) entry.doi = normalize_doi(t);
                } else if (el == "title") {
                    std::string t = consume_text(r);
                    if (raw.size() > 0) raw.append(" ");
                    raw.append(t);
                    if (!entry.title) entry.title = t;
                } else if (el == "date") {
                    std::string when(r.attribute("when"));
                    std::string t = consume_text(r);
                    if (!t.empty()) {
                        if (raw.size() > 0) raw.append(" ");
                        raw.append(t);
                    }
                    std::string src = !when.empty() ? when : t;
                    if (!entry.year && src.size() >= 4) {
                        bool digits = true;
                        for (int i = 0; i < 4; ++i)
                            if (!std::isdigit(static_cast<unsigned char>(src[i]))) digits = false;
                        if (digits) entry.year = std::stoi(src.substr(0, 4));
                    }
                } else if (el == "note" &&
                           to_lower_ascii(r.attribute("type")) == "raw_reference") {
                    raw_note = consume_text(r);
                } else {
                    std::string t = consume_text(r);
                    if (!t.empty()) {
                        if (raw.size() > 0) raw.append(" ");
                        raw.append(t);
                    }
                }
            }
        }
        if (id.empty()) id = "ref" + std::to_string(doc_.bibliography.size());
        // Duplicate ids in malformed input get a deterministic numeric suffix.
        std::string unique = id;
        int suffix = 2;
        while (bib_ids_.count(unique)) {
            unique = id + "_" + std::to_string(suffix++);
        }
        if (unique != id)
            doc_.warnings.push_back("duplicate bibliography id '" + id + "' renamed to '" + unique + "'");
        bib_ids_.insert(unique);
        entry.local_id = std::move(unique);
        entry.raw_citation = raw_note ? std::move(*raw_note) : raw.take();
        doc_.bibliography.push_back(std::move(entry));
    }

    TeiDocument doc_;
    int sentence_counter_ = 0;
    std::unordered_set<std::string> bib_ids_;
};

inline TeiDocument parse_tei(std::istream& in) {
    return TeiParser().parse(in);
}

inline TeiDocument parse_tei(std::string_view xml) {
    std::istringstream in{std::string(xml)};
    return TeiParser().parse(in);
}

inline std::vector<BibEntry> extract_bibliography(const TeiDocument& doc) {
    return doc.bibliography;
}

inline std::vector<CitationEdge> extract_citation_edges(const TeiDocument& doc,
                                                        const std::string& doc_id) {
    std::unordered_set<std::string> known;
    for (const BibEntry& b : doc.bibliography) known.insert(b.local_id);

    std::vector<CitationEdge> edges;
    auto emit = [&](const Sentence& s) {
        for (const CitationCallout& c : s.callouts) {
            CitationEdge e;
            e.doc_id = doc_id;
            e.target_local_id = c.target_local_id;
            e.resolved = c.target_local_id && known.count(*c.target_local_id) > 0;
            e.sentence_text = s.text;
            e.span_start = c.span_start;
            e.span_end = c.span_end;
            edges.push_back(std::move(e));
        }
    };
    for (const Division& div : doc.body) {
        for (const Block& block : div.blocks) {
            if (const auto* p = std::get_if<Paragraph>(&block)) {
                for (const Sentence& s : p->sentences) emit(s);
            } else if (const auto* t = std::get_if<TableBlock>(&block)) {
                if (t->caption)
                    for (const Sentence& s : t->caption->sentences) emit(s);
            } else if (const auto* f = std::get_if<FigureBlock>(&block)) {
                if (f->caption)
                    for (const Sentence& s : f->caption->sentences) emit(s);
            }
        }
    }
    return edges;
}

// Canonical TEI rendering of the in-memory model. parse(serialize(doc)) is
// structurally equal to doc; used for round-trip checks and fixtures.
inline std::string serialize_tei(const TeiDocument& doc) {
    std::string out = "<TEI xmlns=\"http://www.tei-c.org/ns/1.0\"";
    if (doc.header.declared_language) {
        out += " xml:lang=\"";
        xml_escape(*doc.header.declared_language, out);
        out += "\"";
    }
    out += ">\n<teiHeader><fileDesc><titleStmt><title>";
    xml_escape(doc.header.title, out);
    out += "</title></titleStmt>";
    if (doc.header.doi) {
        out += "<idno type=\"DOI\">";
        xml_escape(*doc.header.doi, out);
        out += "</idno>";
    }
    for (const std::string& a : doc.header.authors) {
        out += "<author><persName>";
        xml_escape(a, out);
        out += "</persName></author>";
    }
    if (doc.header.license_raw) {
        out += "<availability><licence>";
        xml_escape(*doc.header.license_raw, out);
        out += "</licence></availability>";
    }
    out += "</fileDesc>";
    if (!doc.header.keywords.empty()) {
        out += "<profileDesc><textClass><keywords>";
        for (const std::string& k : doc.header.keywords) {
            out += "<term>";
            xml_escape(k, out);
            out += "</term>";
        }
        out += "</keywords></textClass></profileDesc>";
    }
    out += "</teiHeader>\n<text><body>\n";

    auto emit_sentence = [&out](const Sentence& s) {
        out += "<s>";
        std::size_t cursor = 0;
        for (const CitationCallout& c : s.callouts) {
            xml_escape(std::string_view(s.text).substr(cursor, c.span_start - cursor), out);
            out += "<ref type=\"bibr\"";
            if (c.target_local_id) {
                out += " target=\"#";
                xml_escape(*c.target_local_id, out);
                out += "\"";
            }
            out += ">";
            xml_escape(std::string_view(s.text).substr(c.span_start, c.span_end - c.span_start), out);
            out += "</ref>";
            cursor = c.span_end;
        }
        xml_escape(std::string_view(s.text).substr(cursor), out);
        out += "</s>";
    };

    for (const Division& div : doc.body) {
        out += "<div>";
        if (div.heading) {
            out += "<head>";
            xml_escape(*div.heading, out);
            out += "</head>";
        }
        for (const Block& block : div.blocks) {
            if (const auto* p = std::get_if<Paragraph>(&block)) {
                out += "<p>";
                for (const Sentence& s : p->sentences) emit_sentence(s);
                out += "</p>";
            } else if (const auto* f = std::get_if<Formula>(&block)) {
                out += "<formula>";
                xml_escape(f->raw, out);
                out += "</formula>";
            } else if (const auto* t = std::get_if<TableBlock>(&block)) {
                out += "<figure type=\"table\">";
                if (t->caption && !t->caption->sentences.empty()) {
                    out += "<head>";
                    for (const Sentence& s : t->caption->sentences) emit_sentence(s);
                    out += "</head>";
                }
                out += "<table><row><cell>";
                xml_escape(t->body_cells, out);
                out += "</cell></row></table></figure>";
            } else if (const auto* g = std::get_if<FigureBlock>(&block)) {
                out += "<figure>";
                if (g->caption && !g->caption->sentences.empty()) {
                    out += "<head>";
                    for (const Sentence& s : g->caption->sentences) emit_sentence(s);
                    out += "</head>";
                }
                out += "</figure>";
            }
        }
        out += "</div>\n";
    }
    out += "</body>";
    if (!doc.bibliography.empty()) {
        out += "<back><div type=\"references\"><listBibl>\n";
        for (const BibEntry& b : doc.bibliography) {
            out += "<biblStruct xml:id=\"";
            xml_escape(b.local_id, out);
            out += "\">";
            if (!b.raw_citation.empty()) {
                out += "<note type=\"raw_reference\">";
                xml_escape(b.raw_citation, out);
                out += "</note>";
            }
            if (b.title) {
                out += "<title>";
                xml_escape(*b.title, out);
                out += "</title>";
            }
            if (b.doi) {
                out += "<idno type=\"DOI\">";
                xml_escape(*b.doi, out);
                out += "</idno>";
            }
            if (b.year) out += "<date when=\"" + std::to_string(*b.year) + "\"/>";
            out += "</biblStruct>\n";
        }
        out += "</listBibl></div></back>";
    }
    out += "</text>\n</TEI>\n";
    return out;
}

}  // namespace scicorpus
