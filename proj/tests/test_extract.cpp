#include <catch2/catch_amalgamated.hpp>

#include "scicorpus/extract.hpp"

using namespace scicorpus;

namespace {

const char* kDoc = R"(<TEI xmlns="http://www.tei-c.org/ns/1.0">
<teiHeader><fileDesc><titleStmt><title>T</title></titleStmt></fileDesc></teiHeader>
<text><body>
<div><head>Results</head>
<p><s>The model converges <ref type="bibr" target="#b0">[1]</ref> quickly.</s><s>It generalizes well.</s></p>
<formula>x = y + z</formula>
<figure><head>Figure 2: Training curves.</head></figure>
<figure type="table"><head>Table 3: Ablations.</head>
<table><row><cell>variant</cell><cell>score</cell></row></table></figure>
</div>
</body></text></TEI>)";

}  // namespace

TEST_CASE("join_sentences inserts a single space only when needed") {
    CHECK(join_sentences({{"One.", {}}, {"Two.", {}}}) == "One. Two.");
    CHECK(join_sentences({{"One. ", {}}, {"Two.", {}}}) == "One. Two.");
    CHECK(join_sentences({{"One.", {}}, {" Two.", {}}}) == "One. Two.");
    CHECK(join_sentences({{"", {}}, {"Two.", {}}}) == "Two.");
    CHECK(join_sentences({}) == "");
}

TEST_CASE("default extraction keeps paragraphs, headings, captions, callouts") {
    TeiDocument doc = parse_tei(kDoc);
    ExtractedText out = stream_to_text(doc, "d1");
    std::string expected =
        "Results\n"
        "The model converges [1] quickly. It generalizes well.\n"
        "Figure 2: Training curves.\n"
        "Table 3: Ablations.";
    CHECK(out.text == expected);
    CHECK(out.doc_id == "d1");
    CHECK(out.text.find("x = y + z") == std::string::npos);  // formula excluded
    CHECK(out.text.find("variant") == std::string::npos);    // table body excluded
    CHECK(out.token_count == whitespace_token_count(expected));
    REQUIRE(out.lines.size() == 4);
    CHECK(out.lines[2].char_count == utf8_length("Figure 2: Training curves."));
}

TEST_CASE("config toggles change exactly the targeted content") {
    TeiDocument doc = parse_tei(kDoc);

    ExtractionConfig with_formula;
    with_formula.exclude_formulas = false;
    CHECK(stream_to_text(doc, "d", with_formula).text.find("x = y + z") != std::string::npos);

    ExtractionConfig with_cells;
    with_cells.exclude_table_bodies = false;
    CHECK(stream_to_text(doc, "d", with_cells).text.find("variant score") != std::string::npos);

    ExtractionConfig no_captions;
    no_captions.include_captions = false;
    std::string text = stream_to_text(doc, "d", no_captions).text;
    CHECK(text.find("Figure 2") == std::string::npos);
    CHECK(text.find("Table 3") == std::string::npos);

    ExtractionConfig no_headings;
    no_headings.include_headings = false;
    CHECK(stream_to_text(doc, "d", no_headings).text.find("Results") == std::string::npos);

    ExtractionConfig no_callouts;
    no_callouts.keep_callouts = false;
    std::string stripped = stream_to_text(doc, "d", no_callouts).text;
    CHECK(stripped.find("[1]") == std::string::npos);
    CHECK(stripped.find("The model converges") != std::string::npos);
}

TEST_CASE("extraction is deterministic") {
    TeiDocument doc = parse_tei(kDoc);
    ExtractedText a = stream_to_text(doc, "d");
    ExtractedText b = stream_to_text(doc, "d");
    CHECK(a.text == b.text);
    CHECK(a.token_count == b.token_count);
}

TEST_CASE("content-set property: emitted text is exactly the policy-selected content") {
    TeiDocument doc = parse_tei(kDoc);
    ExtractedText out = stream_to_text(doc, "d");
    // every emitted line must originate from a heading, paragraph, or caption
    std::vector<std::string> allowed;
    for (const Division& div : doc.body) {
        if (div.heading) allowed.push_back(*div.heading);
        for (const Block& b : div.blocks) {
            if (const auto* p = std::get_if<Paragraph>(&b))
                allowed.push_back(join_sentences(p->sentences));
            else if (const auto* t = std::get_if<TableBlock>(&b)) {
                if (t->caption) allowed.push_back(join_sentences(t->caption->sentences));
            } else if (const auto* f = std::get_if<FigureBlock>(&b)) {
                if (f->caption) allowed.push_back(join_sentences(f->caption->sentences));
            }
        }
    }
    REQUIRE(out.lines.size() == allowed.size());
    for (std::size_t i = 0; i < allowed.size(); ++i) CHECK(out.lines[i].text == allowed[i]);
}

TEST_CASE("empty lines are never emitted") {
    TeiDocument doc = parse_tei("<TEI><text><body><div><p></p><p><s>Only.</s></p></div></body></text></TEI>");
    ExtractedText out = stream_to_text(doc, "d");
    CHECK(out.lines.size() == 1);
    CHECK(out.text == "Only.");
}

TEST_CASE("shard record carries id, text, token count, source kind") {
    TeiDocument doc = parse_tei(kDoc);
    nlohmann::json j = extracted_to_json(stream_to_text(doc, "d9"), "pdf_unpaywall");
    CHECK(j["id"] == "d9");
    CHECK(j["source_kind"] == "pdf_unpaywall");
    CHECK(j["token_count"].get<std::size_t>() > 0);
    CHECK(j["text"].get<std::string>().find("Results") == 0);
}
