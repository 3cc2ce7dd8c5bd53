#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "scicorpus/gopher.hpp"
#include "scicorpus/langid.hpp"

using namespace scicorpus;

TEST_CASE("stopword backend classifies clear examples confidently") {
    StopwordBackend backend;
    auto [en, en_conf] = backend.classify("the results show that models trained with more data have to be better");
    CHECK(en == "en");
    CHECK(en_conf >= 0.9);
    auto [fr, fr_conf] = backend.classify("les modèles sont dans la limite est sur le plan");
    CHECK(fr == "fr");
    CHECK(fr_conf >= 0.9);
    auto [de, de_conf] = backend.classify("die Ergebnisse werden mit der Methode auf dem Stand nicht");
    CHECK(de == "de");
    CHECK(de_conf >= 0.9);
}

TEST_CASE("a line with no known words is undetermined") {
    StopwordBackend backend;
    auto [lang, conf] = backend.classify("xylophone quartz 123");
    CHECK(lang == "und");
    CHECK(conf == 0.0);
}

TEST_CASE("stopword tables are pairwise disjoint") {
    // Disjointness is what guarantees confidence 1.0 for single-language
    // lines; verify it holds by probing every table word against the rest.
    StopwordBackend backend;
    std::map<std::string, std::vector<std::string>> tables = {
        {"en", {"the", "be", "to", "of", "and", "that", "have", "with", "not",
                "you", "this", "from", "they", "would", "there", "their"}},
        {"fr", {"le", "la", "les", "des", "une", "est", "sur", "dans", "pas",
                "vous", "avec", "cette", "nous", "mais", "leur", "ont"}},
        {"de", {"der", "die", "das", "und", "ist", "nicht", "ein", "eine",
                "mit", "auf", "sich", "werden", "auch", "dem", "wird", "bei"}},
        {"es", {"el", "los", "las", "una", "por", "como", "pero", "muy",
                "cuando", "todo", "esta", "ser", "entre", "hasta", "desde", "porque"}},
        {"it", {"il", "gli", "che", "di", "non", "per", "sono", "questo",
                "anche", "della", "nella", "essere", "piu", "dopo", "hanno", "loro"}},
        {"pt", {"os", "as", "um", "uma", "nao", "sao", "voce", "tambem",
                "isso", "para", "pois", "quando", "pelo", "seus", "ainda", "muito"}},
    };
    std::set<std::string> all;
    for (const auto& [lang, words] : tables) {
        for (const std::string& w : words) {
            CHECK(all.insert(w).second);  // fails on any cross-table repeat
            auto [got, conf] = backend.classify(w);
            CHECK(got == lang);
            CHECK(conf == 1.0);
        }
    }
}

TEST_CASE("empty and whitespace lines are skipped") {
    StopwordBackend backend;
    CHECK_FALSE(classify_line(backend, "", 0));
    CHECK_FALSE(classify_line(backend, "   \t ", 1));
    auto score = classify_line(backend, "the model", 2);
    REQUIRE(score);
    CHECK(score->line_index == 2);
    CHECK(score->char_count == 9);
}

TEST_CASE("char-weighted aggregation reproduces the pinned arithmetic") {
    // 80 chars of en at 0.99 plus 20 chars of fr at 0.95:
    //   en = 80*0.99/100 = 0.792, fr = 20*0.95/100 = 0.19
    std::vector<LineScore> scores = {
        {0, "en", 0.99, 80},
        {1, "fr", 0.95, 20},
    };
    LanguageProfile p = aggregate_document_language(scores);
    CHECK(p.top_language == "en");
    CHECK(p.top_score == Catch::Approx(0.792).margin(1e-12));
    CHECK(p.per_language_score.at("fr") == Catch::Approx(0.19).margin(1e-12));
}

TEST_CASE("aggregation is invariant to line order and char-count scaling") {
    std::vector<LineScore> scores = {
        {0, "en", 0.9, 40}, {1, "de", 0.8, 25}, {2, "en", 0.7, 35},
    };
    LanguageProfile base = aggregate_document_language(scores);

    std::vector<LineScore> permuted = {scores[2], scores[0], scores[1]};
    LanguageProfile perm = aggregate_document_language(permuted);
    CHECK(perm.top_language == base.top_language);
    CHECK(perm.top_score == Catch::Approx(base.top_score).margin(1e-12));

    std::vector<LineScore> scaled = scores;
    for (LineScore& s : scaled) s.char_count *= 7;
    LanguageProfile scal = aggregate_document_language(scaled);
    CHECK(scal.top_score == Catch::Approx(base.top_score).margin(1e-12));
}

TEST_CASE("aggregation ties break lexicographically") {
    std::vector<LineScore> scores = {
        {0, "fr", 1.0, 50},
        {1, "de", 1.0, 50},
    };
    LanguageProfile p = aggregate_document_language(scores);
    CHECK(p.top_language == "de");
    CHECK(p.top_score == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("no classifiable lines raises NoTextError") {
    CHECK_THROWS_AS(aggregate_document_language({}), NoTextError);
}

TEST_CASE("language gate threshold comparison is >=") {
    LanguageProfile at_threshold;
    at_threshold.top_language = "en";
    at_threshold.top_score = 0.80;
    at_threshold.per_language_score = {{"en", 0.80}};
    CHECK(language_gate(at_threshold, "d").passed);

    LanguageProfile below;
    below.top_language = "en";
    below.top_score = 0.792;
    FilterVerdict v = language_gate(below, "d");
    CHECK_FALSE(v.passed);
    CHECK(*v.failed_rule == "low_lang_confidence");
    CHECK(*v.measured_value == Catch::Approx(0.792));

    LanguageProfile french;
    french.top_language = "fr";
    french.top_score = 0.95;
    FilterVerdict w = language_gate(french, "d");
    CHECK_FALSE(w.passed);
    CHECK(*w.failed_rule == "wrong_language");

    // no target language: only the confidence gate applies
    CHECK(language_gate(french, "d", 0.80, std::nullopt).passed);
}

TEST_CASE("file model backend loads a weighted word table") {
    std::filesystem::path path =
        std::filesystem::temp_directory_path() / "scicorpus_test_model.tsv";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "en\thello\t2.0\n";
        out << "en\tworld\t1.0\n";
        out << "fr\tbonjour\t3.0\n";
    }
    FileModelBackend backend(path);
    auto [en, en_conf] = backend.classify("hello world");
    CHECK(en == "en");
    CHECK(en_conf == 1.0);
    auto [fr, fr_conf] = backend.classify("bonjour hello");
    CHECK(fr == "fr");
    CHECK(fr_conf == Catch::Approx(0.6));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(FileModelBackend("/nonexistent/model.tsv"), ConfigError);
}

TEST_CASE("make_backend falls back to the stopword backend") {
    CHECK(make_backend("")->name() == "stopword-test-backend");
}
