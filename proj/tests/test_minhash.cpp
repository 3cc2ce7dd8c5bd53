#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "scicorpus/minhash.hpp"

using namespace scicorpus;

namespace {

// Builds a shingle set directly from explicit element ids, bypassing text.
ShingleSet set_of(std::string id, const std::vector<std::uint64_t>& elems) {
    ShingleSet s;
    s.doc_id = std::move(id);
    for (std::uint64_t e : elems) s.shingles.insert(stable_hash64(std::to_string(e)));
    return s;
}

}  // namespace

TEST_CASE("word tokenizer is lowercase and punctuation-blind") {
    CHECK(tokenize_words("Hello, World! (v2.0)") ==
          std::vector<std::string>{"hello", "world", "v2", "0"});
    CHECK(tokenize_words("") == std::vector<std::string>{});
    CHECK(tokenize_words("  --  ") == std::vector<std::string>{});
    // bytes >= 0x80 survive, so non-Latin text still tokenizes
    CHECK(tokenize_words("caf\xC3\xA9 au lait") ==
          std::vector<std::string>{"caf\xC3\xA9", "au", "lait"});
}

TEST_CASE("shingling yields all 5-token windows") {
    std::vector<std::string> tokens = {"a", "b", "c", "d", "e", "f", "g"};
    ShingleSet s = shingle(tokens, "d");
    CHECK(s.shingles.size() == 3);  // 7 - 5 + 1

    // shorter than n: one whole-sequence shingle
    ShingleSet tiny = shingle({"only", "two"}, "d");
    CHECK(tiny.shingles.size() == 1);

    ShingleSet empty = shingle({}, "d");
    CHECK(empty.shingles.empty());
}

TEST_CASE("identical text yields identical shingle sets and signatures") {
    std::string text = "The same paragraph of words, repeated verbatim across documents.";
    MinHashFamily family{DedupConfig{}};
    ShingleSet a = shingle(tokenize_words(text), "a");
    ShingleSet b = shingle(tokenize_words(text), "b");
    CHECK(a.shingles == b.shingles);
    CHECK(signature(a, family).values == signature(b, family).values);
    CHECK(estimate_jaccard(signature(a, family), signature(b, family)) == 1.0);
}

TEST_CASE("empty shingle set cannot be signed") {
    MinHashFamily family{DedupConfig{}};
    ShingleSet empty;
    empty.doc_id = "empty";
    CHECK_THROWS_AS(signature(empty, family), EmptyDocumentError);
}

TEST_CASE("signature is deterministic for a fixed seed and differs across seeds") {
    ShingleSet s = set_of("d", {1, 2, 3, 4, 5, 6, 7, 8});
    DedupConfig config;
    MinHashSignature a = signature(s, MinHashFamily{config});
    MinHashSignature b = signature(s, MinHashFamily{config});
    CHECK(a.values == b.values);
    CHECK(a.values.size() == 112);

    DedupConfig other = config;
    other.seed = config.seed + 1;
    CHECK(signature(s, MinHashFamily{other}).values != a.values);
}

TEST_CASE("estimator length mismatch is a config error") {
    DedupConfig small;
    small.num_hashes = 16;
    small.bands = 4;
    small.rows = 4;
    ShingleSet s = set_of("d", {1, 2, 3});
    MinHashSignature a = signature(s, MinHashFamily{DedupConfig{}});
    MinHashSignature b = signature(s, MinHashFamily{small});
    CHECK_THROWS_AS(estimate_jaccard(a, b), ConfigError);
}

TEST_CASE("invalid band geometry is rejected") {
    DedupConfig bad;
    bad.bands = 10;
    bad.rows = 10;  // 100 != 112
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("exact jaccard oracle on constructed sets") {
    ShingleSet a = set_of("a", {1, 2, 3, 4});
    ShingleSet b = set_of("b", {3, 4, 5, 6});
    CHECK(exact_jaccard(a, b) == Catch::Approx(2.0 / 6.0));
    CHECK(exact_jaccard(a, a) == 1.0);
    CHECK(exact_jaccard(ShingleSet{}, ShingleSet{}) == 1.0);
    CHECK(exact_jaccard(a, ShingleSet{}) == 0.0);
}

TEST_CASE("estimator matches the exact oracle within binomial error") {
    MinHashFamily family{DedupConfig{}};
    std::mt19937_64 rng(7);
    for (double target : {0.25, 0.5, 0.75, 0.9}) {
        // shared/union sizes chosen so shared/(total) == target exactly
        std::size_t uni = 400;
        std::size_t shared = static_cast<std::size_t>(target * uni);
        double bias_sum = 0;
        int trials = 60, within = 0;
        for (int t = 0; t < trials; ++t) {
            std::uint64_t base = rng();
            std::vector<std::uint64_t> sa, sb;
            for (std::size_t i = 0; i < shared; ++i) {
                sa.push_back(base + i);
                sb.push_back(base + i);
            }
            std::size_t rest = (uni - shared) / 2;
            for (std::size_t i = 0; i < rest; ++i) {
                sa.push_back(base + 1000000 + i);
                sb.push_back(base + 2000000 + i);
            }
            ShingleSet a = set_of("a", sa), b = set_of("b", sb);
            double exact = exact_jaccard(a, b);
            double est = estimate_jaccard(signature(a, family), signature(b, family));
            bias_sum += est - exact;
            double sigma = std::sqrt(exact * (1 - exact) / 112.0);
            if (std::abs(est - exact) <= 4 * sigma) ++within;
        }
        CHECK(std::abs(bias_sum / trials) <= 0.02);
        CHECK(within >= trials - 1);
    }
}

TEST_CASE("lsh bucket keys are stable and band-scoped") {
    DedupConfig config;
    ShingleSet s = set_of("d", {10, 20, 30, 40, 50, 60});
    MinHashSignature sig = signature(s, MinHashFamily{config});
    std::vector<BandBucket> a = lsh_buckets(sig, config);
    std::vector<BandBucket> b = lsh_buckets(sig, config);
    REQUIRE(a.size() == 14);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].band_index == i);
        CHECK(a[i].bucket_key == b[i].bucket_key);
    }
}

TEST_CASE("clustering is transitive and order-invariant") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"b", "c"}, {"a", "b"}, {"x", "y"}};
    std::vector<DuplicateCluster> c1 = cluster(pairs);
    REQUIRE(c1.size() == 2);
    CHECK(c1[0].survivor_doc_id == "a");
    CHECK(c1[0].member_doc_ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(c1[1].survivor_doc_id == "x");

    std::vector<std::pair<std::string, std::string>> shuffled = {
        {"x", "y"}, {"a", "b"}, {"b", "c"}};
    std::vector<DuplicateCluster> c2 = cluster(shuffled);
    REQUIRE(c2.size() == c1.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i].survivor_doc_id == c2[i].survivor_doc_id);
        CHECK(c1[i].member_doc_ids == c2[i].member_doc_ids);
    }
}

TEST_CASE("signature shard round trip and header validation") {
    DedupConfig config;
    MinHashFamily family{config};
    std::vector<MinHashSignature> sigs;
    for (int i = 0; i < 5; ++i)
        sigs.push_back(signature(set_of("doc" + std::to_string(i),
                                        {static_cast<std::uint64_t>(i), 100, 200, 300}),
                                 family));
    std::string shard = write_signature_shard(sigs, config);
    std::vector<MinHashSignature> back = read_signature_shard(shard, config);
    REQUIRE(back.size() == sigs.size());
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        CHECK(back[i].doc_id == sigs[i].doc_id);
        CHECK(back[i].values == sigs[i].values);
    }

    DedupConfig other_seed = config;
    other_seed.seed = config.seed + 99;
    CHECK_THROWS_AS(read_signature_shard(shard, other_seed), ConfigError);
    CHECK_THROWS_AS(read_signature_shard("XXXXgarbage data here", config), IoError);
    CHECK_THROWS_AS(read_signature_shard(shard.substr(0, shard.size() - 5), config), IoError);
}

TEST_CASE("collision pairs find exact duplicates with probability one") {
    DedupConfig config;
    MinHashFamily family{config};
    std::vector<MinHashSignature> sigs;
    ShingleSet twin = set_of("", {7, 8, 9, 10, 11, 12, 13});
    for (const char* id : {"dupA", "dupB"}) {
        ShingleSet s = twin;
        s.doc_id = id;
        sigs.push_back(signature(s, family));
    }
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
        std::vector<std::uint64_t> elems;
        for (int j = 0; j < 50; ++j) elems.push_back(rng());
        sigs.push_back(signature(set_of("rand" + std::to_string(i), elems), family));
    }
    std::vector<std::pair<std::string, std::string>> pairs = collision_pairs(sigs, config);
    bool found = false;
    for (const auto& [a, b] : pairs)
        if (a == "dupA" && b == "dupB") found = true;
    CHECK(found);
    // random unrelated docs should not flood the pair list
    CHECK(pairs.size() <= 3);
}

TEST_CASE("empirical band collision rate follows the s-curve") {
    DedupConfig config;
    MinHashFamily family{config};
    auto s_curve = [](double s) { return 1.0 - std::pow(1.0 - std::pow(s, 8.0), 14.0); };
    std::mt19937_64 rng(11);
    for (double s : {0.2, 0.5, 0.75, 0.9}) {
        std::size_t uni = 200;
        std::size_t shared = static_cast<std::size_t>(s * uni);
        int trials = 400, collided = 0;
        for (int t = 0; t < trials; ++t) {
            std::uint64_t base = rng();
            std::vector<std::uint64_t> sa, sb;
            for (std::size_t i = 0; i < shared; ++i) {
                sa.push_back(base + i);
                sb.push_back(base + i);
            }
            std::size_t rest = (uni - shared) / 2;
            for (std::size_t i = 0; i < rest; ++i) {
                sa.push_back(base + 5000000 + i);
                sb.push_back(base + 9000000 + i);
            }
            MinHashSignature siga = signature(set_of("a", sa), family);
            MinHashSignature sigb = signature(set_of("b", sb), family);
            std::vector<BandBucket> ba = lsh_buckets(siga, config);
            std::vector<BandBucket> bb = lsh_buckets(sigb, config);
            for (std::size_t band = 0; band < ba.size(); ++band)
                if (ba[band].bucket_key == bb[band].bucket_key) {
                    ++collided;
                    break;
                }
        }
        double rate = static_cast<double>(collided) / trials;
        CHECK(std::abs(rate - s_curve(s)) <= 0.05);
    }
}
