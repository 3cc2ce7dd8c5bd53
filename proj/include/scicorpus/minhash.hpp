#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scicorpus/hash.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

class EmptyDocumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DedupConfig {
    std::size_t num_hashes = 112;
    std::size_t bands = 14;
    std::size_t rows = 8;
    double similarity_target = 0.75;
    std::size_t ngram = 5;
    std::uint64_t seed = kStableHashSeed;

    void validate() const {
        if (bands * rows != num_hashes)
            throw ConfigError("dedup config: bands (" + std::to_string(bands) + ") * rows (" +
                              std::to_string(rows) + ") must equal num_hashes (" +
                              std::to_string(num_hashes) + ")");
        if (ngram < 1) throw ConfigError("dedup config: ngram must be >= 1");
    }
};

// Pinned word tokenizer: lowercase, every non-alphanumeric byte becomes a
// space, split on whitespace. Bytes >= 0x80 are kept, so non-Latin words
// survive intact. Locale-independent by construction.
inline std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (c >= 0x80 || std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

struct ShingleSet {
    std::string doc_id;
    std::unordered_set<std::uint64_t> shingles;
};

// All contiguous n-token windows, base-hashed into a set. Sequences shorter
// than n yield one shingle over the whole sequence.
inline ShingleSet shingle(const std::vector<std::string>& tokens, std::string doc_id,
                          std::size_t n = 5, std::uint64_t seed = kStableHashSeed) {
    ShingleSet set;
    set.doc_id = std::move(doc_id);
    if (tokens.empty()) return set;
    std::size_t windows = tokens.size() >= n ? tokens.size() - n + 1 : 1;
    std::size_t width = std::min(n, tokens.size());
    std::string buf;
    for (std::size_t i = 0; i < windows; ++i) {
        buf.clear();
        for (std::size_t j = 0; j < width; ++j) {
            if (j) buf.push_back('\x1f');
            buf += tokens[i + j];
        }
        set.shingles.insert(stable_hash64(buf, seed));
    }
    return set;
}

struct MinHashSignature {
    std::string doc_id;
    std::vector<std::uint64_t> values;
};

// The family h_i(x) = (a_i * x + b_i) mod p over the 61-bit Mersenne prime,
// with coefficients drawn from a generator seeded by config.seed.
class MinHashFamily {
public:
    static constexpr std::uint64_t kPrime = (1ULL << 61) - 1;

    explicit MinHashFamily(const DedupConfig& config) {
        config.validate();
        std::mt19937_64 rng(config.seed);
        std::uniform_int_distribution<std::uint64_t> dist_a(1, kPrime - 1);
        std::uniform_int_distribution<std::uint64_t> dist_b(0, kPrime - 1);
        a_.reserve(config.num_hashes);
        b_.reserve(config.num_hashes);
        for (std::size_t i = 0; i < config.num_hashes; ++i) {
            a_.push_back(dist_a(rng));
            b_.push_back(dist_b(rng));
        }
    }

    std::uint64_t hash(std::size_t i, std::uint64_t x) const {
        unsigned __int128 v = static_cast<unsigned __int128>(a_[i]) * (x % kPrime) + b_[i];
        return static_cast<std::uint64_t>(v % kPrime);
    }

    std::size_t size() const { return a_.size(); }

private:
    std::vector<std::uint64_t> a_;
    std::vector<std::uint64_t> b_;
};

inline MinHashSignature signature(const ShingleSet& shingles, const MinHashFamily& family) {
    if (shingles.shingles.empty())
        throw EmptyDocumentError("cannot sign empty shingle set for " + shingles.doc_id);
    MinHashSignature sig;
    sig.doc_id = shingles.doc_id;
    sig.values.assign(family.size(), UINT64_MAX);
    for (std::uint64_t x : shingles.shingles)
        for (std::size_t i = 0; i < family.size(); ++i)
            sig.values[i] = std::min(sig.values[i], family.hash(i, x));
    return sig;
}

// Positionwise agreement rate, the standard unbiased Jaccard estimator.
inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size())
        throw ConfigError("signature length mismatch: " + std::to_string(a.values.size()) +
                          " vs " + std::to_string(b.values.size()));
    if (a.values.empty()) return 0.0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] == b.values[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

inline double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.shingles.empty() && b.shingles.empty()) return 1.0;
    std::size_t inter = 0;
    for (std::uint64_t x : a.shingles)
        if (b.shingles.count(x)) ++inter;
    std::size_t uni = a.shingles.size() + b.shingles.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct BandBucket {
    std::size_t band_index;
    std::uint64_t bucket_key;
};

// Band k covers rows [k*rows, (k+1)*rows); the key hashes the band's values
// together with the band index, so buckets never collide across bands.
inline std::vector<BandBucket> lsh_buckets(const MinHashSignature& sig, const DedupConfig& config) {
    config.validate();
    if (sig.values.size() != config.num_hashes)
        throw ConfigError("signature length does not match dedup config");
    std::vector<BandBucket> out;
    out.reserve(config.bands);
    std::string band_bytes(config.rows * 8, '\0');
    for (std::size_t band = 0; band < config.bands; ++band) {
        for (std::size_t row = 0; row < config.rows; ++row) {
            std::uint64_t v = sig.values[band * config.rows + row];
            std::memcpy(band_bytes.data() + row * 8, &v, 8);
        }
        out.push_back(BandBucket{band, stable_hash64(band_bytes, config.seed ^ mix64(band))});
    }
    return out;
}

struct DuplicateCluster {
    std::vector<std::string> member_doc_ids;  // sorted
    std::string survivor_doc_id;              // lexicographically smallest member
};

namespace detail {

class UnionFind {
public:
    std::size_t add(const std::string& id) {
        auto [it, inserted] = index_.emplace(id, parent_.size());
        if (inserted) {
            parent_.push_back(it->second);
            rank_.push_back(0);
        }
        return it->second;
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

    const std::unordered_map<std::string, std::size_t>& ids() const { return index_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> rank_;
};

}  // namespace detail

// Connected components over the collision-pair stream. Output is sorted by
// survivor, so the result is independent of pair order and worker count.
inline std::vector<DuplicateCluster> cluster(
    const std::vector<std::pair<std::string, std::string>>& collision_pairs) {
    detail::UnionFind uf;
    for (const auto& [a, b] : collision_pairs) uf.unite(uf.add(a), uf.add(b));

    std::map<std::size_t, std::vector<std::string>> components;
    for (const auto& [id, idx] : uf.ids()) components[uf.find(idx)].push_back(id);

    std::vector<DuplicateCluster> clusters;
    for (auto& [root, members] : components) {
        std::sort(members.begin(), members.end());
        DuplicateCluster c;
        c.survivor_doc_id = members.front();
        c.member_doc_ids = std::move(members);
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const DuplicateCluster& a, const DuplicateCluster& b) {
                  return a.survivor_doc_id < b.survivor_doc_id;
              });
    return clusters;
}

// --- signature shard files -------------------------------------------------
//
// Binary layout, little-endian:
//   magic "SCMH" (4) | version u16 | num_hashes u16 | seed u64      = 16-byte header
//   repeated: doc_id length u16 | doc_id bytes | num_hashes * u64
// Readers reject shards whose seed or num_hashes differ from the config.

inline constexpr char kSignatureMagic[4] = {'S', 'C', 'M', 'H'};
inline constexpr std::uint16_t kSignatureVersion = 1;

inline std::string write_signature_shard(const std::vector<MinHashSignature>& sigs,
                                         const DedupConfig& config) {
    std::string out;
    out.append(kSignatureMagic, 4);
    auto put16 = [&out](std::uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); };
    auto put64 = [&out](std::uint64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); };
    put16(kSignatureVersion);
    put16(static_cast<std::uint16_t>(config.num_hashes));
    put64(config.seed);
    for (const MinHashSignature& sig : sigs) {
        if (sig.values.size() != config.num_hashes)
            throw ConfigError("signature length mismatch writing shard");
        if (sig.doc_id.size() > UINT16_MAX) throw ConfigError("doc_id too long for shard format");
        put16(static_cast<std::uint16_t>(sig.doc_id.size()));
        out += sig.doc_id;
        for (std::uint64_t v : sig.values) put64(v);
    }
    return out;
}

inline std::vector<MinHashSignature> read_signature_shard(std::string_view data,
                                                          const DedupConfig& config) {
    if (data.size() < 16 || std::memcmp(data.data(), kSignatureMagic, 4) != 0)
        throw IoError("not a signature shard (bad magic)");
    std::uint16_t version, num_hashes;
    std::uint64_t seed;
    std::memcpy(&version, data.data() + 4, 2);
    std::memcpy(&num_hashes, data.data() + 6, 2);
    std::memcpy(&seed, data.data() + 8, 8);
    if (version != kSignatureVersion)
        throw IoError("unsupported signature shard version " + std::to_string(version));
    if (num_hashes != config.num_hashes || seed != config.seed)
        throw ConfigError("signature shard written with different num_hashes/seed");

    std::vector<MinHashSignature> sigs;
    std::size_t pos = 16;
    while (pos < data.size()) {
        if (pos + 2 > data.size()) throw IoError("truncated signature shard");
        std::uint16_t id_len;
        std::memcpy(&id_len, data.data() + pos, 2);
        pos += 2;
        if (pos + id_len + num_hashes * 8ull > data.size())
            throw IoError("truncated signature shard record");
        MinHashSignature sig;
        sig.doc_id.assign(data.data() + pos, id_len);
        pos += id_len;
        sig.values.resize(num_hashes);
        std::memcpy(sig.values.data(), data.data() + pos, num_hashes * 8ull);
        pos += num_hashes * 8ull;
        sigs.push_back(std::move(sig));
    }
    return sigs;
}

// Groups bucket keys globally and emits each colliding pair once, smaller id
// first, deduplicated and sorted.
inline std::vector<std::pair<std::string, std::string>> collision_pairs(
    const std::vector<MinHashSignature>& sigs, const DedupConfig& config) {
    std::unordered_map<std::uint64_t, std::vector<const std::string*>> buckets;
    for (const MinHashSignature& sig : sigs)
        for (const BandBucket& b : lsh_buckets(sig, config))
            buckets[b.bucket_key].push_back(&sig.doc_id);

    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto& [key, members] : buckets) {
        if (members.size() < 2) continue;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const std::string& a = *members[i];
                const std::string& b = *members[j];
                if (a == b) continue;
                pairs.emplace_back(std::min(a, b), std::max(a, b));
            }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

}  // namespace scicorpus
