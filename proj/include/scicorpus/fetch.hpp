#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "scicorpus/snapshot.hpp"
#include "scicorpus/util.hpp"

namespace scicorpus {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    return to_hex(digest, len);
}

// Content-addressed payload store with a 2-level hex fan-out
// (ab/cd/abcd...). Identical bytes land on the same path, so nothing is
// ever persisted twice.
class ContentStore {
public:
    explicit ContentStore(std::filesystem::path root) : root_(std::move(root)) {}

    std::string put(std::string_view payload) {
        std::string key = sha256_hex(payload);
        std::filesystem::path path = path_for(key);
        if (!std::filesystem::exists(path)) atomic_write_file(path, payload);
        return key;
    }

    bool contains(const std::string& key) const { return std::filesystem::exists(path_for(key)); }

    std::string get(const std::string& key) const { return read_file(path_for(key)); }

    std::filesystem::path path_for(const std::string& key) const {
        return root_ / key.substr(0, 2) / key.substr(2, 2) / key;
    }

private:
    std::filesystem::path root_;
};

enum class FetchOutcome { ok, http_error, timeout, landing_page, not_pdf, too_large, corrupted };

inline const char* fetch_outcome_name(FetchOutcome o) {
    switch (o) {
        case FetchOutcome::ok: return "ok";
        case FetchOutcome::http_error: return "http_error";
        case FetchOutcome::timeout: return "timeout";
        case FetchOutcome::landing_page: return "landing_page";
        case FetchOutcome::not_pdf: return "not_pdf";
        case FetchOutcome::too_large: return "too_large";
        case FetchOutcome::corrupted: return "corrupted";
    }
    return "corrupted";
}

inline FetchOutcome fetch_outcome_from_name(std::string_view name) {
    if (name == "ok") return FetchOutcome::ok;
    if (name == "http_error") return FetchOutcome::http_error;
    if (name == "timeout") return FetchOutcome::timeout;
    if (name == "landing_page") return FetchOutcome::landing_page;
    if (name == "not_pdf") return FetchOutcome::not_pdf;
    if (name == "too_large") return FetchOutcome::too_large;
    return FetchOutcome::corrupted;
}

// Retrying again cannot change these outcomes.
inline bool fetch_outcome_terminal(FetchOutcome o) {
    return o == FetchOutcome::ok || o == FetchOutcome::landing_page ||
           o == FetchOutcome::not_pdf || o == FetchOutcome::too_large ||
           o == FetchOutcome::corrupted;
}

struct FetchResult {
    std::string entry_doi;
    FetchOutcome outcome = FetchOutcome::http_error;
    std::string content_type;
    std::uint64_t byte_count = 0;
    std::uint32_t attempts = 1;
    std::int64_t fetched_at = 0;  // unix seconds
    std::string payload_key;      // content-store key when outcome == ok
};

struct FetchPolicy {
    std::uint32_t max_retries = 2;  // 3 attempts total
    double rate_limit_per_host = 5.0;  // requests per second
    std::uint32_t timeout_secs = 30;
    std::uint64_t max_payload_bytes = 256ull << 20;
    std::uint32_t backoff_base_ms = 100;
};

// Magic-byte sniffing; content-type headers from publishers are not trusted.
inline FetchOutcome sniff_payload(std::string_view payload) {
    if (payload.empty()) return FetchOutcome::corrupted;
    if (starts_with(payload, "%PDF")) return FetchOutcome::ok;
    std::string head = to_lower_ascii(payload.substr(0, 512));
    if (head.find("<html") != std::string::npos || head.find("<!doctype html") != std::string::npos)
        return FetchOutcome::landing_page;
    return FetchOutcome::not_pdf;
}

// Global per-host limiter: enforces a minimum interval between requests to
// the same host across all worker threads.
class HostRateLimiter {
public:
    explicit HostRateLimiter(double requests_per_second)
        : interval_(requests_per_second > 0
                        ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(1.0 / requests_per_second))
                        : std::chrono::steady_clock::duration::zero()) {}

    void acquire(const std::string& host) {
        if (interval_.count() == 0) return;
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto now = std::chrono::steady_clock::now();
            auto& next = next_slot_[host];
            if (next < now) next = now;
            slot = next;
            next += interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    std::chrono::steady_clock::duration interval_;
    std::mutex mutex_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

inline std::string url_host(std::string_view url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string_view::npos) return {};
    std::size_t start = scheme + 3;
    std::size_t end = url.find('/', start);
    return std::string(url.substr(start, end == std::string_view::npos ? end : end - start));
}

inline std::string url_origin(std::string_view url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string_view::npos) return {};
    std::size_t slash = url.find('/', scheme + 3);
    return std::string(url.substr(0, slash));
}

inline std::string url_path(std::string_view url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string_view::npos) return "/";
    std::size_t slash = url.find('/', scheme + 3);
    return slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
}

// Append-only fetch ledger, one record per attempt outcome. Terminal states
// make a partition re-run skip the entry; retryable ones re-enter the
// work-list.
class FetchLedger {
public:
    explicit FetchLedger(std::filesystem::path path) : path_(std::move(path)) {
        if (std::filesystem::exists(path_)) {
            std::ifstream in(path_);
            std::string line;
            while (std::getline(in, line)) {
                if (trim(line).empty()) continue;
                nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded()) continue;
                absorb(from_json(j));
            }
        }
        std::filesystem::create_directories(path_.parent_path());
        out_.open(path_, std::ios::app);
        if (!out_) throw IoError("cannot open ledger " + path_.string());
    }

    void record(const FetchResult& r) {
        auto it = latest_.find(r.entry_doi);
        // Re-recording the same (doi, attempts) pair is a no-op.
        if (it != latest_.end() && it->second.attempts == r.attempts &&
            it->second.outcome == r.outcome)
            return;
        out_ << to_json(r).dump() << "\n";
        out_.flush();
        if (!out_) throw IoError("ledger write failed: " + path_.string());
        absorb(r);
    }

    const std::map<std::string, FetchResult>& latest() const { return latest_; }

    bool is_terminal(const std::string& doi) const {
        auto it = latest_.find(doi);
        return it != latest_.end() && fetch_outcome_terminal(it->second.outcome);
    }

    // Entries of the partition still needing work.
    std::vector<SnapshotEntry> work_list(const std::vector<SnapshotEntry>& partition) const {
        std::vector<SnapshotEntry> todo;
        for (const SnapshotEntry& e : partition)
            if (!is_terminal(e.doi)) todo.push_back(e);
        return todo;
    }

    static nlohmann::json to_json(const FetchResult& r) {
        return nlohmann::json{{"doi", r.entry_doi},
                              {"outcome", fetch_outcome_name(r.outcome)},
                              {"content_type", r.content_type},
                              {"byte_count", r.byte_count},
                              {"attempts", r.attempts},
                              {"fetched_at", r.fetched_at},
                              {"payload_key", r.payload_key}};
    }

    static FetchResult from_json(const nlohmann::json& j) {
        FetchResult r;
        r.entry_doi = j.value("doi", "");
        r.outcome = fetch_outcome_from_name(j.value("outcome", "corrupted"));
        r.content_type = j.value("content_type", "");
        r.byte_count = j.value("byte_count", std::uint64_t{0});
        r.attempts = j.value("attempts", 1u);
        r.fetched_at = j.value("fetched_at", std::int64_t{0});
        r.payload_key = j.value("payload_key", "");
        return r;
    }

private:
    void absorb(const FetchResult& r) { latest_[r.entry_doi] = r; }

    std::filesystem::path path_;
    std::ofstream out_;
    std::map<std::string, FetchResult> latest_;
};

}  // namespace scicorpus
