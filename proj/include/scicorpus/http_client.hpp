#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "scicorpus/fetch.hpp"
#include "scicorpus/xml.hpp"

namespace scicorpus {

// Fetches one manifest entry. Network failures become outcomes, never
// exceptions; only persistence failures propagate.
inline FetchResult fetch_document(const SnapshotEntry& entry, const FetchPolicy& policy,
                                  ContentStore& store, HostRateLimiter& limiter) {
    FetchResult result;
    result.entry_doi = entry.doi;
    result.fetched_at =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();

    std::string origin = url_origin(entry.url_for_pdf);
    std::string host = url_host(entry.url_for_pdf);
    std::string path = url_path(entry.url_for_pdf);
    if (origin.empty()) {
        result.outcome = FetchOutcome::http_error;
        return result;
    }

    for (std::uint32_t attempt = 0; attempt <= policy.max_retries; ++attempt) {
        result.attempts = attempt + 1;
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(policy.backoff_base_ms << (attempt - 1)));
        limiter.acquire(host);

        httplib::Client client(origin);
        client.set_connection_timeout(policy.timeout_secs, 0);
        client.set_read_timeout(policy.timeout_secs, 0);
        client.set_follow_location(true);

        httplib::Result res = client.Get(path);
        if (!res) {
            result.outcome = res.error() == httplib::Error::ConnectionTimeout ||
                                     res.error() == httplib::Error::Read
                                 ? FetchOutcome::timeout
                                 : FetchOutcome::http_error;
            continue;  // retryable
        }
        if (res->status >= 400) {
            result.outcome = FetchOutcome::http_error;
            continue;  // retryable (transient 5xx and flaky 4xx alike)
        }
        result.content_type = res->get_header_value("Content-Type");
        result.byte_count = res->body.size();
        if (res->body.size() > policy.max_payload_bytes) {
            result.outcome = FetchOutcome::too_large;
            return result;
        }
        result.outcome = sniff_payload(res->body);
        if (result.outcome == FetchOutcome::ok) result.payload_key = store.put(res->body);
        return result;
    }
    return result;
}

enum class StructureErrorKind { retryable, corrupt_structurer_output, oversize };

struct StructureError {
    StructureErrorKind kind;
    std::string message;
};

struct StructureOutcome {
    std::string tei_xml;  // empty on error
    std::uint32_t attempts = 1;
    std::optional<StructureError> error;

    bool ok() const { return !error.has_value(); }
};

// Client for an external Grobid-compatible full-text structurer. The
// response is only validated for well-formed XML with a TEI root; its
// content is passed through verbatim.
class StructurerClient {
public:
    StructurerClient(std::string base_url, std::uint32_t timeout_secs = 120,
                     std::uint32_t max_retries = 2)
        : base_url_(std::move(base_url)), timeout_secs_(timeout_secs), max_retries_(max_retries) {}

    StructureOutcome process_fulltext(std::string_view pdf_bytes) const {
        StructureOutcome out;
        for (std::uint32_t attempt = 0; attempt <= max_retries_; ++attempt) {
            out.attempts = attempt + 1;
            if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100u << (attempt - 1)));

            httplib::Client client(base_url_);
            client.set_connection_timeout(timeout_secs_, 0);
            client.set_read_timeout(timeout_secs_, 0);

            httplib::MultipartFormDataItems form = {
                {"input", std::string(pdf_bytes), "document.pdf", "application/pdf"},
            };
            httplib::Result res = client.Post("/api/processFulltextDocument", form);
            if (!res || res->status >= 500) {
                out.error = StructureError{StructureErrorKind::retryable,
                                           !res ? "transport error" : "server error " +
                                                                          std::to_string(res->status)};
                continue;
            }
            if (res->status >= 400) {
                out.error = StructureError{StructureErrorKind::corrupt_structurer_output,
                                           "client error " + std::to_string(res->status)};
                return out;
            }
            if (!validate_tei(res->body)) {
                out.error = StructureError{StructureErrorKind::corrupt_structurer_output,
                                           "response is not well-formed TEI XML"};
                return out;
            }
            out.error.reset();
            out.tei_xml = res->body;
            return out;
        }
        return out;
    }

    // Well-formedness plus a TEI root, nothing more.
    static bool validate_tei(const std::string& body) {
        try {
            std::istringstream in(body);
            XmlReader reader(in);
            XmlReader::Event ev = reader.next();
            while (ev == XmlReader::Event::Text) ev = reader.next();
            if (ev != XmlReader::Event::StartElement || reader.local_name() != "TEI") return false;
            while (reader.next() != XmlReader::Event::Eof) {}
            return true;
        } catch (const XmlParseError&) {
            return false;
        }
    }

private:
    std::string base_url_;
    std::uint32_t timeout_secs_;
    std::uint32_t max_retries_;
};

}  // namespace scicorpus
