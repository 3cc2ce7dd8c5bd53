#pragma once

#include <zlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "scicorpus/util.hpp"

namespace scicorpus {

// Pull-based byte source over a file, transparently inflating gzip input.
// Compression is detected by the 1f 8b magic bytes, never by file extension.
class ByteSource {
public:
    explicit ByteSource(const std::filesystem::path& path)
        : in_(path, std::ios::binary), path_(path.string()) {
        if (!in_) throw IoError("cannot open " + path_);
        raw_.resize(kChunk);
        unsigned char magic[2] = {0, 0};
        in_.read(reinterpret_cast<char*>(magic), 2);
        std::size_t got = static_cast<std::size_t>(in_.gcount());
        gzip_ = (got == 2 && magic[0] == 0x1f && magic[1] == 0x8b);
        pending_.assign(reinterpret_cast<char*>(magic), got);
        if (gzip_) {
            z_ = std::make_unique<z_stream>();
            z_->zalloc = Z_NULL;
            z_->zfree = Z_NULL;
            z_->opaque = Z_NULL;
            if (inflateInit2(z_.get(), 16 + MAX_WBITS) != Z_OK)
                throw IoError("inflateInit failed for " + path_);
        }
    }

    ~ByteSource() {
        if (z_) inflateEnd(z_.get());
    }

    ByteSource(const ByteSource&) = delete;
    ByteSource& operator=(const ByteSource&) = delete;

    // Reads up to `cap` decoded bytes; returns 0 at end of stream.
    std::size_t read(char* dst, std::size_t cap) {
        if (!gzip_) {
            std::size_t n = 0;
            if (!pending_.empty()) {
                n = std::min(cap, pending_.size());
                std::copy(pending_.begin(), pending_.begin() + static_cast<long>(n), dst);
                pending_.erase(0, n);
            }
            if (n < cap && in_) {
                in_.read(dst + n, static_cast<std::streamsize>(cap - n));
                n += static_cast<std::size_t>(in_.gcount());
            }
            return n;
        }
        z_->next_out = reinterpret_cast<Bytef*>(dst);
        z_->avail_out = static_cast<uInt>(cap);
        while (z_->avail_out > 0) {
            if (z_->avail_in == 0) {
                std::size_t filled = pending_.size();
                pending_.copy(raw_.data(), filled);
                pending_.clear();
                if (filled < raw_.size() && in_) {
                    in_.read(raw_.data() + filled, static_cast<std::streamsize>(raw_.size() - filled));
                    filled += static_cast<std::size_t>(in_.gcount());
                }
                if (filled == 0) break;
                z_->next_in = reinterpret_cast<Bytef*>(raw_.data());
                z_->avail_in = static_cast<uInt>(filled);
            }
            int rc = inflate(z_.get(), Z_NO_FLUSH);
            if (rc == Z_STREAM_END) break;
            if (rc != Z_OK) throw IoError("gzip inflate error in " + path_);
        }
        return cap - z_->avail_out;
    }

private:
    static constexpr std::size_t kChunk = 1 << 16;
    std::ifstream in_;
    std::string path_;
    std::string pending_;
    std::vector<char> raw_;
    bool gzip_ = false;
    std::unique_ptr<z_stream> z_;
};

// Line iterator over a ByteSource. Memory stays bounded by the longest line,
// not the file size.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path) : src_(path) {}

    // Returns false at end of input. `line` excludes the newline.
    bool next(std::string& line) {
        line.clear();
        while (true) {
            if (pos_ < buf_.size()) {
                std::size_t nl = buf_.find('\n', pos_);
                if (nl != std::string::npos) {
                    line.append(buf_, pos_, nl - pos_);
                    byte_offset_ += nl - pos_ + 1;
                    pos_ = nl + 1;
                    ++line_number_;
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    return true;
                }
                line.append(buf_, pos_, buf_.size() - pos_);
                byte_offset_ += buf_.size() - pos_;
                pos_ = buf_.size();
            }
            buf_.resize(kChunk);
            std::size_t n = src_.read(buf_.data(), buf_.size());
            buf_.resize(n);
            pos_ = 0;
            if (n == 0) {
                if (!line.empty()) {
                    ++line_number_;
                    if (line.back() == '\r') line.pop_back();
                    return true;
                }
                return false;
            }
        }
    }

    std::size_t line_number() const { return line_number_; }
    std::uint64_t byte_offset() const { return byte_offset_; }

private:
    static constexpr std::size_t kChunk = 1 << 16;
    ByteSource src_;
    std::string buf_;
    std::size_t pos_ = 0;
    std::size_t line_number_ = 0;
    std::uint64_t byte_offset_ = 0;
};

inline std::string gzip_compress(std::string_view data) {
    z_stream z{};
    if (deflateInit2(&z, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("deflateInit failed");
    std::string out(deflateBound(&z, static_cast<uLong>(data.size())), '\0');
    z.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    z.avail_in = static_cast<uInt>(data.size());
    z.next_out = reinterpret_cast<Bytef*>(out.data());
    z.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&z, Z_FINISH);
    deflateEnd(&z);
    if (rc != Z_STREAM_END) throw IoError("gzip compression failed");
    out.resize(out.size() - z.avail_out);
    return out;
}

}  // namespace scicorpus
