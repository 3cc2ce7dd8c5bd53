#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scicorpus/util.hpp"

namespace scicorpus {

class XmlParseError : public std::runtime_error {
public:
    XmlParseError(std::uint64_t byte_offset, const std::string& message)
        : std::runtime_error("XML error at byte " + std::to_string(byte_offset) + ": " + message),
          byte_offset(byte_offset) {}
    std::uint64_t byte_offset;
};

// Event-driven pull parser. Memory is bounded by the largest single token
// (text run, tag, comment), not by document size. Handles the subset of XML
// that structured-document toolchains emit: elements, attributes, character
// data, CDATA, comments, processing instructions, DOCTYPE, and the five
// predefined entities plus numeric character references.
class XmlReader {
public:
    enum class Event { StartElement, EndElement, Text, Eof };

    explicit XmlReader(std::istream& in) : in_(in) {}

    Event next() {
        if (pending_end_) {
            pending_end_ = false;
            name_ = stack_.back();
            stack_.pop_back();
            return Event::EndElement;
        }
        while (true) {
            if (!ensure(1)) {
                if (!stack_.empty())
                    throw XmlParseError(offset(), "truncated document: end of input inside <" + stack_.back() + ">");
                return Event::Eof;
            }
            if (buf_[pos_] != '<') {
                if (read_text()) return Event::Text;
                continue;
            }
            ensure(2);
            char c = pos_ + 1 < buf_.size() ? buf_[pos_ + 1] : '\0';
            if (c == '?') {
                skip_until("?>");
            } else if (c == '!') {
                ensure(4);
                if (buf_.compare(pos_, 4, "<!--") == 0) {
                    skip_until("-->");
                } else if (ensure(9) && buf_.compare(pos_, 9, "<![CDATA[") == 0) {
                    read_cdata();
                    return Event::Text;
                } else {
                    skip_doctype();
                }
            } else if (c == '/') {
                read_end_tag();
                return Event::EndElement;
            } else {
                read_start_tag();
                return Event::StartElement;
            }
        }
    }

    // Valid after StartElement / EndElement.
    const std::string& name() const { return name_; }

    // Element name without namespace prefix.
    std::string_view local_name() const {
        std::size_t colon = name_.rfind(':');
        return colon == std::string::npos ? std::string_view(name_)
                                          : std::string_view(name_).substr(colon + 1);
    }

    // Valid after StartElement.
    const std::vector<std::pair<std::string, std::string>>& attributes() const { return attrs_; }

    std::string_view attribute(std::string_view key) const {
        for (const auto& [k, v] : attrs_)
            if (k == key) return v;
        return {};
    }

    // Valid after Text; entity references already decoded.
    const std::string& text() const { return text_; }

    std::size_t depth() const { return stack_.size() + (pending_end_ ? 1 : 0); }

    std::uint64_t offset() const { return base_offset_ + pos_; }

private:
    bool ensure(std::size_t need) {
        while (buf_.size() - pos_ < need) {
            if (eof_) return false;
            if (pos_ > kCompactThreshold) {
                base_offset_ += pos_;
                buf_.erase(0, pos_);
                pos_ = 0;
            }
            std::size_t old = buf_.size();
            buf_.resize(old + kChunk);
            in_.read(buf_.data() + old, kChunk);
            std::size_t got = static_cast<std::size_t>(in_.gcount());
            buf_.resize(old + got);
            if (got == 0) eof_ = true;
        }
        return true;
    }

    // Finds `needle` starting at pos_, refilling as needed. Returns its index.
    // `scanned` is tracked relative to pos_ so buffer compaction cannot skip
    // a match.
    std::size_t find(std::string_view needle) {
        std::size_t scanned = 0;
        while (true) {
            std::size_t back = needle.size() - 1;
            std::size_t start = pos_ + (scanned > back ? scanned - back : 0);
            std::size_t hit = buf_.find(needle, start);
            if (hit != std::string::npos) return hit;
            scanned = buf_.size() - pos_;
            if (!ensure(scanned + 1))
                throw XmlParseError(base_offset_ + buf_.size(),
                                    "unexpected end of input, expected '" + std::string(needle) + "'");
        }
    }

    void skip_until(std::string_view terminator) {
        std::size_t end = find(terminator);
        pos_ = end + terminator.size();
    }

    void skip_doctype() {
        // DOCTYPE may carry an internal subset in brackets.
        int bracket = 0;
        while (true) {
            if (!ensure(1)) throw XmlParseError(offset(), "unterminated DOCTYPE");
            char c = buf_[pos_++];
            if (c == '[') ++bracket;
            else if (c == ']') --bracket;
            else if (c == '>' && bracket == 0) return;
        }
    }

    bool read_text() {
        text_.clear();
        std::size_t start = pos_;
        while (true) {
            std::size_t lt = buf_.find('<', pos_);
            if (lt != std::string::npos) {
                append_decoded(std::string_view(buf_).substr(start, lt - start));
                pos_ = lt;
                break;
            }
            append_decoded(std::string_view(buf_).substr(start, buf_.size() - start));
            pos_ = buf_.size();
            if (!ensure(1)) break;
            start = pos_;
        }
        if (stack_.empty()) {
            // Character data outside the root must be whitespace.
            if (!trim(text_).empty())
                throw XmlParseError(offset(), "character data outside root element");
            return false;
        }
        return !text_.empty();
    }

    void read_cdata() {
        pos_ += 9;  // <![CDATA[
        std::size_t end = find("]]>");
        text_.assign(buf_, pos_, end - pos_);
        pos_ = end + 3;
        if (stack_.empty()) throw XmlParseError(offset(), "CDATA outside root element");
    }

    void read_end_tag() {
        std::size_t end = find(">");
        std::string_view inner = std::string_view(buf_).substr(pos_ + 2, end - pos_ - 2);
        std::string tag(trim(inner));
        if (stack_.empty())
            throw XmlParseError(offset(), "closing tag </" + tag + "> with no open element");
        if (stack_.back() != tag)
            throw XmlParseError(offset(), "mismatched closing tag </" + tag + ">, expected </" +
                                              stack_.back() + ">");
        pos_ = end + 1;
        name_ = std::move(stack_.back());
        stack_.pop_back();
    }

    void read_start_tag() {
        std::size_t end = find(">");
        std::string_view tag = std::string_view(buf_).substr(pos_ + 1, end - pos_ - 1);
        bool self_closing = !tag.empty() && tag.back() == '/';
        if (self_closing) tag.remove_suffix(1);

        if (stack_.empty() && root_seen_)
            throw XmlParseError(offset(), "multiple root elements");

        std::size_t i = 0;
        while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
        name_.assign(tag.substr(0, i));
        if (name_.empty()) throw XmlParseError(offset(), "empty element name");
        attrs_.clear();
        parse_attributes(tag.substr(i));

        pos_ = end + 1;
        root_seen_ = true;
        stack_.push_back(name_);
        pending_end_ = self_closing;
    }

    void parse_attributes(std::string_view s) {
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            if (i >= s.size()) break;
            std::size_t key_start = i;
            while (i < s.size() && s[i] != '=' &&
                   !std::isspace(static_cast<unsigned char>(s[i])))
                ++i;
            std::string key(s.substr(key_start, i - key_start));
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            if (i >= s.size() || s[i] != '=')
                throw XmlParseError(offset(), "attribute '" + key + "' missing value");
            ++i;
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            if (i >= s.size() || (s[i] != '"' && s[i] != '\''))
                throw XmlParseError(offset(), "attribute '" + key + "' value not quoted");
            char quote = s[i++];
            std::size_t val_start = i;
            while (i < s.size() && s[i] != quote) ++i;
            if (i >= s.size())
                throw XmlParseError(offset(), "unterminated attribute value for '" + key + "'");
            std::string value;
            decode_entities(s.substr(val_start, i - val_start), value);
            ++i;
            attrs_.emplace_back(std::move(key), std::move(value));
        }
    }

    void append_decoded(std::string_view raw) { decode_entities(raw, text_); }

    static void decode_entities(std::string_view raw, std::string& out) {
        std::size_t i = 0;
        while (i < raw.size()) {
            char c = raw[i];
            if (c != '&') {
                out.push_back(c);
                ++i;
                continue;
            }
            std::size_t semi = raw.find(';', i);
            if (semi == std::string_view::npos || semi - i > 12) {
                out.push_back(c);  // bare ampersand, pass through
                ++i;
                continue;
            }
            std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out.push_back('&');
            else if (ent == "lt") out.push_back('<');
            else if (ent == "gt") out.push_back('>');
            else if (ent == "quot") out.push_back('"');
            else if (ent == "apos") out.push_back('\'');
            else if (!ent.empty() && ent[0] == '#') append_codepoint(ent.substr(1), out);
            else {
                out.push_back('&');  // unknown entity, pass through verbatim
                ++i;
                continue;
            }
            i = semi + 1;
        }
    }

    static void append_codepoint(std::string_view num, std::string& out) {
        std::uint32_t cp = 0;
        if (!num.empty() && (num[0] == 'x' || num[0] == 'X')) {
            for (char c : num.substr(1))
                cp = cp * 16 + static_cast<std::uint32_t>(
                                   std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                               : (std::tolower(c) - 'a' + 10));
        } else {
            for (char c : num) cp = cp * 10 + static_cast<std::uint32_t>(c - '0');
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    static constexpr std::size_t kChunk = 1 << 16;
    static constexpr std::size_t kCompactThreshold = 1 << 16;

    std::istream& in_;
    std::string buf_;
    std::size_t pos_ = 0;
    std::uint64_t base_offset_ = 0;
    bool eof_ = false;
    bool root_seen_ = false;
    bool pending_end_ = false;
    std::string name_;
    std::string text_;
    std::vector<std::pair<std::string, std::string>> attrs_;
    std::vector<std::string> stack_;
};

inline void xml_escape(std::string_view s, std::string& out) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
}

}  // namespace scicorpus
