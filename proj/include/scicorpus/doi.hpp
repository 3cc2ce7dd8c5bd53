#pragma once

#include <string>
#include <string_view>

#include "scicorpus/util.hpp"

namespace scicorpus {

// DOIs are case-insensitive and appear with assorted scheme/prefix forms;
// everything downstream (partitioning, bibliography matching) works on the
// normalized form: lowercase, prefix-stripped, trimmed.
inline std::string normalize_doi(std::string_view raw) {
    std::string s = to_lower_ascii(trim(raw));
    static const char* prefixes[] = {
        "https://doi.org/", "http://doi.org/",
        "https://dx.doi.org/", "http://dx.doi.org/",
        "doi.org/", "doi:",
    };
    bool stripped = true;
    while (stripped) {
        stripped = false;
        for (const char* p : prefixes) {
            if (starts_with(s, p)) {
                s.erase(0, std::string_view(p).size());
                s = std::string(trim(s));
                stripped = true;
            }
        }
    }
    return s;
}

}  // namespace scicorpus
