#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scicorpus/util.hpp"

namespace scicorpus {

enum class LicenseClass {
    cc_by,
    cc_by_sa,
    cc_by_nc,
    cc_by_nc_sa,
    cc_by_nd,
    cc_by_nc_nd,
    cc0,
    publisher_specific,
    other_open,
    unidentified,
};

inline const char* license_class_name(LicenseClass c) {
    switch (c) {
        case LicenseClass::cc_by: return "cc_by";
        case LicenseClass::cc_by_sa: return "cc_by_sa";
        case LicenseClass::cc_by_nc: return "cc_by_nc";
        case LicenseClass::cc_by_nc_sa: return "cc_by_nc_sa";
        case LicenseClass::cc_by_nd: return "cc_by_nd";
        case LicenseClass::cc_by_nc_nd: return "cc_by_nc_nd";
        case LicenseClass::cc0: return "cc0";
        case LicenseClass::publisher_specific: return "publisher_specific";
        case LicenseClass::other_open: return "other_open";
        case LicenseClass::unidentified: return "unidentified";
    }
    return "unidentified";
}

inline LicenseClass license_class_from_name(std::string_view name) {
    for (LicenseClass c :
         {LicenseClass::cc_by, LicenseClass::cc_by_sa, LicenseClass::cc_by_nc,
          LicenseClass::cc_by_nc_sa, LicenseClass::cc_by_nd, LicenseClass::cc_by_nc_nd,
          LicenseClass::cc0, LicenseClass::publisher_specific, LicenseClass::other_open,
          LicenseClass::unidentified})
        if (name == license_class_name(c)) return c;
    return LicenseClass::unidentified;
}

// Default redistribution policy; a local policy table can widen or narrow it.
struct RedistributionPolicy {
    std::set<LicenseClass> redistributable = {LicenseClass::cc_by, LicenseClass::cc_by_sa,
                                              LicenseClass::cc0};

    bool allows(LicenseClass c) const { return redistributable.count(c) > 0; }
};

namespace detail {

inline bool contains_any(std::string_view haystack, std::initializer_list<const char*> needles) {
    for (const char* n : needles)
        if (haystack.find(n) != std::string_view::npos) return true;
    return false;
}

}  // namespace detail

// Case-insensitive pattern table over URL forms, SPDX-like tokens, and prose.
// Most specific variants are tested first so "by-nc-nd" never matches as
// plain "by". Every input maps to exactly one class.
inline LicenseClass normalize_license(std::string_view license_raw) {
    std::string s = to_lower_ascii(trim(license_raw));
    if (s.empty()) return LicenseClass::unidentified;
    // normalize separators so "cc by nc", "cc-by-nc", "cc_by_nc" all match
    for (char& c : s)
        if (c == '_' || c == ' ') c = '-';

    using detail::contains_any;
    if (contains_any(s, {"creativecommons.org/publicdomain", "cc0", "cc-zero",
                         "public-domain-dedication"}))
        return LicenseClass::cc0;
    if (contains_any(s, {"licenses/by-nc-nd", "cc-by-nc-nd", "by-nc-nd",
                         "attribution-noncommercial-noderiv"}))
        return LicenseClass::cc_by_nc_nd;
    if (contains_any(s, {"licenses/by-nc-sa", "cc-by-nc-sa", "by-nc-sa",
                         "attribution-noncommercial-sharealike"}))
        return LicenseClass::cc_by_nc_sa;
    if (contains_any(s, {"licenses/by-nc", "cc-by-nc", "by-nc",
                         "attribution-noncommercial"}))
        return LicenseClass::cc_by_nc;
    if (contains_any(s, {"licenses/by-nd", "cc-by-nd", "by-nd",
                         "attribution-noderiv"}))
        return LicenseClass::cc_by_nd;
    if (contains_any(s, {"licenses/by-sa", "cc-by-sa", "by-sa",
                         "attribution-sharealike"}))
        return LicenseClass::cc_by_sa;
    if (contains_any(s, {"licenses/by", "cc-by", "creative-commons-attribution"}))
        return LicenseClass::cc_by;
    if (contains_any(s, {"creative-commons"}))  // CC prose without a variant
        return LicenseClass::other_open;
    if (contains_any(s, {"open-access", "openaccess", "open-government", "mit-license",
                         "apache"}))
        return LicenseClass::other_open;
    return LicenseClass::publisher_specific;
}

inline bool license_redistributable(LicenseClass c, const RedistributionPolicy& policy = {}) {
    return policy.allows(c);
}

}  // namespace scicorpus
