#pragma once

#include <set>
#include <string>

#include "diagbench/error.hpp"

namespace diagbench {

// The three normalized text sets used by the content and readability metrics:
// P from task metadata, G from the document, R from the readability checker.
struct ContentSets {
    std::set<std::string> required;  // P
    std::set<std::string> generated; // G
    std::set<std::string> readable;  // R, intersected with G before scoring
};

inline std::size_t intersection_size(const std::set<std::string>& a,
                                     const std::set<std::string>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    std::size_t n = 0;
    for (const auto& s : small) n += large.count(s);
    return n;
}

// |P ∩ G| / |G|. Empty G scores 0 against a non-empty requirement and 1
// against an empty one: empty output is penalized, empty demands are not.
inline double precision(const ContentSets& sets) {
    if (sets.generated.empty()) return sets.required.empty() ? 1.0 : 0.0;
    return static_cast<double>(intersection_size(sets.required, sets.generated)) /
           static_cast<double>(sets.generated.size());
}

// |P ∩ G| / |P|; an empty requirement is vacuously satisfied.
inline double recall(const ContentSets& sets) {
    if (sets.required.empty()) return 1.0;
    return static_cast<double>(intersection_size(sets.required, sets.generated)) /
           static_cast<double>(sets.required.size());
}

} // namespace diagbench
