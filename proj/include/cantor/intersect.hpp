#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cantor/automorphism.hpp"
#include "cantor/trie.hpp"

namespace cantor {

struct IntersectCover {
    std::uint64_t count = 0;
    std::optional<std::vector<Word>> leaves;  // image-side words, when requested
};

// |U_k(E) ∩ sigma(U_k(F))|. This bounds |U_k(E ∩ sigma F)| from above.
IntersectCover intersect_cover(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a, int k,
                               bool want_leaves = false);

template <class Source>
std::uint64_t intersect_count(const CylinderTrie& e, const CylinderTrie& f, const Source& src, int k);

// Counts for every level 0..max_level from a single walk.
std::vector<std::uint64_t> intersect_counts(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a,
                                            int max_level);

// True iff no level-`depth` cylinder is jointly alive.
bool empty_intersection_trial(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a, int depth);

}  // namespace cantor

#include "cantor/traversal.hpp"

namespace cantor {

template <class Source>
std::uint64_t intersect_count(const CylinderTrie& e, const CylinderTrie& f, const Source& src, int k) {
    std::uint64_t count = 0;
    joint_walk(e, f, src, Word{}, k, [&](int level, std::uint32_t, std::uint32_t) {
        if (level == k) ++count;
        return Walk::kContinue;
    });
    return count;
}

}  // namespace cantor
