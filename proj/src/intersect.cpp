#include "cantor/intersect.hpp"

#include <algorithm>

#include "cantor/traversal.hpp"

namespace cantor {

IntersectCover intersect_cover(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a, int k,
                               bool want_leaves) {
    IntersectCover out;
    if (!want_leaves) {
        out.count = a.visit([&](const auto& src) { return intersect_count(e, f, src, k); });
        return out;
    }
    auto& leaves = out.leaves.emplace();
    a.visit([&](const auto& src) {
        joint_walk(e, f, src, Word{}, k,
                   [&](int level, std::uint32_t, std::uint32_t, std::span<const std::uint8_t> path) {
                       if (level == k) leaves.emplace_back(std::vector<std::uint8_t>(path.begin(), path.end()));
                       return Walk::kContinue;
                   });
    });
    std::sort(leaves.begin(), leaves.end());
    out.count = leaves.size();
    return out;
}

std::vector<std::uint64_t> intersect_counts(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a,
                                            int max_level) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_level) + 1, 0);
    a.visit([&](const auto& src) {
        joint_walk(e, f, src, Word{}, max_level, [&](int level, std::uint32_t, std::uint32_t) {
            ++counts[static_cast<std::size_t>(level)];
            return Walk::kContinue;
        });
    });
    return counts;
}

bool empty_intersection_trial(const CylinderTrie& e, const CylinderTrie& f, const Automorphism& a, int depth) {
    return a.visit([&](const auto& src) {
        return joint_walk(e, f, src, Word{}, depth, [&](int level, std::uint32_t, std::uint32_t) {
            return level == depth ? Walk::kStop : Walk::kContinue;
        });
    });
}

}  // namespace cantor
