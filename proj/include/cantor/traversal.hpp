#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "cantor/automorphism.hpp"
#include "cantor/trie.hpp"

namespace cantor {

enum class Walk { kContinue, kPrune, kStop };

// Synchronized root-to-leaf walk over the cylinders I with I alive in
// `image` and sigma^{-1}(I) alive in `pre`. The preimage node is carried
// alongside the image node, so only jointly alive pairs and their children
// are ever touched.
//
// visit(level, image_node, pre_node) is called for each jointly alive pair
// below `start` (inclusive) down to `max_level`. A visitor taking a fourth
// std::span<const std::uint8_t> argument also receives the image word.
// Returns false if stopped.
template <class Source, class Visit>
bool joint_walk(const CylinderTrie& image, const CylinderTrie& pre, const Source& src, const Word& start,
                int max_level, Visit&& visit) {
    if (image.m() != pre.m() || image.m() != src.m()) throw std::invalid_argument("joint_walk: arity mismatch");
    if (max_level > image.depth() || max_level > pre.depth()) {
        throw std::invalid_argument("joint_walk: level exceeds trie depth");
    }
    if (max_level > src.depth_bound()) throw std::invalid_argument("joint_walk: level exceeds automorphism depth");
    if (static_cast<int>(start.size()) > max_level) throw std::invalid_argument("joint_walk: start below max level");
    if (image.empty() || pre.empty()) return true;

    const int m = image.m();
    std::uint32_t e = 0;
    std::uint32_t f = 0;
    auto cursor = src.root();
    for (std::size_t k = 0; k < start.size(); ++k) {
        const auto digit = start[k];
        const Perm& p = src.perm(cursor);
        std::uint8_t d = 0;
        while (p[d] != digit) ++d;
        e = image.node(static_cast<int>(k), e).child[digit];
        f = pre.node(static_cast<int>(k), f).child[d];
        if (e == kNoNode || f == kNoNode) return true;
        cursor = src.child(cursor, d);
    }

    constexpr bool kWantsPath =
        std::is_invocable_v<Visit, int, std::uint32_t, std::uint32_t, std::span<const std::uint8_t>>;
    std::vector<std::uint8_t> path(start.digits());

    bool stopped = false;
    auto rec = [&](auto&& self, int level, std::uint32_t en, std::uint32_t fn, const auto& cur) -> void {
        Walk action;
        if constexpr (kWantsPath) {
            action = visit(level, en, fn, std::span<const std::uint8_t>(path));
        } else {
            action = visit(level, en, fn);
        }
        if (action == Walk::kStop) {
            stopped = true;
            return;
        }
        if (action == Walk::kPrune || level == max_level) return;
        const TrieNode& enode = image.node(level, en);
        const TrieNode& fnode = pre.node(level, fn);
        const Perm& p = src.perm(cur);
        for (int d = 0; d < m && !stopped; ++d) {
            const auto fc = fnode.child[d];
            if (fc == kNoNode) continue;
            const auto ec = enode.child[p[d]];
            if (ec == kNoNode) continue;
            if constexpr (kWantsPath) path.push_back(p[d]);
            self(self, level + 1, ec, fc, src.child(cur, static_cast<std::uint8_t>(d)));
            if constexpr (kWantsPath) path.pop_back();
        }
    };
    rec(rec, static_cast<int>(start.size()), e, f, cursor);
    return !stopped;
}

}  // namespace cantor
