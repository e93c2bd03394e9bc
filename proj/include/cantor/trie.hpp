#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cantor/space.hpp"

namespace cantor {

inline constexpr std::uint32_t kNoNode = std::numeric_limits<std::uint32_t>::max();
inline constexpr int kMaxDepth = 64;

struct TrieNode {
    std::array<std::uint32_t, kMaxArity> child;
    std::uint8_t child_count = 0;

    TrieNode() { child.fill(kNoNode); }
    bool has(std::uint8_t d) const { return child[d] != kNoNode; }
};

// Finite-depth set representation: a cylinder (word of length <= depth) is
// alive iff following its digits from the root never hits a missing child.
//
// Storage is a leveled DAG. Node `i` of level `k` has child slots pointing
// into level k+1, and identical subtrees may be shared, so one node can stand
// for many cylinders. Cover counts are path counts. Every alive node below
// the bottom level has at least one alive child.
class CylinderTrie {
public:
    // The empty set at the given depth.
    CylinderTrie(int m, int depth);

    static CylinderTrie full(int m, int depth);
    // Leaves must all have length `depth`; duplicates are ignored.
    static CylinderTrie from_leaves(int m, int depth, std::span<const Word> leaves);

    int m() const { return m_; }
    int depth() const { return depth_; }
    bool empty() const { return levels_[0].empty(); }

    // |U_k(A)|.
    std::uint64_t cover_count(int k) const;
    std::vector<std::uint64_t> cover_counts() const;

    std::span<const TrieNode> level(int k) const { return levels_[static_cast<std::size_t>(k)]; }
    const TrieNode& node(int k, std::uint32_t index) const {
        return levels_[static_cast<std::size_t>(k)][index];
    }
    // Number of root paths reaching each node of level k.
    std::span<const std::uint64_t> multiplicity(int k) const {
        return multiplicity_[static_cast<std::size_t>(k)];
    }
    std::size_t node_count() const;

    // Node index of the cylinder at level |w|, if alive.
    std::optional<std::uint32_t> find(const Word& w) const;
    bool contains(const Word& w) const { return find(w).has_value(); }

    // Alive leaves in lexicographic order; expands shared subtrees.
    std::vector<Word> leaves() const;

    // Text format: header "m=<m> depth=<L>", then one 1-based leaf word per
    // line ("ROOT" for the depth-0 leaf).
    void write(std::ostream& out) const;
    static CylinderTrie read(std::istream& in);

private:
    friend class TrieBuilder;
    CylinderTrie() = default;
    void compute_multiplicity();

    int m_ = 2;
    int depth_ = 0;
    std::vector<std::vector<TrieNode>> levels_;
    std::vector<std::vector<std::uint64_t>> multiplicity_;
    // A level whose path count overflowed 64 bits.
    int overflow_level_ = kMaxDepth + 1;
};

// Top-down construction. Nodes are added level by level; finish() prunes
// branches that never reach the bottom level and optionally merges identical
// subtrees.
class TrieBuilder {
public:
    TrieBuilder(int m, int depth);

    std::uint32_t add_root();
    // New node at level+1 attached under `parent` at digit `d`.
    std::uint32_t add_child(int level, std::uint32_t parent, std::uint8_t d);
    // Attach an existing level+1 node (sharing).
    void link(int level, std::uint32_t parent, std::uint8_t d, std::uint32_t child);
    std::size_t level_size(int level) const { return levels_[static_cast<std::size_t>(level)].size(); }

    enum class Sharing { kMerge, kKeep };

    // remap[k][old] is the node index in the finished trie, or kNoNode when
    // the node was pruned.
    struct Result {
        CylinderTrie trie;
        std::vector<std::vector<std::uint32_t>> remap;
    };
    Result finish(Sharing sharing = Sharing::kMerge) &&;

private:
    int m_;
    int depth_;
    std::vector<std::vector<TrieNode>> levels_;
};

}  // namespace cantor
