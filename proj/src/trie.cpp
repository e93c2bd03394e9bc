#include "cantor/trie.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cantor {

namespace {

void check_shape(int m, int depth) {
    if (m < 2 || m > kMaxArity) throw std::invalid_argument("trie arity out of range");
    if (depth < 0 || depth > kMaxDepth) {
        throw std::invalid_argument("trie depth must be in 0.." + std::to_string(kMaxDepth));
    }
}

bool add_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
    return __builtin_add_overflow(a, b, &out);
}

}  // namespace

CylinderTrie::CylinderTrie(int m, int depth) : m_(m), depth_(depth) {
    check_shape(m, depth);
    levels_.resize(static_cast<std::size_t>(depth) + 1);
    multiplicity_.resize(levels_.size());
}

CylinderTrie CylinderTrie::full(int m, int depth) {
    TrieBuilder b(m, depth);
    std::uint32_t node = b.add_root();
    for (int k = 0; k < depth; ++k) {
        const std::uint32_t next = b.add_child(k, node, 0);
        for (int d = 1; d < m; ++d) b.link(k, node, static_cast<std::uint8_t>(d), next);
        node = next;
    }
    return std::move(b).finish().trie;
}

CylinderTrie CylinderTrie::from_leaves(int m, int depth, std::span<const Word> leaves) {
    std::vector<Word> sorted(leaves.begin(), leaves.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    TrieBuilder b(m, depth);
    if (sorted.empty()) return std::move(b).finish().trie;
    const std::uint32_t root = b.add_root();
    // Path of node indices for the previous leaf; shared prefixes reuse it.
    std::vector<std::uint32_t> path{root};
    const Word* prev = nullptr;
    for (const Word& w : sorted) {
        if (static_cast<int>(w.size()) != depth) {
            throw std::invalid_argument("leaf '" + w.to_string() + "' does not have length " +
                                        std::to_string(depth));
        }
        for (auto d : w.digits()) {
            if (d >= m) throw std::invalid_argument("leaf digit out of range");
        }
        std::size_t shared = 0;
        if (prev) {
            while (shared < w.size() && (*prev)[shared] == w[shared]) ++shared;
        }
        path.resize(shared + 1);
        for (std::size_t k = shared; k < w.size(); ++k) {
            path.push_back(b.add_child(static_cast<int>(k), path[k], w[k]));
        }
        prev = &w;
    }
    return std::move(b).finish().trie;
}

void CylinderTrie::compute_multiplicity() {
    multiplicity_.assign(levels_.size(), {});
    overflow_level_ = kMaxDepth + 1;
    for (std::size_t k = 0; k < levels_.size(); ++k) multiplicity_[k].assign(levels_[k].size(), 0);
    if (empty()) return;
    multiplicity_[0][0] = 1;
    for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
        for (std::size_t i = 0; i < levels_[k].size(); ++i) {
            const auto& n = levels_[k][i];
            for (int d = 0; d < m_; ++d) {
                if (n.child[d] == kNoNode) continue;
                auto& slot = multiplicity_[k + 1][n.child[d]];
                if (add_overflows(slot, multiplicity_[k][i], slot)) {
                    slot = std::numeric_limits<std::uint64_t>::max();
                    overflow_level_ = std::min(overflow_level_, static_cast<int>(k) + 1);
                }
            }
        }
    }
}

std::uint64_t CylinderTrie::cover_count(int k) const {
    if (k < 0 || k > depth_) {
        throw std::invalid_argument("cover_count: level " + std::to_string(k) + " outside 0.." +
                                    std::to_string(depth_));
    }
    if (k >= overflow_level_) throw std::overflow_error("cover_count exceeds 64 bits");
    std::uint64_t total = 0;
    for (auto c : multiplicity_[static_cast<std::size_t>(k)]) {
        if (add_overflows(total, c, total)) throw std::overflow_error("cover_count exceeds 64 bits");
    }
    return total;
}

std::vector<std::uint64_t> CylinderTrie::cover_counts() const {
    std::vector<std::uint64_t> out;
    out.reserve(levels_.size());
    for (int k = 0; k <= depth_; ++k) out.push_back(cover_count(k));
    return out;
}

std::size_t CylinderTrie::node_count() const {
    std::size_t n = 0;
    for (const auto& lvl : levels_) n += lvl.size();
    return n;
}

std::optional<std::uint32_t> CylinderTrie::find(const Word& w) const {
    if (static_cast<int>(w.size()) > depth_) {
        throw std::invalid_argument("word longer than trie depth");
    }
    if (empty()) return std::nullopt;
    std::uint32_t node = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] >= m_) return std::nullopt;
        node = levels_[k][node].child[w[k]];
        if (node == kNoNode) return std::nullopt;
    }
    return node;
}

std::vector<Word> CylinderTrie::leaves() const {
    std::vector<Word> out;
    if (empty()) return out;
    Word w;
    auto rec = [&](auto&& self, int k, std::uint32_t node) -> void {
        if (k == depth_) {
            out.push_back(w);
            return;
        }
        const auto& n = levels_[static_cast<std::size_t>(k)][node];
        for (int d = 0; d < m_; ++d) {
            if (n.child[d] == kNoNode) continue;
            w.push_back(static_cast<std::uint8_t>(d));
            self(self, k + 1, n.child[d]);
            w.pop_back();
        }
    };
    rec(rec, 0, 0);
    return out;
}

void CylinderTrie::write(std::ostream& out) const {
    out << "m=" << m_ << " depth=" << depth_ << '\n';
    for (const Word& w : leaves()) out << (w.empty() ? "ROOT" : w.to_string()) << '\n';
}

namespace {

// Parses "m=<int> depth=<int>".
std::pair<int, int> parse_header(const std::string& line) {
    std::istringstream hs(line);
    std::string a, b;
    hs >> a >> b;
    if (a.rfind("m=", 0) != 0 || b.rfind("depth=", 0) != 0) {
        throw std::invalid_argument("expected header 'm=<int> depth=<int>', got '" + line + "'");
    }
    return {std::stoi(a.substr(2)), std::stoi(b.substr(6))};
}

}  // namespace

CylinderTrie CylinderTrie::read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trie text: missing header");
    const auto [m, depth] = parse_header(line);
    check_shape(m, depth);
    std::vector<Word> leaves;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue;
        leaves.push_back(Word::parse(token, m));
    }
    return from_leaves(m, depth, leaves);
}

TrieBuilder::TrieBuilder(int m, int depth) : m_(m), depth_(depth) {
    check_shape(m, depth);
    levels_.resize(static_cast<std::size_t>(depth) + 1);
}

std::uint32_t TrieBuilder::add_root() {
    if (!levels_[0].empty()) throw std::logic_error("TrieBuilder: root already added");
    levels_[0].emplace_back();
    return 0;
}

std::uint32_t TrieBuilder::add_child(int level, std::uint32_t parent, std::uint8_t d) {
    if (level < 0 || level >= depth_) throw std::invalid_argument("TrieBuilder: no level below");
    auto& next = levels_[static_cast<std::size_t>(level) + 1];
    const auto index = static_cast<std::uint32_t>(next.size());
    next.emplace_back();
    link(level, parent, d, index);
    return index;
}

void TrieBuilder::link(int level, std::uint32_t parent, std::uint8_t d, std::uint32_t child) {
    if (d >= m_) throw std::invalid_argument("TrieBuilder: digit out of range");
    auto& node = levels_[static_cast<std::size_t>(level)][parent];
    if (node.child[d] != kNoNode) throw std::logic_error("TrieBuilder: child slot already used");
    node.child[d] = child;
    ++node.child_count;
}

TrieBuilder::Result TrieBuilder::finish(Sharing sharing) && {
    const auto levels = static_cast<std::size_t>(depth_) + 1;

    // Bottom-up liveness: a node is kept iff it reaches the bottom level.
    std::vector<std::vector<char>> alive(levels);
    alive[levels - 1].assign(levels_[levels - 1].size(), 1);
    for (std::size_t k = levels - 1; k-- > 0;) {
        alive[k].assign(levels_[k].size(), 0);
        for (std::size_t i = 0; i < levels_[k].size(); ++i) {
            for (int d = 0; d < m_; ++d) {
                const auto c = levels_[k][i].child[d];
                if (c != kNoNode && alive[k + 1][c]) {
                    alive[k][i] = 1;
                    break;
                }
            }
        }
    }
    const bool nonempty = !levels_[0].empty() && alive[0][0];

    std::vector<std::vector<std::uint32_t>> remap(levels);
    CylinderTrie trie(m_, depth_);
    if (!nonempty) {
        for (std::size_t k = 0; k < levels; ++k) remap[k].assign(levels_[k].size(), kNoNode);
        trie.compute_multiplicity();
        return {std::move(trie), std::move(remap)};
    }

    // Reachability from the root through live links.
    std::vector<std::vector<char>> reach(levels);
    for (std::size_t k = 0; k < levels; ++k) reach[k].assign(levels_[k].size(), 0);
    reach[0][0] = 1;
    for (std::size_t k = 0; k + 1 < levels; ++k) {
        for (std::size_t i = 0; i < levels_[k].size(); ++i) {
            if (!reach[k][i]) continue;
            for (int d = 0; d < m_; ++d) {
                const auto c = levels_[k][i].child[d];
                if (c != kNoNode && alive[k + 1][c]) reach[k + 1][c] = 1;
            }
        }
    }

    // Bottom-up renumbering; merged nodes are keyed by their child slots.
    for (std::size_t k = levels; k-- > 0;) {
        remap[k].assign(levels_[k].size(), kNoNode);
        std::map<std::array<std::uint32_t, kMaxArity>, std::uint32_t> seen;
        auto& out = trie.levels_[k];
        for (std::size_t i = 0; i < levels_[k].size(); ++i) {
            if (!reach[k][i]) continue;
            TrieNode node;
            if (k + 1 < levels) {
                for (int d = 0; d < m_; ++d) {
                    const auto c = levels_[k][i].child[d];
                    if (c == kNoNode || !reach[k + 1][c]) continue;
                    node.child[d] = remap[k + 1][c];
                    ++node.child_count;
                }
            }
            if (sharing == Sharing::kMerge) {
                auto [it, inserted] = seen.emplace(node.child, static_cast<std::uint32_t>(out.size()));
                if (inserted) out.push_back(node);
                remap[k][i] = it->second;
            } else {
                remap[k][i] = static_cast<std::uint32_t>(out.size());
                out.push_back(node);
            }
        }
    }
    trie.compute_multiplicity();
    return {std::move(trie), std::move(remap)};
}

}  // namespace cantor
