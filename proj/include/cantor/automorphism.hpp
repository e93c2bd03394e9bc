#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cantor/philox.hpp"
#include "cantor/space.hpp"
#include "cantor/trie.hpp"

namespace cantor {

// Permutation of the child digits 0..m-1: perm[d] is the image of digit d.
using Perm = std::array<std::uint8_t, kMaxArity>;

Perm identity_perm(int m);
Perm invert(const Perm& perm, int m);
bool is_bijection(const Perm& perm, int m);
// All m! permutations in lexicographic order.
std::vector<Perm> all_perms(int m);

// A tree automorphism is a permutation attached to every node of the m-ary
// tree. It maps the child of node v at digit d to the child of sigma(v) at
// digit perm_v[d]; the permutation is keyed by the source node.
//
// The three sources below share a cursor protocol used by the traversals:
//   Cursor root() const;
//   Cursor child(const Cursor&, std::uint8_t d) const;   // source digit d
//   Perm perm(const Cursor&) const;
// A cursor names a source-side node.

// Seed-deterministic random automorphism. Each node's permutation is a
// uniform Fisher-Yates shuffle drawn from a Philox stream keyed by a 128-bit
// node label; labels are chained root to leaf through the same function, so
// the permutation at a node depends only on (seed, node word).
class LazyAutomorphism {
public:
    struct Cursor {
        Philox4x32::Counter label;
    };

    LazyAutomorphism(int m, std::uint64_t seed);

    int m() const { return m_; }
    std::uint64_t seed() const { return seed_; }
    int depth_bound() const { return kMaxDepth; }

    Cursor root() const;
    Cursor child(const Cursor& c, std::uint8_t d) const;
    Perm perm(const Cursor& c) const;

private:
    int m_;
    std::uint64_t seed_;
    Philox4x32::Key key_;
};

// Tabulated permutations for every node of level < depth (identity unless
// set). Words longer than `depth` cannot be mapped.
class ExplicitAutomorphism {
public:
    struct Cursor {
        int level;
        std::uint64_t index;
    };

    static constexpr int kDefaultDepthLimit = 16;
    static constexpr std::size_t kMaxNodes = std::size_t{1} << 22;

    ExplicitAutomorphism(int m, int depth);

    int m() const { return m_; }
    int depth_bound() const { return depth_; }

    Cursor root() const { return {0, 0}; }
    Cursor child(const Cursor& c, std::uint8_t d) const {
        return {c.level + 1, c.index * static_cast<std::uint64_t>(m_) + d};
    }
    const Perm& perm(const Cursor& c) const {
        return table_[static_cast<std::size_t>(c.level)][c.index];
    }

    void set(int level, std::uint64_t index, const Perm& perm);
    void set(const Word& node, const Perm& perm);
    const Perm& get(const Word& node) const;

    // Copies the first `depth` levels of any source.
    template <class Source>
    static ExplicitAutomorphism tabulate(const Source& src, int depth);

    // Lines "node=<word|ROOT> perm=<p1,...,pm>" (1-based) after a
    // "m=<m> depth=<d>" header.
    void write(std::ostream& out) const;
    static ExplicitAutomorphism read(std::istream& in);

private:
    int m_;
    int depth_;
    std::vector<std::vector<Perm>> table_;
};

class IdentityAutomorphism {
public:
    struct Cursor {};

    explicit IdentityAutomorphism(int m) : perm_(identity_perm(m)), m_(m) {}

    int m() const { return m_; }
    int depth_bound() const { return kMaxDepth; }
    Cursor root() const { return {}; }
    Cursor child(const Cursor&, std::uint8_t) const { return {}; }
    const Perm& perm(const Cursor&) const { return perm_; }

private:
    Perm perm_;
    int m_;
};

template <class Source>
Word apply_word(const Source& src, const Word& w) {
    if (static_cast<int>(w.size()) > src.depth_bound()) {
        throw std::invalid_argument("apply: word of length " + std::to_string(w.size()) +
                                    " exceeds automorphism depth " + std::to_string(src.depth_bound()));
    }
    std::vector<std::uint8_t> out;
    out.reserve(w.size());
    auto cursor = src.root();
    for (auto d : w.digits()) {
        if (d >= src.m()) throw std::invalid_argument("apply: digit out of range");
        out.push_back(src.perm(cursor)[d]);
        cursor = src.child(cursor, d);
    }
    return Word(std::move(out));
}

template <class Source>
Word apply_inverse_word(const Source& src, const Word& w) {
    if (static_cast<int>(w.size()) > src.depth_bound()) {
        throw std::invalid_argument("apply_inverse: word of length " + std::to_string(w.size()) +
                                    " exceeds automorphism depth " + std::to_string(src.depth_bound()));
    }
    std::vector<std::uint8_t> out;
    out.reserve(w.size());
    auto cursor = src.root();
    for (auto e : w.digits()) {
        if (e >= src.m()) throw std::invalid_argument("apply_inverse: digit out of range");
        const auto& p = src.perm(cursor);
        std::uint8_t d = 0;
        while (p[d] != e) ++d;
        out.push_back(d);
        cursor = src.child(cursor, d);
    }
    return Word(std::move(out));
}

template <class Source>
ExplicitAutomorphism ExplicitAutomorphism::tabulate(const Source& src, int depth) {
    ExplicitAutomorphism out(src.m(), depth);
    std::vector<typename Source::Cursor> frontier{src.root()};
    for (int level = 0; level < depth; ++level) {
        std::vector<typename Source::Cursor> next;
        next.reserve(frontier.size() * static_cast<std::size_t>(src.m()));
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            out.set(level, i, src.perm(frontier[i]));
            for (int d = 0; d < src.m(); ++d) next.push_back(src.child(frontier[i], static_cast<std::uint8_t>(d)));
        }
        frontier = std::move(next);
    }
    return out;
}

// Value type wrapping one of the sources.
class Automorphism {
public:
    using Source = std::variant<IdentityAutomorphism, LazyAutomorphism, ExplicitAutomorphism>;

    Automorphism(const SpaceParams& p, Source source);

    static Automorphism identity(const SpaceParams& p);

    const SpaceParams& params() const { return params_; }
    const Source& source() const { return source_; }
    int depth_bound() const;

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), source_);
    }

    Word apply(const Word& w) const;
    Word apply_inverse(const Word& w) const;

private:
    SpaceParams params_;
    Source source_;
};

Automorphism sample_automorphism(const SpaceParams& p, std::uint64_t seed);

class EnumerationCapExceeded : public std::runtime_error {
public:
    EnumerationCapExceeded(std::string required, std::uint64_t cap);
    const std::string& required() const { return required_; }

private:
    std::string required_;
};

// Walks every assignment of permutations to a set of node slots, in
// odometer order, exposing the current assignment as an explicit
// automorphism. Nodes outside the slot set keep the base automorphism's
// permutations.
class TruncatedGroupEnumerator {
public:
    static constexpr std::uint64_t kDefaultCap = 10'000'000;

    // All nodes of level < depth: the full group acting on U_depth.
    TruncatedGroupEnumerator(const SpaceParams& p, int depth, std::uint64_t cap = kDefaultCap);

    // Only the nodes of `level` whose word extends `within`; everything else
    // is taken from `base`. Enumerating these conditions on the action on
    // U_level.
    TruncatedGroupEnumerator(ExplicitAutomorphism base, int level, const Word& within,
                             std::uint64_t cap = kDefaultCap);

    std::uint64_t count() const { return count_; }
    const ExplicitAutomorphism& current() const { return current_; }

    // Advances to the next assignment; false once every assignment has been
    // produced (the state then wraps to the first).
    bool next();

private:
    struct Slot {
        int level;
        std::uint64_t index;
    };

    void init_count(std::uint64_t cap);

    int m_;
    ExplicitAutomorphism current_;
    std::vector<Perm> perms_;
    std::vector<Slot> slots_;
    std::vector<std::uint32_t> odometer_;
    std::uint64_t count_ = 1;
};

// (m!)^((m^k - 1)/(m - 1)) in decimal.
std::string truncated_group_order(int m, int depth);

}  // namespace cantor
