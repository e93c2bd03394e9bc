#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cantor/space.hpp"
#include "cantor/trie.hpp"

namespace cantor {

struct FullSet {};

// Words using only the allowed digits (0-based).
struct DigitRestriction {
    std::vector<std::uint8_t> digits;
};

// Cantor-type set whose level counts track round(r^{-kt}).
struct MoranSet {
    double t = 0.0;
    // Lowest digits first; extra children go to the heaviest parents under
    // equal splitting, ties to the first. A seed shuffles digits and ties.
    std::optional<std::uint64_t> placement_seed;
};

// Union of components E_i (i0 <= i <= imax), E_i a Moran set of dimension
// alpha - 1/i inside the cylinder 1^{i-1}2, with |U_k(E_i)| <= r^{-k alpha}
// for k >= i.
struct UnionExample {
    double alpha = 0.0;
    int imax = 0;
};

struct ExplicitSet {
    std::shared_ptr<const CylinderTrie> trie;
    std::string origin;
};

using SetSpec = std::variant<FullSet, DigitRestriction, MoranSet, UnionExample, ExplicitSet>;

// Mini-language: "full", "digits:1,2", "moran:t=0.4[,seed=7]",
// "union:alpha=0.5,imax=8", "file:<path>".
SetSpec parse_set_spec(std::string_view text);
std::string to_string(const SetSpec& spec);

CylinderTrie build_set(const SetSpec& spec, const SpaceParams& p, int depth);

// Dimension the construction is designed to have; for explicit sets, the
// box-dimension estimate of the trie over the default window.
double nominal_dimension(const SetSpec& spec, const SpaceParams& p);

// Level counts of MoranSet{t} for levels 0..depth.
std::vector<std::uint64_t> moran_counts(double t, const SpaceParams& p, int depth);

// Smallest component index: the least integer strictly above 1/alpha.
int union_first_index(double alpha);

struct UnionComponent {
    int index = 0;        // i
    Word cylinder;        // I_i = 1^{i-1}2
    double dimension = 0.0;  // alpha - 1/i
    CylinderTrie trie;    // E_i alone, at the requested depth
};

std::vector<UnionComponent> build_union_components(const UnionExample& spec, const SpaceParams& p, int depth);

// Each depth-`depth` leaf kept independently with probability `density`,
// drawn from a Philox stream keyed by `seed`.
CylinderTrie random_trie(int m, int depth, std::uint64_t seed, double density = 0.5);

// The first `depth` levels of a deeper trie.
CylinderTrie truncate(const CylinderTrie& t, int depth);

}  // namespace cantor
