#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cantor/box_dim.hpp"
#include "cantor/measures.hpp"
#include "cantor/space.hpp"
#include "cantor/trie.hpp"

namespace cantor {

struct PremeasureResult {
    double s = 0.0;
    int j = 0;
    double delta = 0.0;  // r^j
    double value = 0.0;
    std::optional<std::vector<Word>> cover;
};

// Smallest sum of d(I)^s over covers of the alive leaves by cylinders of
// level >= j, by cost(I) = min(r^{|I|s}, sum of child costs) bottom-up.
PremeasureResult premeasure(const CylinderTrie& t, const SpaceParams& p, double s, int j, bool want_cover = false);

// Same program with the per-level factor q = r^s supplied directly, for
// exact arithmetic.
template <class T>
T premeasure_value(const CylinderTrie& t, const T& q, int j);

struct EnergyResult {
    double s = 0.0;
    int depth = 0;
    double value = 0.0;     // sum of terms
    double diagonal = 0.0;  // r^{-sL} sum over leaves of mass^2, not in value
    std::vector<double> terms;  // terms[k] = r^{-sk} sum over I in U_k of sum_{i != j} tau(J_i) tau(J_j)
};

// Energy of a measure on a trie via the common-ancestor decomposition:
// d(x, y) = r^k exactly when x and y first differ at position k + 1.
EnergyResult energy(const MassTrie<double>& tau, const SpaceParams& p, double s);

struct GrowthProbe {
    double s = 0.0;
    int l_max = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> mean_terms;    // per level k < l_max
    std::vector<double> mean_partial;  // cumulative sums of mean_terms
    KRange fit_range;
    double fitted_rate = 0.0;     // exp of the log-linear slope of mean_terms over fit_range
    double predicted_rate = 0.0;  // r^{gamma - s}
};

// Mean energy terms of the depth-l_max tau surrogate over random
// automorphisms. Refuses s >= gamma = alpha + beta + log m / log r.
GrowthProbe energy_growth_probe(const MassTrie<double>& mu, const MassTrie<double>& nu, const SpaceParams& p,
                                double s, int l_max, std::uint64_t trials, std::uint64_t seed, int threads = 1,
                                std::optional<KRange> fit_range = {});

// ---------------------------------------------------------------------------

template <class T>
T premeasure_value(const CylinderTrie& t, const T& q, int j) {
    if (j < 0 || j > t.depth()) throw std::invalid_argument("premeasure: j outside 0..depth");
    if (q < T(0)) throw std::invalid_argument("premeasure: negative scale");
    if (t.empty()) return T(0);
    const int depth = t.depth();
    std::vector<T> qpow(static_cast<std::size_t>(depth) + 1, T(1));
    for (int k = 1; k <= depth; ++k) qpow[static_cast<std::size_t>(k)] = qpow[static_cast<std::size_t>(k) - 1] * q;
    std::vector<T> below(t.level(depth).size(), qpow.back());
    for (int k = depth - 1; k >= j; --k) {
        const auto lvl = t.level(k);
        std::vector<T> cost(lvl.size());
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            T sum(0);
            for (int d = 0; d < t.m(); ++d) {
                if (lvl[i].child[d] != kNoNode) sum += below[lvl[i].child[d]];
            }
            const T& self = qpow[static_cast<std::size_t>(k)];
            cost[i] = self <= sum ? self : sum;
        }
        below = std::move(cost);
    }
    T value(0);
    const auto mult = t.multiplicity(j);
    for (std::size_t i = 0; i < below.size(); ++i) value += from_count<T>(mult[i]) * below[i];
    return value;
}

}  // namespace cantor
