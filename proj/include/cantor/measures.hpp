#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "cantor/automorphism.hpp"
#include "cantor/kernels.hpp"
#include "cantor/rational.hpp"
#include "cantor/space.hpp"
#include "cantor/traversal.hpp"
#include "cantor/trie.hpp"

namespace cantor {

// A mass trie that breaks additivity, or data that contradicts its trie.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation refused because a hypothesis of the underlying estimate
// fails, e.g. a nonpositive exponent sum.
class HypothesisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// mass(I) <= constant * r^(k * exponent) for every level-k cylinder I.
struct Frostman {
    double exponent = 0.0;
    double constant = 1.0;
};

template <class T>
double to_double(const T& x) {
    if constexpr (std::is_same_v<T, Rational>) {
        return x.get_d();
    } else {
        return static_cast<double>(x);
    }
}

template <class T>
T from_count(std::uint64_t n) {
    if constexpr (std::is_same_v<T, Rational>) {
        mpz_class z;
        mpz_import(z.get_mpz_t(), 1, -1, sizeof(n), 0, 0, &n);
        return Rational(z);
    } else {
        return static_cast<T>(n);
    }
}

// A measure on the cylinders of a trie: one mass per node. Nodes may be
// shared, so the mass of a node must not depend on the path reaching it.
template <class T>
class MassTrie {
public:
    MassTrie(CylinderTrie trie, std::vector<std::vector<T>> mass) : trie_(std::move(trie)), mass_(std::move(mass)) {
        if (mass_.size() != static_cast<std::size_t>(trie_.depth()) + 1) {
            throw IntegrityError("mass trie: level count does not match trie depth");
        }
        for (int k = 0; k <= trie_.depth(); ++k) {
            const auto& lvl = mass_[static_cast<std::size_t>(k)];
            if (lvl.size() != trie_.level(k).size()) throw IntegrityError("mass trie: node count mismatch");
            for (const T& x : lvl) {
                if (x < T(0)) throw IntegrityError("mass trie: negative mass");
            }
        }
    }

    // Explicit tree over the given depth-`depth` leaves. Duplicate leaves are
    // rejected.
    static MassTrie from_leaf_masses(int m, int depth, std::span<const std::pair<Word, T>> leaves);

    const CylinderTrie& trie() const { return trie_; }
    int m() const { return trie_.m(); }
    int depth() const { return trie_.depth(); }
    bool empty() const { return trie_.empty(); }

    std::span<const T> level_mass(int k) const { return mass_[static_cast<std::size_t>(k)]; }
    const T& mass(int k, std::uint32_t node) const { return mass_[static_cast<std::size_t>(k)][node]; }
    T total() const { return empty() ? T(0) : mass_[0][0]; }

    // Mass of the cylinder w; zero when w is not alive.
    T mass_of(const Word& w) const {
        const auto node = trie_.find(w);
        return node ? mass(static_cast<int>(w.size()), *node) : T(0);
    }

    // Parent mass equals the sum of its children, exactly for exact types and
    // to relative tolerance `tol` for floating point.
    bool is_additive(double tol = 1e-12) const;
    void check_additive(double tol = 1e-12) const {
        if (!is_additive(tol)) throw IntegrityError("mass trie is not additive");
    }

    const std::optional<Frostman>& frostman() const { return frostman_; }
    void set_frostman(Frostman f) { frostman_ = f; }

    MassTrie<double> to_double() const;

    // Trie text format with " mass=<value>" appended to each leaf line.
    void write(std::ostream& out) const;

private:
    CylinderTrie trie_;
    std::vector<std::vector<T>> mass_;
    std::optional<Frostman> frostman_;
};

// Frostman data measured from the masses. Without a given exponent the
// largest one that works with constant 1 is used,
// min_k log(max_I mass(I)) / (k log r); the constant is then
// max_k max_I mass(I) / r^(k * exponent).
template <class T>
Frostman measure_frostman(const MassTrie<T>& mu, const SpaceParams& p, std::optional<double> exponent = {});

// Unit mass split equally among the alive children of each node, with
// Frostman data attached.
template <class T>
MassTrie<T> natural_measure(const CylinderTrie& t, const SpaceParams& p, std::optional<double> exponent = {});

// tau_l(A) = m^l * sum over level-l cylinders I inside A of mu(I) nu(sigma^{-1} I).
template <class T, class Source>
T tau(const MassTrie<T>& mu, const MassTrie<T>& nu, const Source& src, const Word& a, int l);

double tau(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma, const Word& a, int l);

// tau_k(A), ..., tau_{l_max}(A) with k = |A|, from a single walk.
std::vector<double> martingale_trajectory(const MassTrie<double>& mu, const MassTrie<double>& nu,
                                          const Automorphism& sigma, const Word& a, int l_max);

// The depth-L surrogate of the limit measure: leaf masses tau_L on the
// jointly alive level-L cylinders, summed upward. Image-side words.
MassTrie<double> tau_measure(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma,
                             int depth);

// Every leaf with positive tau mass is alive in E and has its preimage alive
// in F.
bool support_check(const MassTrie<double>& tau_surrogate, const CylinderTrie& e, const CylinderTrie& f,
                   const Automorphism& sigma);
bool support_check(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma, int depth);

// c_0 mu(A) r^(k gamma) with gamma = alpha + beta + log m / log r,
// c_1 = c_E c_F sum_{i>=1} r^(i gamma), c_0 = c_E c_F + c_1.
struct SecondMomentBound {
    double gamma = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
    double value = 0.0;
};
SecondMomentBound second_moment_bound(const MassTrie<double>& mu, const MassTrie<double>& nu, const SpaceParams& p,
                                      const Word& a);

struct SecondMomentRow {
    int l = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double bound_ratio = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double mean_stderr = 0.0;
};

// Monte Carlo over trials lazy automorphisms seeded derive_seed(seed, t),
// one row per l in [l_first, l_last].
std::vector<SecondMomentRow> second_moment_stats(const MassTrie<double>& mu, const MassTrie<double>& nu,
                                                 const SpaceParams& p, const Word& a, int l_first, int l_last,
                                                 std::uint64_t trials, std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------------------

template <class T>
MassTrie<T> MassTrie<T>::from_leaf_masses(int m, int depth, std::span<const std::pair<Word, T>> leaves) {
    TrieBuilder b(m, depth);
    std::vector<std::vector<TrieNode>> shadow(static_cast<std::size_t>(depth) + 1);
    std::vector<T> leaf_mass;
    if (!leaves.empty()) {
        b.add_root();
        shadow[0].emplace_back();
    }
    for (const auto& [w, x] : leaves) {
        if (static_cast<int>(w.size()) != depth) throw std::invalid_argument("leaf mass: word length != depth");
        if (x < T(0)) throw std::invalid_argument("leaf mass: negative mass");
        std::uint32_t node = 0;
        bool fresh = false;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const auto d = w[k];
            if (d >= m) throw std::invalid_argument("leaf mass: digit out of range");
            auto& slot = shadow[k][node].child[d];
            if (slot == kNoNode) {
                slot = b.add_child(static_cast<int>(k), node, d);
                shadow[k + 1].emplace_back();
                fresh = k + 1 == w.size();
            }
            node = slot;
        }
        if (depth > 0 && !fresh) throw std::invalid_argument("leaf mass: duplicate leaf " + w.to_string());
        if (depth == 0 && !leaf_mass.empty()) throw std::invalid_argument("leaf mass: duplicate root leaf");
        if (leaf_mass.size() <= node) leaf_mass.resize(node + 1, T(0));
        leaf_mass[node] = x;
    }
    auto result = std::move(b).finish(TrieBuilder::Sharing::kKeep);
    const CylinderTrie& t = result.trie;
    std::vector<std::vector<T>> mass(static_cast<std::size_t>(depth) + 1);
    for (int k = 0; k <= depth; ++k) mass[static_cast<std::size_t>(k)].assign(t.level(k).size(), T(0));
    const auto& bottom = result.remap[static_cast<std::size_t>(depth)];
    for (std::size_t i = 0; i < bottom.size(); ++i) {
        if (bottom[i] != kNoNode) mass[static_cast<std::size_t>(depth)][bottom[i]] = leaf_mass[i];
    }
    for (int k = depth - 1; k >= 0; --k) {
        const auto lvl = t.level(k);
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            T sum(0);
            for (int d = 0; d < m; ++d) {
                const auto c = lvl[i].child[d];
                if (c != kNoNode) sum += mass[static_cast<std::size_t>(k) + 1][c];
            }
            mass[static_cast<std::size_t>(k)][i] = sum;
        }
    }
    return MassTrie(std::move(result.trie), std::move(mass));
}

template <class T>
bool MassTrie<T>::is_additive(double tol) const {
    for (int k = 0; k < depth(); ++k) {
        const auto lvl = trie_.level(k);
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            T sum(0);
            for (int d = 0; d < m(); ++d) {
                const auto c = lvl[i].child[d];
                if (c != kNoNode) sum += mass(k + 1, c);
            }
            const T& parent = mass(k, static_cast<std::uint32_t>(i));
            if constexpr (std::is_floating_point_v<T>) {
                if (std::abs(parent - sum) > tol * std::max(1.0, std::abs(parent))) return false;
            } else {
                if (parent != sum) return false;
            }
        }
    }
    return true;
}

template <class T>
MassTrie<double> MassTrie<T>::to_double() const {
    std::vector<std::vector<double>> mass(mass_.size());
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        mass[k].reserve(mass_[k].size());
        for (const T& x : mass_[k]) mass[k].push_back(cantor::to_double(x));
    }
    MassTrie<double> out(trie_, std::move(mass));
    if (frostman_) out.set_frostman(*frostman_);
    return out;
}

template <class T>
void MassTrie<T>::write(std::ostream& out) const {
    out << "m=" << m() << " depth=" << depth() << '\n';
    if (empty()) return;
    const auto old_precision = out.precision(17);
    Word w;
    auto rec = [&](auto&& self, int k, std::uint32_t node) -> void {
        if (k == depth()) {
            out << (w.empty() ? std::string("ROOT") : w.to_string()) << " mass=";
            if constexpr (std::is_same_v<T, Rational>) {
                out << mass(k, node).get_str();
            } else {
                out << mass(k, node);
            }
            out << '\n';
            return;
        }
        const auto& n = trie_.node(k, node);
        for (int d = 0; d < m(); ++d) {
            if (n.child[d] == kNoNode) continue;
            w.push_back(static_cast<std::uint8_t>(d));
            self(self, k + 1, n.child[d]);
            w.pop_back();
        }
    };
    rec(rec, 0, 0);
    out.precision(old_precision);
}

template <class T>
Frostman measure_frostman(const MassTrie<T>& mu, const SpaceParams& p, std::optional<double> exponent) {
    std::vector<double> max_mass;
    for (int k = 0; k <= mu.depth(); ++k) {
        double mx = 0.0;
        for (const T& x : mu.level_mass(k)) mx = std::max(mx, to_double(x));
        max_mass.push_back(mx);
    }
    Frostman f;
    if (exponent) {
        f.exponent = *exponent;
    } else {
        double alpha = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= mu.depth(); ++k) {
            if (max_mass[static_cast<std::size_t>(k)] > 0.0) {
                alpha = std::min(alpha, std::log(max_mass[static_cast<std::size_t>(k)]) / (k * std::log(p.r())));
            }
        }
        f.exponent = std::isfinite(alpha) ? alpha : 0.0;
    }
    f.constant = 0.0;
    for (int k = 0; k <= mu.depth(); ++k) {
        f.constant = std::max(f.constant, max_mass[static_cast<std::size_t>(k)] / p.scale_pow(k, f.exponent));
    }
    return f;
}

template <class T>
MassTrie<T> natural_measure(const CylinderTrie& t, const SpaceParams& p, std::optional<double> exponent) {
    if (t.empty()) throw std::invalid_argument("natural_measure: empty trie");
    if (t.m() != p.m()) throw std::invalid_argument("natural_measure: arity mismatch");
    const int depth = t.depth();
    // A shared source node reached with different masses must be split, so
    // new nodes are keyed by (source node, mass).
    TrieBuilder b(t.m(), depth);
    std::vector<std::vector<T>> built_mass(static_cast<std::size_t>(depth) + 1);
    std::vector<std::vector<std::uint32_t>> built_src(static_cast<std::size_t>(depth) + 1);
    b.add_root();
    built_mass[0].push_back(T(1));
    built_src[0].push_back(0);
    for (int k = 0; k < depth; ++k) {
        std::map<std::pair<std::uint32_t, T>, std::uint32_t> seen;
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < built_src[ku].size(); ++i) {
            const TrieNode& n = t.node(k, built_src[ku][i]);
            const T share = built_mass[ku][i] / T(static_cast<int>(n.child_count));
            for (int d = 0; d < t.m(); ++d) {
                const auto c = n.child[d];
                if (c == kNoNode) continue;
                auto [it, inserted] = seen.emplace(std::make_pair(c, share), 0);
                const auto du = static_cast<std::uint8_t>(d);
                if (inserted) {
                    it->second = b.add_child(k, static_cast<std::uint32_t>(i), du);
                    built_mass[ku + 1].push_back(share);
                    built_src[ku + 1].push_back(c);
                } else {
                    b.link(k, static_cast<std::uint32_t>(i), du, it->second);
                }
            }
        }
    }
    auto result = std::move(b).finish(TrieBuilder::Sharing::kKeep);
    std::vector<std::vector<T>> mass(static_cast<std::size_t>(depth) + 1);
    for (int k = 0; k <= depth; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        mass[ku].assign(result.trie.level(k).size(), T(0));
        for (std::size_t i = 0; i < result.remap[ku].size(); ++i) {
            if (result.remap[ku][i] != kNoNode) mass[ku][result.remap[ku][i]] = built_mass[ku][i];
        }
    }
    MassTrie<T> out(std::move(result.trie), std::move(mass));
    out.set_frostman(measure_frostman(out, p, exponent));
    return out;
}

template <class T, class Source>
T tau(const MassTrie<T>& mu, const MassTrie<T>& nu, const Source& src, const Word& a, int l) {
    if (static_cast<int>(a.size()) > l) throw std::invalid_argument("tau: |A| exceeds l");
    if (l > mu.depth() || l > nu.depth()) {
        throw std::invalid_argument("tau: level " + std::to_string(l) + " exceeds measure depth");
    }
    T sum(0);
    joint_walk(mu.trie(), nu.trie(), src, a, l, [&](int level, std::uint32_t e, std::uint32_t f) {
        if (level == l) sum += mu.mass(level, e) * nu.mass(level, f);
        return Walk::kContinue;
    });
    for (int i = 0; i < l; ++i) sum *= T(mu.m());
    return sum;
}

}  // namespace cantor
