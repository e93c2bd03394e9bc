#include "cantor/measures.hpp"

#include <cmath>

#include "cantor/parallel.hpp"

namespace cantor {

namespace {

void check_levels(const MassTrie<double>& mu, const MassTrie<double>& nu, const Word& a, int l) {
    if (mu.m() != nu.m()) throw std::invalid_argument("tau: arity mismatch");
    if (static_cast<int>(a.size()) > l) throw std::invalid_argument("tau: |A| exceeds l");
    if (l > mu.depth() || l > nu.depth()) {
        throw std::invalid_argument("tau: level " + std::to_string(l) + " exceeds measure depth");
    }
}

// Jointly alive (image node, preimage node) pairs per level, in walk order.
struct JointLevels {
    std::vector<std::vector<std::uint32_t>> e;
    std::vector<std::vector<std::uint32_t>> f;
};

JointLevels joint_levels(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma,
                         const Word& a, int l_max) {
    JointLevels out;
    out.e.resize(static_cast<std::size_t>(l_max) + 1);
    out.f.resize(static_cast<std::size_t>(l_max) + 1);
    sigma.visit([&](const auto& src) {
        joint_walk(mu.trie(), nu.trie(), src, a, l_max, [&](int level, std::uint32_t e, std::uint32_t f) {
            out.e[static_cast<std::size_t>(level)].push_back(e);
            out.f[static_cast<std::size_t>(level)].push_back(f);
            return Walk::kContinue;
        });
    });
    return out;
}

}  // namespace

double tau(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma, const Word& a, int l) {
    check_levels(mu, nu, a, l);
    const auto levels = joint_levels(mu, nu, sigma, a, l);
    const auto lu = static_cast<std::size_t>(l);
    return std::pow(static_cast<double>(mu.m()), l) *
           kernels::gather_dot(mu.level_mass(l), levels.e[lu], nu.level_mass(l), levels.f[lu]);
}

std::vector<double> martingale_trajectory(const MassTrie<double>& mu, const MassTrie<double>& nu,
                                          const Automorphism& sigma, const Word& a, int l_max) {
    check_levels(mu, nu, a, l_max);
    const auto levels = joint_levels(mu, nu, sigma, a, l_max);
    std::vector<double> out;
    for (int l = static_cast<int>(a.size()); l <= l_max; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        out.push_back(std::pow(static_cast<double>(mu.m()), l) *
                      kernels::gather_dot(mu.level_mass(l), levels.e[lu], nu.level_mass(l), levels.f[lu]));
    }
    return out;
}

MassTrie<double> tau_measure(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma,
                             int depth) {
    check_levels(mu, nu, Word{}, depth);
    const int m = mu.m();
    TrieBuilder b(m, depth);
    std::vector<std::uint32_t> stack(static_cast<std::size_t>(depth) + 1, 0);
    std::vector<double> leaf_mass;
    const double scale = std::pow(static_cast<double>(m), depth);
    bool any = false;
    sigma.visit([&](const auto& src) {
        joint_walk(mu.trie(), nu.trie(), src, Word{}, depth,
                   [&](int level, std::uint32_t e, std::uint32_t f, std::span<const std::uint8_t> path) {
                       const auto lu = static_cast<std::size_t>(level);
                       if (level == 0) {
                           stack[0] = b.add_root();
                           any = true;
                       } else {
                           stack[lu] = b.add_child(level - 1, stack[lu - 1], path[lu - 1]);
                       }
                       if (level == depth) {
                           if (leaf_mass.size() <= stack[lu]) leaf_mass.resize(stack[lu] + 1, 0.0);
                           leaf_mass[stack[lu]] = scale * (mu.mass(level, e) * nu.mass(level, f));
                       }
                       return Walk::kContinue;
                   });
    });
    auto result = std::move(b).finish(TrieBuilder::Sharing::kKeep);
    const CylinderTrie& t = result.trie;
    std::vector<std::vector<double>> mass(static_cast<std::size_t>(depth) + 1);
    for (int k = 0; k <= depth; ++k) mass[static_cast<std::size_t>(k)].assign(t.level(k).size(), 0.0);
    if (any) {
        const auto& bottom = result.remap[static_cast<std::size_t>(depth)];
        for (std::size_t i = 0; i < bottom.size(); ++i) {
            if (bottom[i] != kNoNode) mass[static_cast<std::size_t>(depth)][bottom[i]] = leaf_mass[i];
        }
    }
    for (int k = depth - 1; k >= 0; --k) {
        const auto lvl = t.level(k);
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            double sum = 0.0;
            for (int d = 0; d < m; ++d) {
                if (lvl[i].child[d] != kNoNode) sum += mass[ku + 1][lvl[i].child[d]];
            }
            mass[ku][i] = sum;
        }
    }
    return MassTrie<double>(std::move(result.trie), std::move(mass));
}

bool support_check(const MassTrie<double>& tau_surrogate, const CylinderTrie& e, const CylinderTrie& f,
                   const Automorphism& sigma) {
    const int depth = tau_surrogate.depth();
    if (depth > e.depth() || depth > f.depth()) throw std::invalid_argument("support_check: depth exceeds set depth");
    if (tau_surrogate.empty()) return true;
    bool ok = true;
    Word w;
    auto rec = [&](auto&& self, int k, std::uint32_t node) -> void {
        if (!ok || !(tau_surrogate.mass(k, node) > 0.0)) return;
        if (k == depth) {
            ok = e.contains(w) && f.contains(sigma.apply_inverse(w));
            return;
        }
        const auto& n = tau_surrogate.trie().node(k, node);
        for (int d = 0; d < tau_surrogate.m() && ok; ++d) {
            if (n.child[d] == kNoNode) continue;
            w.push_back(static_cast<std::uint8_t>(d));
            self(self, k + 1, n.child[d]);
            w.pop_back();
        }
    };
    rec(rec, 0, 0);
    return ok;
}

bool support_check(const MassTrie<double>& mu, const MassTrie<double>& nu, const Automorphism& sigma, int depth) {
    return support_check(tau_measure(mu, nu, sigma, depth), mu.trie(), nu.trie(), sigma);
}

SecondMomentBound second_moment_bound(const MassTrie<double>& mu, const MassTrie<double>& nu, const SpaceParams& p,
                                      const Word& a) {
    if (!mu.frostman() || !nu.frostman()) throw std::invalid_argument("second moment: measures lack Frostman data");
    SecondMomentBound out;
    out.gamma = mu.frostman()->exponent + nu.frostman()->exponent - p.ambient_dim();
    if (!(out.gamma > 0.0)) {
        throw HypothesisError("second moment bound needs alpha + beta + log m/log r > 0, got " +
                              std::to_string(out.gamma));
    }
    const double c = mu.frostman()->constant * nu.frostman()->constant;
    const double q = std::pow(p.r(), out.gamma);
    out.c1 = c * q / (1.0 - q);
    out.c0 = c + out.c1;
    out.value = out.c0 * mu.mass_of(a) * p.scale_pow(static_cast<int>(a.size()), out.gamma);
    return out;
}

std::vector<SecondMomentRow> second_moment_stats(const MassTrie<double>& mu, const MassTrie<double>& nu,
                                                 const SpaceParams& p, const Word& a, int l_first, int l_last,
                                                 std::uint64_t trials, std::uint64_t seed, int threads) {
    if (trials == 0) throw std::invalid_argument("second moment: trials must be positive");
    if (l_first < static_cast<int>(a.size()) || l_last < l_first) {
        throw std::invalid_argument("second moment: need |A| <= l_first <= l_last");
    }
    const auto bound = second_moment_bound(mu, nu, p, a);
    check_levels(mu, nu, a, l_last);
    const auto rows = static_cast<std::size_t>(l_last - l_first + 1);
    // values[row][trial]
    std::vector<std::vector<double>> values(rows, std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t t) {
        const auto sigma = sample_automorphism(p, derive_seed(seed, t));
        const auto traj = martingale_trajectory(mu, nu, sigma, a, l_last);
        for (std::size_t r = 0; r < rows; ++r) values[r][t] = traj[static_cast<std::size_t>(l_first) - a.size() + r];
    });
    std::vector<SecondMomentRow> out;
    const auto n = static_cast<double>(trials);
    for (std::size_t r = 0; r < rows; ++r) {
        SecondMomentRow row;
        row.l = l_first + static_cast<int>(r);
        row.mean = kernels::sum(values[r]) / n;
        row.m2 = kernels::sum_squares(values[r]) / n;
        row.bound_ratio = row.m2 / bound.value;
        row.trials = trials;
        row.seed = seed;
        const double var = trials > 1 ? std::max(0.0, row.m2 - row.mean * row.mean) * n / (n - 1.0) : 0.0;
        row.mean_stderr = std::sqrt(var / n);
        out.push_back(row);
    }
    return out;
}

}  // namespace cantor
