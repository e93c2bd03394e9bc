#include "cantor/dimension.hpp"

#include <cmath>

#include "cantor/parallel.hpp"

namespace cantor {

namespace {

constexpr std::size_t kMaxCoverWords = 1'000'000;

}  // namespace

PremeasureResult premeasure(const CylinderTrie& t, const SpaceParams& p, double s, int j, bool want_cover) {
    if (!(s >= 0.0)) throw std::invalid_argument("premeasure: s must be nonnegative");
    if (j < 0 || j > t.depth()) throw std::invalid_argument("premeasure: j outside 0..depth");
    if (t.m() != p.m()) throw std::invalid_argument("premeasure: arity mismatch");
    PremeasureResult out;
    out.s = s;
    out.j = j;
    out.delta = std::pow(p.r(), j);
    if (t.empty()) {
        if (want_cover) out.cover.emplace();
        return out;
    }
    const int depth = t.depth();
    // cost[k][i] and whether node i of level k is taken whole.
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(depth) + 1);
    std::vector<std::vector<char>> take(static_cast<std::size_t>(depth) + 1);
    cost[static_cast<std::size_t>(depth)].assign(t.level(depth).size(), p.scale_pow(depth, s));
    take[static_cast<std::size_t>(depth)].assign(t.level(depth).size(), 1);
    for (int k = depth - 1; k >= j; --k) {
        const auto ku = static_cast<std::size_t>(k);
        const auto lvl = t.level(k);
        const double self = p.scale_pow(k, s);
        cost[ku].resize(lvl.size());
        take[ku].resize(lvl.size());
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            double sum = 0.0;
            for (int d = 0; d < t.m(); ++d) {
                if (lvl[i].child[d] != kNoNode) sum += cost[ku + 1][lvl[i].child[d]];
            }
            take[ku][i] = self <= sum;
            cost[ku][i] = take[ku][i] ? self : sum;
        }
    }
    const auto ju = static_cast<std::size_t>(j);
    const auto mult = t.multiplicity(j);
    std::vector<double> weights(mult.begin(), mult.end());
    out.value = kernels::dot(weights, cost[ju]);

    if (want_cover) {
        std::vector<Word> cover;
        Word w;
        auto rec = [&](auto&& self, int k, std::uint32_t node) -> void {
            if (k >= j && take[static_cast<std::size_t>(k)][node]) {
                if (cover.size() >= kMaxCoverWords) throw std::length_error("premeasure: cover too large to list");
                cover.push_back(w);
                return;
            }
            const auto& n = t.node(k, node);
            for (int d = 0; d < t.m(); ++d) {
                if (n.child[d] == kNoNode) continue;
                w.push_back(static_cast<std::uint8_t>(d));
                self(self, k + 1, n.child[d]);
                w.pop_back();
            }
        };
        rec(rec, 0, 0);
        out.cover = std::move(cover);
    }
    return out;
}

EnergyResult energy(const MassTrie<double>& tau, const SpaceParams& p, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("energy: s must be nonnegative");
    if (tau.m() != p.m()) throw std::invalid_argument("energy: arity mismatch");
    tau.check_additive();
    EnergyResult out;
    out.s = s;
    out.depth = tau.depth();
    out.terms.assign(static_cast<std::size_t>(tau.depth()), 0.0);
    if (tau.empty()) return out;
    const auto& t = tau.trie();
    std::vector<double> weights;
    std::vector<double> cross;
    for (int k = 0; k < tau.depth(); ++k) {
        const auto lvl = t.level(k);
        const auto mult = t.multiplicity(k);
        weights.assign(mult.begin(), mult.end());
        cross.assign(lvl.size(), 0.0);
        for (std::size_t i = 0; i < lvl.size(); ++i) {
            double c[kMaxArity];
            int n = 0;
            for (int d = 0; d < t.m(); ++d) {
                if (lvl[i].child[d] != kNoNode) c[n++] = tau.mass(k + 1, lvl[i].child[d]);
            }
            double pairs = 0.0;
            for (int a = 0; a < n; ++a) {
                for (int b = a + 1; b < n; ++b) pairs += c[a] * c[b];
            }
            cross[i] = 2.0 * pairs;
        }
        out.terms[static_cast<std::size_t>(k)] = kernels::dot(weights, cross) / p.scale_pow(k, s);
    }
    out.value = kernels::sum(out.terms);
    const int depth = tau.depth();
    const auto mult = t.multiplicity(depth);
    weights.assign(mult.begin(), mult.end());
    out.diagonal = kernels::weighted_sum_squares(weights, tau.level_mass(depth)) / p.scale_pow(depth, s);
    return out;
}

GrowthProbe energy_growth_probe(const MassTrie<double>& mu, const MassTrie<double>& nu, const SpaceParams& p,
                                double s, int l_max, std::uint64_t trials, std::uint64_t seed, int threads,
                                std::optional<KRange> fit_range) {
    if (!mu.frostman() || !nu.frostman()) throw std::invalid_argument("energy probe: measures lack Frostman data");
    if (trials == 0) throw std::invalid_argument("energy probe: trials must be positive");
    if (l_max < 2) throw std::invalid_argument("energy probe: l_max must be at least 2");
    const double gamma = mu.frostman()->exponent + nu.frostman()->exponent - p.ambient_dim();
    if (!(s < gamma)) {
        throw HypothesisError("energy probe needs s < alpha + beta + log m/log r = " + std::to_string(gamma));
    }
    GrowthProbe out;
    out.s = s;
    out.l_max = l_max;
    out.trials = trials;
    out.seed = seed;
    out.predicted_rate = std::pow(p.r(), gamma - s);
    out.fit_range = fit_range.value_or(KRange{l_max / 2, l_max - 1});
    if (out.fit_range.first < 0 || out.fit_range.last >= l_max || out.fit_range.size() < 2) {
        throw std::invalid_argument("energy probe: fit range must lie in 0..l_max-1 with two levels");
    }
    const auto levels = static_cast<std::size_t>(l_max);
    std::vector<std::vector<double>> terms(levels, std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t t) {
        const auto sigma = sample_automorphism(p, derive_seed(seed, t));
        const auto e = energy(tau_measure(mu, nu, sigma, l_max), p, s);
        for (std::size_t k = 0; k < levels; ++k) terms[k][t] = e.terms[k];
    });
    double partial = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
        out.mean_terms.push_back(kernels::sum(terms[k]) / static_cast<double>(trials));
        partial += out.mean_terms.back();
        out.mean_partial.push_back(partial);
    }
    std::vector<double> ks;
    std::vector<double> logs;
    for (int k = out.fit_range.first; k <= out.fit_range.last; ++k) {
        const double v = out.mean_terms[static_cast<std::size_t>(k)];
        if (!(v > 0.0)) {
            out.fitted_rate = 0.0;
            return out;
        }
        ks.push_back(k);
        logs.push_back(std::log(v));
    }
    const double n = static_cast<double>(ks.size());
    const double kbar = kernels::sum(ks) / n;
    const double lbar = kernels::sum(logs) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        sxy += (ks[i] - kbar) * (logs[i] - lbar);
        sxx += (ks[i] - kbar) * (ks[i] - kbar);
    }
    out.fitted_rate = std::exp(sxy / sxx);
    return out;
}

}  // namespace cantor
