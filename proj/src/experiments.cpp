#include "cantor/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "cantor/automorphism.hpp"
#include "cantor/dimension.hpp"
#include "cantor/intersect.hpp"
#include "cantor/kernels.hpp"
#include "cantor/measures.hpp"
#include "cantor/parallel.hpp"
#include "cantor/rational.hpp"

namespace cantor {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int parse_int(std::string_view text, const char* what) {
    int v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument(std::string("bad ") + what + ": '" + std::string(text) + "'");
    return v;
}

// Nearest-rank quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

KRange window(const ExperimentConfig& cfg) {
    const KRange range = cfg.k_range.value_or(default_k_range(cfg.depth));
    if (range.first < 0 || range.last > cfg.depth || range.size() < 2) {
        throw std::invalid_argument("k_range " + to_string(range) + " must hold two levels within 0.." +
                                    std::to_string(cfg.depth));
    }
    return range;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (cfg.depth < 1 || cfg.depth > kMaxDepth) {
        throw std::invalid_argument("depth must lie in 1.." + std::to_string(kMaxDepth));
    }
}

MassTrie<double> measure_for(const SetSpec& spec, const CylinderTrie& t, const SpaceParams& p) {
    std::optional<double> exponent;
    if (const auto* moran = std::get_if<MoranSet>(&spec)) exponent = moran->t;
    return natural_measure<double>(t, p, exponent);
}

json frostman_json(const MassTrie<double>& mu) {
    return {{"exponent", mu.frostman()->exponent}, {"constant", mu.frostman()->constant}};
}

std::vector<TrialRecord> codimension_trials(const ExperimentConfig& cfg, const CylinderTrie& e, const CylinderTrie& f,
                                            KRange range) {
    std::vector<TrialRecord> out(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        TrialRecord& rec = out[t];
        rec.index = t;
        rec.seed = derive_seed(cfg.base_seed, t);
        const auto sigma = sample_automorphism(cfg.space, rec.seed);
        rec.counts = intersect_counts(e, f, sigma, cfg.depth);
        rec.nonempty = rec.counts.back() > 0;
        rec.estimate = box_dim_estimate(rec.counts, cfg.space, range);
    });
    return out;
}

void trial_rows(ExperimentReport& report, const std::vector<TrialRecord>& trials, KRange range) {
    report.header = {"trial", "seed", "nonempty", "slope", "stderr"};
    for (int k = range.first; k <= range.last; ++k) report.header.push_back("count_" + std::to_string(k));
    for (const auto& rec : trials) {
        std::vector<std::string> row{std::to_string(rec.index), std::to_string(rec.seed), rec.nonempty ? "1" : "0"};
        row.push_back(rec.estimate.empty ? "" : fmt(rec.estimate.slope));
        row.push_back(rec.estimate.empty ? "" : fmt(rec.estimate.stderr_));
        for (int k = range.first; k <= range.last; ++k) {
            row.push_back(std::to_string(rec.counts[static_cast<std::size_t>(k)]));
        }
        report.rows.push_back(std::move(row));
    }
}

json slope_summary(const std::vector<TrialRecord>& trials) {
    std::vector<double> slopes;
    for (const auto& rec : trials) {
        if (!rec.estimate.empty) slopes.push_back(rec.estimate.slope);
    }
    json s;
    s["trials"] = trials.size();
    s["nonempty"] = slopes.size();
    s["empty_fraction"] = 1.0 - static_cast<double>(slopes.size()) / static_cast<double>(trials.size());
    if (slopes.empty()) {
        for (const char* key : {"mean_slope", "slope_stderr", "min_slope", "max_slope", "q01", "q50", "q99"}) {
            s[key] = nullptr;
        }
        return s;
    }
    const auto n = static_cast<double>(slopes.size());
    const double mean = kernels::sum(slopes) / n;
    std::vector<double> centered(slopes.size());
    for (std::size_t i = 0; i < slopes.size(); ++i) centered[i] = slopes[i] - mean;
    const double var = slopes.size() > 1 ? kernels::sum_squares(centered) / (n - 1.0) : 0.0;
    std::vector<double> sorted = slopes;
    std::sort(sorted.begin(), sorted.end());
    s["mean_slope"] = mean;
    s["slope_stderr"] = std::sqrt(var / n);
    s["min_slope"] = sorted.front();
    s["max_slope"] = sorted.back();
    s["q01"] = quantile(sorted, 0.01);
    s["q50"] = quantile(sorted, 0.50);
    s["q99"] = quantile(sorted, 0.99);
    return s;
}

json set_summary(const SetSpec& spec, const CylinderTrie& t, const SpaceParams& p, KRange range) {
    const auto est = box_dim_estimate(t.cover_counts(), p, range);
    return {{"spec", to_string(spec)},
            {"nominal_dimension", nominal_dimension(spec, p)},
            {"box_dim_estimate", est.empty ? json(nullptr) : json(est.slope)}};
}

double predicted_dimension(const ExperimentConfig& cfg) {
    return nominal_dimension(cfg.set_e, cfg.space) + nominal_dimension(cfg.set_f, cfg.space) -
           cfg.space.ambient_dim();
}

// (m!)^count as an exact integer, or nullopt above the cap.
std::optional<std::uint64_t> bounded_count(const std::string& decimal, std::uint64_t cap) {
    mpz_class n(decimal);
    if (n > mpz_class(std::to_string(cap))) return std::nullopt;
    return std::stoull(decimal);
}

using Int128 = __int128;

std::string int128_string(Int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

MassTrie<std::int64_t> random_integer_measure(int m, int depth, std::uint64_t seed) {
    PhiloxStream rng(Philox4x32::key_from_seed(seed), Philox4x32::Counter{});
    std::uint64_t total = 1;
    for (int k = 0; k < depth; ++k) total *= static_cast<std::uint64_t>(m);
    std::vector<std::pair<Word, std::int64_t>> leaves;
    for (std::uint64_t i = 0; i < total; ++i) {
        // About a third of the leaves are dead; live ones weigh 1..5.
        if (rng.uniform_below(3) == 0) continue;
        leaves.emplace_back(word_from_index(i, depth, m), static_cast<std::int64_t>(rng.uniform_below(5) + 1));
    }
    if (leaves.empty()) leaves.emplace_back(word_from_index(0, depth, m), 1);
    return MassTrie<std::int64_t>::from_leaf_masses(m, depth, leaves);
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::kBoxdim: return "boxdim";
        case ExperimentKind::kPremeasure: return "premeasure";
        case ExperimentKind::kMartingale: return "martingale";
        case ExperimentKind::kEnergy: return "energy";
        case ExperimentKind::kEsssup: return "esssup";
        case ExperimentKind::kEmptyRate: return "empty-rate";
        case ExperimentKind::kExampleTail: return "example-tail";
    }
    return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
    for (auto kind : {ExperimentKind::kBoxdim, ExperimentKind::kPremeasure, ExperimentKind::kMartingale,
                      ExperimentKind::kEnergy, ExperimentKind::kEsssup, ExperimentKind::kEmptyRate,
                      ExperimentKind::kExampleTail}) {
        if (name == kind_name(kind)) return kind;
    }
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

KRange parse_k_range(std::string_view text) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) throw std::invalid_argument("k range must look like a..b");
    KRange r{parse_int(text.substr(0, dots), "k range"), parse_int(text.substr(dots + 2), "k range")};
    if (r.first < 0 || r.last < r.first) throw std::invalid_argument("k range must satisfy 0 <= a <= b");
    return r;
}

std::string to_string(const KRange& range) { return std::to_string(range.first) + ".." + std::to_string(range.last); }

double parse_real(std::string_view text) {
    const auto slash = text.find('/');
    auto parse = [](std::string_view t) {
        double v = 0.0;
        const auto* end = t.data() + t.size();
        auto [ptr, ec] = std::from_chars(t.data(), end, v);
        if (t.empty() || ec != std::errc() || ptr != end) {
            throw std::invalid_argument("bad number '" + std::string(t) + "'");
        }
        return v;
    };
    if (slash == std::string_view::npos) return parse(text);
    const double den = parse(text.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return parse(text.substr(0, slash)) / den;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = kind_name(cfg.kind);
    j["m"] = cfg.space.m();
    j["r"] = cfg.space.r();
    j["set_e"] = to_string(cfg.set_e);
    j["set_f"] = to_string(cfg.set_f);
    j["depth"] = cfg.depth;
    j["k_range"] = cfg.k_range ? json(to_string(*cfg.k_range)) : json(nullptr);
    j["trials"] = cfg.trials;
    j["seed"] = cfg.base_seed;
    j["s"] = cfg.s;
    j["cylinder"] = cfg.cylinder;
    j["l_first"] = cfg.l_first;
    j["component"] = cfg.component ? json(*cfg.component) : json(nullptr);
    j["j_range"] = to_string(cfg.j_range);
    j["epsilon"] = cfg.epsilon;
    j["exact"] = cfg.exact;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    ExperimentConfig cfg;
    int m = cfg.space.m();
    double r = cfg.space.r();
    for (const auto& [key, v] : j.items()) {
        if (key == "experiment") cfg.kind = parse_kind(v.get<std::string>());
        else if (key == "m") m = v.get<int>();
        else if (key == "r") r = v.is_string() ? parse_real(v.get<std::string>()) : v.get<double>();
        else if (key == "set_e") cfg.set_e = parse_set_spec(v.get<std::string>());
        else if (key == "set_f") cfg.set_f = parse_set_spec(v.get<std::string>());
        else if (key == "depth") cfg.depth = v.get<int>();
        else if (key == "k_range") cfg.k_range = v.is_null() ? std::nullopt : std::optional(parse_k_range(v.get<std::string>()));
        else if (key == "trials") cfg.trials = v.get<std::uint64_t>();
        else if (key == "seed") cfg.base_seed = v.get<std::uint64_t>();
        else if (key == "threads") cfg.threads = v.get<int>();
        else if (key == "s") cfg.s = v.is_string() ? parse_real(v.get<std::string>()) : v.get<double>();
        else if (key == "cylinder") cfg.cylinder = v.get<std::string>();
        else if (key == "l_first") cfg.l_first = v.get<int>();
        else if (key == "component") cfg.component = v.is_null() ? std::nullopt : std::optional(v.get<int>());
        else if (key == "j_range") cfg.j_range = parse_k_range(v.get<std::string>());
        else if (key == "epsilon") cfg.epsilon = v.get<double>();
        else if (key == "exact") cfg.exact = v.get<bool>();
        else if (key == "comment") continue;
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
    cfg.space = SpaceParams(m, r);
    return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentReport run_codimension_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const KRange range = window(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const auto f = build_set(cfg.set_f, cfg.space, cfg.depth);
    const auto trials = codimension_trials(cfg, e, f, range);
    ExperimentReport report;
    trial_rows(report, trials, range);
    report.summary = slope_summary(trials);
    report.summary["predicted"] = std::max(predicted_dimension(cfg), 0.0);
    report.summary["k_range"] = to_string(range);
    report.summary["set_e"] = set_summary(cfg.set_e, e, cfg.space, range);
    report.summary["set_f"] = set_summary(cfg.set_f, f, cfg.space, range);
    return report;
}

ExperimentReport run_esssup_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const double predicted = predicted_dimension(cfg);
    if (!(predicted > 0.0)) {
        throw HypothesisError("esssup needs dim E + dim F + log m/log r > 0, got " + std::to_string(predicted));
    }
    const KRange range = window(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const auto f = build_set(cfg.set_f, cfg.space, cfg.depth);
    const auto trials = codimension_trials(cfg, e, f, range);
    ExperimentReport report;
    trial_rows(report, trials, range);
    report.summary = slope_summary(trials);
    std::uint64_t within = 0;
    std::uint64_t reaching = 0;
    for (const auto& rec : trials) {
        if (rec.estimate.empty) continue;
        within += std::abs(rec.estimate.slope - predicted) <= cfg.epsilon;
        reaching += rec.estimate.slope >= predicted - cfg.epsilon;
    }
    report.summary["predicted"] = predicted;
    report.summary["epsilon"] = cfg.epsilon;
    report.summary["within_epsilon"] = within;
    report.summary["reaching"] = reaching;
    report.summary["reaching_fraction"] = static_cast<double>(reaching) / static_cast<double>(cfg.trials);
    report.summary["k_range"] = to_string(range);
    report.summary["set_e"] = set_summary(cfg.set_e, e, cfg.space, range);
    report.summary["set_f"] = set_summary(cfg.set_f, f, cfg.space, range);
    return report;
}

ExperimentReport run_empty_rate_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const auto f = build_set(cfg.set_f, cfg.space, cfg.depth);
    std::vector<char> nonempty(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        const auto sigma = sample_automorphism(cfg.space, derive_seed(cfg.base_seed, t));
        nonempty[t] = !empty_intersection_trial(e, f, sigma, cfg.depth);
    });
    ExperimentReport report;
    report.header = {"trial", "seed", "nonempty"};
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        hits += nonempty[t] != 0;
        report.rows.push_back({std::to_string(t), std::to_string(derive_seed(cfg.base_seed, t)), nonempty[t] ? "1" : "0"});
    }
    const double expected =
        static_cast<double>(e.cover_count(cfg.depth)) * static_cast<double>(f.cover_count(cfg.depth)) /
        std::pow(static_cast<double>(cfg.space.m()), cfg.depth);
    report.summary["trials"] = cfg.trials;
    report.summary["nonempty"] = hits;
    report.summary["nonempty_fraction"] = static_cast<double>(hits) / static_cast<double>(cfg.trials);
    report.summary["expected_cover"] = expected;
    report.summary["predicted"] = predicted_dimension(cfg);
    return report;
}

ExperimentReport run_example_tail_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto* spec = std::get_if<UnionExample>(&cfg.set_e);
    if (!spec) throw std::invalid_argument("example-tail needs set_e = union:alpha=...,imax=...");
    const SpaceParams& p = cfg.space;
    const double exponent = 1.0 + spec->alpha * std::log(p.r()) / std::log(static_cast<double>(p.m()));
    if (!(exponent > 0.0)) {
        throw HypothesisError("example tail needs 1 + alpha log r/log m > 0, got " + std::to_string(exponent));
    }
    const int depth = std::max(cfg.depth, cfg.j_range.last);
    const auto components = build_union_components(*spec, p, depth);
    const int i = cfg.component.value_or(components.front().index);
    const auto it = std::find_if(components.begin(), components.end(), [&](const auto& c) { return c.index == i; });
    if (it == components.end()) throw std::invalid_argument("example-tail: no component with index " + std::to_string(i));
    if (cfg.j_range.first < i) throw std::invalid_argument("example-tail: j range must start at or after i");
    const CylinderTrie& ei = it->trie;

    std::vector<Word> targets;
    for (int j = cfg.j_range.first; j <= cfg.j_range.last; ++j) {
        std::vector<std::uint8_t> digits(static_cast<std::size_t>(j - 1), 0);
        digits.push_back(1);
        targets.emplace_back(std::move(digits));
    }
    const auto levels = targets.size();
    std::vector<std::vector<char>> hit(cfg.trials, std::vector<char>(levels));
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        const auto sigma = sample_automorphism(p, derive_seed(cfg.base_seed, t));
        for (std::size_t q = 0; q < levels; ++q) hit[t][q] = ei.contains(sigma.apply(targets[q]));
    });

    ExperimentReport report;
    report.header = {"trial", "seed"};
    for (int j = cfg.j_range.first; j <= cfg.j_range.last; ++j) report.header.push_back("hit_" + std::to_string(j));
    std::vector<std::uint64_t> hits(levels, 0);
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        std::vector<std::string> row{std::to_string(t), std::to_string(derive_seed(cfg.base_seed, t))};
        for (std::size_t q = 0; q < levels; ++q) {
            hits[q] += hit[t][q] != 0;
            row.push_back(hit[t][q] ? "1" : "0");
        }
        report.rows.push_back(std::move(row));
    }
    json rows = json::array();
    for (std::size_t q = 0; q < levels; ++q) {
        const int j = cfg.j_range.first + static_cast<int>(q);
        const double prob = static_cast<double>(hits[q]) / static_cast<double>(cfg.trials);
        const double mj = std::pow(static_cast<double>(p.m()), j);
        const double bound = std::pow(static_cast<double>(p.m()), -j * exponent);
        rows.push_back({{"j", j},
                        {"hits", hits[q]},
                        {"probability", prob},
                        {"exact", static_cast<double>(ei.cover_count(j)) / mj},
                        {"bound", bound},
                        {"ratio", prob / bound}});
    }
    report.summary["alpha"] = spec->alpha;
    report.summary["component"] = i;
    report.summary["component_dimension"] = it->dimension;
    report.summary["exponent"] = exponent;
    report.summary["trials"] = cfg.trials;
    report.summary["levels"] = std::move(rows);
    return report;
}

ExperimentReport run_martingale_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const auto f = build_set(cfg.set_f, cfg.space, cfg.depth);
    const auto mu = measure_for(cfg.set_e, e, cfg.space);
    const auto nu = measure_for(cfg.set_f, f, cfg.space);
    const Word a = Word::parse(cfg.cylinder, cfg.space.m());
    const int l_first = std::max(cfg.l_first, static_cast<int>(a.size()));
    const auto bound = second_moment_bound(mu, nu, cfg.space, a);
    const auto rows = second_moment_stats(mu, nu, cfg.space, a, l_first, cfg.depth, cfg.trials, cfg.base_seed,
                                          cfg.threads);
    ExperimentReport report;
    report.header = {"l", "mean", "m2", "bound_ratio", "trials", "seed", "mean_stderr"};
    json records = json::array();
    for (const auto& r : rows) {
        report.rows.push_back({std::to_string(r.l), fmt(r.mean), fmt(r.m2), fmt(r.bound_ratio),
                               std::to_string(r.trials), std::to_string(r.seed), fmt(r.mean_stderr)});
        records.push_back({{"l", r.l},
                           {"mean", r.mean},
                           {"m2", r.m2},
                           {"bound_ratio", r.bound_ratio},
                           {"trials", r.trials},
                           {"seed", r.seed}});
    }
    report.summary["cylinder"] = a.empty() ? "ROOT" : a.to_string();
    report.summary["frostman_e"] = frostman_json(mu);
    report.summary["frostman_f"] = frostman_json(nu);
    report.summary["bound"] = {{"gamma", bound.gamma}, {"c1", bound.c1}, {"c0", bound.c0}, {"value", bound.value}};
    report.summary["records"] = std::move(records);
    return report;
}

ExperimentReport run_energy_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const auto f = build_set(cfg.set_f, cfg.space, cfg.depth);
    const auto mu = measure_for(cfg.set_e, e, cfg.space);
    const auto nu = measure_for(cfg.set_f, f, cfg.space);
    const auto probe =
        energy_growth_probe(mu, nu, cfg.space, cfg.s, cfg.depth, cfg.trials, cfg.base_seed, cfg.threads, cfg.k_range);
    const auto own = energy(mu, cfg.space, cfg.s);
    ExperimentReport report;
    report.header = {"k", "mean_term", "mean_partial"};
    for (std::size_t k = 0; k < probe.mean_terms.size(); ++k) {
        report.rows.push_back({std::to_string(k), fmt(probe.mean_terms[k]), fmt(probe.mean_partial[k])});
    }
    report.summary["s"] = probe.s;
    report.summary["l_max"] = probe.l_max;
    report.summary["trials"] = probe.trials;
    report.summary["seed"] = probe.seed;
    report.summary["mean_terms"] = probe.mean_terms;
    report.summary["mean_partial"] = probe.mean_partial;
    report.summary["fit_range"] = to_string(probe.fit_range);
    report.summary["fitted_rate"] = probe.fitted_rate;
    report.summary["predicted_rate"] = probe.predicted_rate;
    report.summary["energy_e"] = {{"s", own.s},
                                  {"L", own.depth},
                                  {"value", own.value},
                                  {"diagonal", own.diagonal},
                                  {"terms", own.terms}};
    return report;
}

ExperimentReport run_premeasure_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto e = build_set(cfg.set_e, cfg.space, cfg.depth);
    const KRange range = cfg.k_range.value_or(KRange{0, cfg.depth});
    if (range.first < 0 || range.last > cfg.depth) throw std::invalid_argument("premeasure: j range outside 0..depth");
    std::optional<Rational> q;
    if (cfg.exact) {
        // r^s is rational for s = -log m / log r: it equals 1/m.
        if (std::abs(cfg.s - cfg.space.ambient_dim()) > 1e-12) {
            throw std::invalid_argument("exact premeasure supports s = ambient dimension only");
        }
        q = Rational(1, static_cast<unsigned long>(cfg.space.m()));
    }
    ExperimentReport report;
    report.header = {"s", "j", "value"};
    if (q) report.header.push_back("exact");
    json rows = json::array();
    for (int j = range.first; j <= range.last; ++j) {
        const auto res = premeasure(e, cfg.space, cfg.s, j);
        std::vector<std::string> row{fmt(cfg.s), std::to_string(j), fmt(res.value)};
        json rec = {{"s", cfg.s}, {"j", j}, {"value", res.value}};
        if (q) {
            const Rational exact = premeasure_value(e, *q, j);
            row.push_back(exact.get_str());
            rec["exact"] = exact.get_str();
        }
        report.rows.push_back(std::move(row));
        rows.push_back(std::move(rec));
    }
    report.summary["records"] = std::move(rows);
    report.summary["set_e"] = to_string(cfg.set_e);
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::kBoxdim: return run_codimension_experiment(cfg);
        case ExperimentKind::kPremeasure: return run_premeasure_experiment(cfg);
        case ExperimentKind::kMartingale: return run_martingale_experiment(cfg);
        case ExperimentKind::kEnergy: return run_energy_experiment(cfg);
        case ExperimentKind::kEsssup: return run_esssup_experiment(cfg);
        case ExperimentKind::kEmptyRate: return run_empty_rate_experiment(cfg);
        case ExperimentKind::kExampleTail: return run_example_tail_experiment(cfg);
    }
    throw std::invalid_argument("unknown experiment");
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::kCsv;
    if (name == "json") return OutputFormat::kJson;
    throw std::invalid_argument("format must be csv or json");
}

void write_report(const ExperimentReport& report, const ExperimentConfig& cfg, OutputFormat format, std::ostream& out) {
    const std::string hash = config_hash(cfg);
    if (format == OutputFormat::kCsv) {
        out << "# version=" << kArtifactVersion << " config_hash=" << hash << " experiment=" << kind_name(cfg.kind)
            << '\n';
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        };
        line(report.header);
        for (const auto& row : report.rows) line(row);
        return;
    }
    json doc;
    doc["version"] = kArtifactVersion;
    doc["config_hash"] = hash;
    doc["config"] = config_to_json(cfg);
    doc["summary"] = report.summary;
    out << doc.dump(2) << '\n';
}

bool OracleReport::ok() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const OracleCheck& c) { return c.status == OracleCheck::Status::kFail; });
}

OracleReport run_oracle_suite(int m, int depth, std::uint64_t seed, std::uint64_t cap) {
    if (depth < 1) throw std::invalid_argument("oracle: depth must be at least 1");
    const SpaceParams p(m, 0.5);
    OracleReport report;
    report.m = m;
    report.depth = depth;
    using Status = OracleCheck::Status;
    auto skipped = [&](std::string name, const std::string& required) {
        report.checks.push_back({std::move(name), Status::kSkipped,
                                 "requires " + required + " assignments, cap " + std::to_string(cap)});
    };

    // Group order and uniformity of sigma(I), level by level.
    for (int k = 1; k <= depth; ++k) {
        const std::string order = truncated_group_order(m, k);
        const auto count = bounded_count(order, cap);
        const std::string suffix = "@k=" + std::to_string(k);
        if (!count) {
            skipped("group-order" + suffix, order);
            skipped("uniformity" + suffix, order);
            continue;
        }
        TruncatedGroupEnumerator en(p, k, cap);
        const auto cells = static_cast<std::size_t>(std::pow(m, k));
        std::vector<std::uint64_t> hits(cells * cells, 0);
        std::uint64_t seen = 0;
        do {
            ++seen;
            for (std::size_t i = 0; i < cells; ++i) {
                const Word w = word_from_index(i, k, m);
                hits[i * cells + word_index(apply_word(en.current(), w), m)]++;
            }
        } while (en.next());
        report.checks.push_back({"group-order" + suffix, seen == *count ? Status::kPass : Status::kFail,
                                 std::to_string(seen) + " enumerated, expected " + order});
        const bool uniform = std::all_of(hits.begin(), hits.end(),
                                         [&](std::uint64_t h) { return h * cells == seen; });
        report.checks.push_back({"uniformity" + suffix, uniform ? Status::kPass : Status::kFail,
                                 "each (I, J) hit " + std::to_string(hits[0]) + " of " + std::to_string(seen)});
    }

    // Cover expectation for random pairs at level depth.
    {
        const std::string order = truncated_group_order(m, depth);
        if (!bounded_count(order, cap)) {
            skipped("cover-expectation", order);
        } else {
            for (int pair = 0; pair < 5; ++pair) {
                const auto e = random_trie(m, depth, derive_seed(seed, 2 * pair));
                const auto f = random_trie(m, depth, derive_seed(seed, 2 * pair + 1));
                TruncatedGroupEnumerator en(p, depth, cap);
                Int128 total = 0;
                do {
                    total += intersect_count(e, f, en.current(), depth);
                } while (en.next());
                const Int128 cells = static_cast<Int128>(std::pow(m, depth));
                const Int128 lhs = total * cells;
                const Int128 rhs = static_cast<Int128>(en.count()) * e.cover_count(depth) * f.cover_count(depth);
                Rational mean(mpz_class(int128_string(total)), mpz_class(std::to_string(en.count())));
                mean.canonicalize();
                report.checks.push_back({"cover-expectation#" + std::to_string(pair), lhs == rhs ? Status::kPass : Status::kFail,
                                         "mean " + mean.get_str() + " vs " + std::to_string(e.cover_count(depth)) + "*" +
                                             std::to_string(f.cover_count(depth)) + "/" + int128_string(cells)});
            }
        }
    }

    // Conditional martingale identity: fix every permutation below level
    // l-1, enumerate those at level l-1 under sigma^{-1}(A).
    for (int l = 1; l <= depth; ++l) {
        const auto mu = random_integer_measure(m, depth, derive_seed(seed, 100 + l));
        const auto nu = random_integer_measure(m, depth, derive_seed(seed, 200 + l));
        const auto base = ExplicitAutomorphism::tabulate(LazyAutomorphism(m, derive_seed(seed, 300 + l)), depth);
        std::vector<Word> cylinders{Word{}};
        if (l >= 2) cylinders.push_back(word_from_index(derive_seed(seed, 400 + l) % static_cast<std::uint64_t>(std::pow(m, l - 1)), l - 1, m));
        for (const Word& a : cylinders) {
            const std::string name = "martingale@l=" + std::to_string(l) + ",A=" + (a.empty() ? "ROOT" : a.to_string());
            const Word within = apply_inverse_word(base, a);
            std::optional<TruncatedGroupEnumerator> en;
            try {
                en.emplace(base, l - 1, within, cap);
            } catch (const EnumerationCapExceeded& err) {
                skipped(name, err.required());
                continue;
            }
            const std::int64_t before = tau(mu, nu, base, a, l - 1);
            Int128 total = 0;
            do {
                total += tau(mu, nu, en->current(), a, l);
            } while (en->next());
            const bool pass = total == static_cast<Int128>(before) * static_cast<Int128>(en->count());
            Rational mean(mpz_class(int128_string(total)), mpz_class(std::to_string(en->count())));
            mean.canonicalize();
            report.checks.push_back({name, pass ? Status::kPass : Status::kFail,
                                     "mean tau_l " + mean.get_str() + " vs tau_{l-1} " + std::to_string(before) +
                                         " over " + std::to_string(en->count())});
        }
    }
    return report;
}

json to_json(const OracleReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        const char* status = c.status == OracleCheck::Status::kPass   ? "pass"
                             : c.status == OracleCheck::Status::kFail ? "fail"
                                                                      : "skipped";
        checks.push_back({{"name", c.name}, {"status", status}, {"detail", c.detail}});
    }
    return {{"m", report.m}, {"depth", report.depth}, {"ok", report.ok()}, {"checks", std::move(checks)}};
}

}  // namespace cantor
