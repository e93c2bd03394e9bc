// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N[,N...]] [--expect-red N[,N...]] [--workdir DIR]
//
// Exit status is 0 when the set of failing criteria equals the expected red
// set (empty by default), 1 otherwise.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cantor/automorphism.hpp"
#include "cantor/dimension.hpp"
#include "cantor/experiments.hpp"
#include "cantor/intersect.hpp"
#include "cantor/measures.hpp"
#include "cantor/parallel.hpp"
#include "cantor/rational.hpp"
#include "cantor/sets.hpp"

namespace {

using namespace cantor;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

Rational canonical(Rational x) {
    x.canonicalize();
    return x;
}

Outcome cover_expectation() {
    const auto t0 = std::chrono::steady_clock::now();
    const SpaceParams p(2, 0.5);
    bool ok = true;
    int pairs = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto e = random_trie(2, 3, derive_seed(101, t), 0.5);
        const auto f = random_trie(2, 3, derive_seed(202, t), 0.5);
        TruncatedGroupEnumerator en(p, 3);
        std::uint64_t total = 0;
        std::uint64_t n = 0;
        do {
            total += intersect_count(e, f, en.current(), 3);
            ++n;
        } while (en.next());
        const Rational mean = canonical(Rational(static_cast<unsigned long>(total), static_cast<unsigned long>(n)));
        const Rational expected =
            canonical(Rational(static_cast<unsigned long>(e.cover_count(3) * f.cover_count(3)), 8UL));
        ok = ok && n == 128 && mean == expected;
        ++pairs;
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 1.0, std::to_string(pairs) + " pairs, mean over 128 equals |U_3(E)||U_3(F)|/8 exactly: " +
                                  (ok ? "yes" : "no") + ", " + fmt(secs) + " s"};
}

Outcome martingale_exact() {
    const auto t0 = std::chrono::steady_clock::now();
    int passed = 0;
    int other = 0;
    for (int m : {2, 3}) {
        const auto report = run_oracle_suite(m, 3, 7, 20'000'000);
        for (const auto& c : report.checks) {
            if (c.name.rfind("martingale", 0) != 0) continue;
            if (c.status == OracleCheck::Status::kPass) {
                ++passed;
            } else {
                ++other;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {other == 0 && passed > 0 && secs < 10.0,
            std::to_string(passed) + " conditional identities exact, " + std::to_string(other) +
                " failed or skipped, m in {2,3}, l <= 3, " + fmt(secs) + " s"};
}

Outcome uniformity() {
    bool exact = true;
    for (int k = 1; k <= 3; ++k) {
        const std::uint64_t cells = std::uint64_t{1} << k;
        TruncatedGroupEnumerator en(SpaceParams(2, 0.5), k);
        std::vector<std::uint64_t> hits(cells * cells, 0);
        do {
            for (std::uint64_t i = 0; i < cells; ++i) {
                const auto image = apply_word(en.current(), word_from_index(i, k, 2));
                ++hits[i * cells + word_index(image, 2)];
            }
        } while (en.next());
        for (auto h : hits) {
            exact = exact && canonical(Rational(static_cast<unsigned long>(h), static_cast<unsigned long>(en.count()))) ==
                                 Rational(1, static_cast<unsigned long>(cells));
        }
    }
    const SpaceParams p(3, 1.0 / 3.0);
    const int n = 100000;
    std::vector<std::uint64_t> hits(81, 0);
    for (int t = 0; t < n; ++t) {
        const auto sigma = sample_automorphism(p, derive_seed(303, static_cast<std::uint64_t>(t)));
        for (std::uint64_t i = 0; i < 9; ++i) ++hits[i * 9 + word_index(sigma.apply(word_from_index(i, 2, 3)), 3)];
    }
    double worst = 0.0;
    for (auto h : hits) worst = std::max(worst, std::abs(static_cast<double>(h) / n - 1.0 / 9.0));
    return {exact && worst <= 0.005, std::string("exact uniformity at m=2, k<=3: ") + (exact ? "yes" : "no") +
                                         "; Monte Carlo m=3, k=2, 1e5 seeds, max |freq - 1/9| = " + fmt(worst)};
}

Outcome codimension() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kBoxdim;
    cfg.set_e = parse_set_spec("digits:1,2");
    cfg.set_f = parse_set_spec("digits:1,2");
    cfg.depth = 30;
    cfg.k_range = KRange{10, 30};
    cfg.trials = 200;
    cfg.base_seed = 1;
    const auto report = run_experiment(cfg);
    const double secs = seconds_since(t0);
    const double mean = report.summary["mean_slope"].get<double>();
    const double max = report.summary["max_slope"].get<double>();
    const bool ok = mean >= 0.21 && mean <= 0.31 && max >= 0.21 && secs < 30.0;
    return {ok, "mean slope " + fmt(mean) + " in [0.21, 0.31], max slope " + fmt(max) + " >= 0.21, predicted " +
                    fmt(report.summary["predicted"].get<double>()) + ", " + fmt(secs) + " s"};
}

Outcome empty_rate() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kEmptyRate;
    cfg.set_e = parse_set_spec("moran:t=0.4");
    cfg.set_f = parse_set_spec("moran:t=0.4");
    cfg.depth = 20;
    cfg.trials = 1000;
    cfg.base_seed = 1;
    const auto report = run_experiment(cfg);
    const double frac = report.summary["nonempty_fraction"].get<double>();
    return {frac <= 0.05, "nonempty fraction " + fmt(frac) + " <= 0.05"};
}

Outcome second_moment() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kMartingale;
    cfg.set_e = parse_set_spec("digits:1,2");
    cfg.set_f = parse_set_spec("digits:1,2");
    cfg.depth = 12;
    cfg.l_first = 4;
    cfg.trials = 10000;
    cfg.base_seed = 1;
    cfg.threads = resolve_threads(0);
    const auto report = run_experiment(cfg);
    double worst_ratio = 0.0;
    double worst_mean = 0.0;
    int rows = 0;
    for (const auto& row : report.summary["records"]) {
        worst_ratio = std::max(worst_ratio, row["bound_ratio"].get<double>());
        worst_mean = std::max(worst_mean, std::abs(row["mean"].get<double>() - 1.0));
        ++rows;
    }
    return {rows == 9 && worst_ratio <= 1.0 && worst_mean <= 0.02,
            std::to_string(rows) + " levels, max bound ratio " + fmt(worst_ratio) + " <= 1, max |mean - 1| " +
                fmt(worst_mean) + " <= 0.02"};
}

double pair_energy(const MassTrie<double>& mu, const SpaceParams& p, double s) {
    const auto leaves = mu.trie().leaves();
    std::vector<double> mass;
    for (const auto& w : leaves) mass.push_back(mu.mass_of(w));
    double sum = 0.0;
    for (std::size_t a = 0; a < leaves.size(); ++a) {
        for (std::size_t b = 0; b < leaves.size(); ++b) {
            if (a != b) sum += mass[a] * mass[b] * std::pow(metric_distance(leaves[a], leaves[b], p).value, -s);
        }
    }
    return sum;
}

Outcome energy_oracle() {
    std::mt19937_64 rng(404);
    double worst = 0.0;
    int tries = 0;
    for (int t = 0; t < 100; ++t) {
        const int m = 2 + static_cast<int>(rng() % 3);
        const int depth = 1 + static_cast<int>(rng() % 6);
        const SpaceParams p(m, 0.2 + 0.6 * static_cast<double>(rng() % 100) / 100.0);
        const auto support = random_trie(m, depth, rng(), 0.5);
        if (support.empty()) continue;
        std::vector<std::pair<Word, double>> leaves;
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (const auto& w : support.leaves()) leaves.emplace_back(w, u(rng));
        const auto mu = MassTrie<double>::from_leaf_masses(m, depth, leaves);
        const double s = 0.1 + static_cast<double>(rng() % 10) / 10.0;
        const double trie_value = energy(mu, p, s).value;
        const double pairs = pair_energy(mu, p, s);
        worst = std::max(worst, std::abs(trie_value - pairs) / std::max(1.0, std::abs(pairs)));
        ++tries;
    }
    const bool pairs_ok = worst <= 1e-9;

    const SpaceParams p(3, 1.0 / 3.0);
    const double q = std::pow(3.0, -0.5);
    const double closed = (2.0 / 3.0) / (1.0 - q);
    const double at20 = energy(natural_measure<double>(CylinderTrie::full(3, 20), p), p, 0.5).value;
    const double partial20 = closed * (1.0 - std::pow(q, 20.0));
    int reach = 20;
    while (reach < 64 && std::abs(energy(natural_measure<double>(CylinderTrie::full(3, reach), p), p, 0.5).value -
                                  closed) > 1e-6) {
        ++reach;
    }
    const double gap = std::abs(at20 - closed);
    return {pairs_ok && gap <= 1e-6,
            "pair-sum agreement on " + std::to_string(tries) + " tries, worst " + fmt(worst) +
                " <= 1e-9; depth-20 full energy " + fmt(at20) + " vs closed form " + fmt(closed) + ", gap " + fmt(gap) +
                " (1e-6 required; the truncated sum matches its own closed form " + fmt(partial20) + " to " +
                fmt(std::abs(at20 - partial20)) + "; first depth within 1e-6 is " + std::to_string(reach) + ")"};
}

Outcome premeasure_dp() {
    std::mt19937_64 rng(505);
    int tries = 0;
    bool ok = true;
    // Exhaustive cover enumeration, independent of the dynamic program.
    std::function<std::vector<std::vector<Word>>(const CylinderTrie&, const Word&, int)> covers =
        [&](const CylinderTrie& t, const Word& w, int j) {
            std::vector<std::vector<Word>> out;
            if (static_cast<int>(w.size()) >= j) out.push_back({w});
            if (static_cast<int>(w.size()) == t.depth()) return out;
            std::vector<std::vector<Word>> combos{{}};
            for (std::uint8_t d = 0; d < t.m(); ++d) {
                auto digits = w.digits();
                digits.push_back(d);
                const Word child(digits);
                if (!t.contains(child)) continue;
                const auto sub = covers(t, child, j);
                std::vector<std::vector<Word>> next;
                for (const auto& c : combos) {
                    for (const auto& s : sub) {
                        auto joined = c;
                        joined.insert(joined.end(), s.begin(), s.end());
                        next.push_back(std::move(joined));
                    }
                }
                combos = std::move(next);
            }
            out.insert(out.end(), combos.begin(), combos.end());
            return out;
        };
    while (tries < 100) {
        const int m = 2 + static_cast<int>(rng() % 2);
        const int depth = m == 2 ? 1 + static_cast<int>(rng() % 4) : 1 + static_cast<int>(rng() % 3);
        const auto t = random_trie(m, depth, rng(), 0.6);
        if (t.empty() || t.cover_count(depth) > 40) continue;
        const Rational q = canonical(Rational(static_cast<long>(1 + rng() % 9), 10));
        for (int j = 0; j <= depth; ++j) {
            std::optional<Rational> best;
            for (const auto& c : covers(t, Word{}, j)) {
                Rational sum = 0;
                for (const auto& w : c) {
                    Rational x = 1;
                    for (std::size_t i = 0; i < w.size(); ++i) x *= q;
                    sum += x;
                }
                if (!best || sum < *best) best = sum;
            }
            ok = ok && canonical(premeasure_value(t, q, j)) == canonical(*best);
        }
        ++tries;
    }
    bool full_one = true;
    for (int depth = 1; depth <= 40; ++depth) {
        const auto full = CylinderTrie::full(3, depth);
        for (int j = 0; j <= depth; ++j) full_one = full_one && premeasure_value(full, Rational(1, 3), j) == 1;
    }
    return {ok && full_one, "DP equals exhaustive minimum on " + std::to_string(tries) + " tries: " +
                                (ok ? "yes" : "no") + "; full space at s = ambient gives exactly 1 for depths 1..40, " +
                                "all j: " + (full_one ? "yes" : "no")};
}

Outcome example_tail() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::kExampleTail;
    cfg.set_e = parse_set_spec("union:alpha=0.5,imax=12");
    cfg.depth = 12;
    cfg.j_range = {6, 9};
    cfg.trials = 10000;
    cfg.base_seed = 1;
    const auto report = run_experiment(cfg);
    double worst = 0.0;
    int levels = 0;
    for (const auto& level : report.summary["levels"]) {
        worst = std::max(worst, level["probability"].get<double>() / level["bound"].get<double>());
        ++levels;
    }
    return {levels == 4 && worst <= 1.2,
            std::to_string(levels) + " levels j=6..9, max P / bound " + fmt(worst) + " <= 1.2"};
}

Outcome determinism(const fs::path& workdir) {
    fs::create_directories(workdir);
    const int many = std::max(2, resolve_threads(0));
    std::vector<ExperimentConfig> configs;
    auto base = [](ExperimentKind kind, const char* e, const char* f) {
        ExperimentConfig c;
        c.kind = kind;
        c.set_e = parse_set_spec(e);
        c.set_f = parse_set_spec(f);
        c.depth = 16;
        c.trials = 300;
        c.base_seed = 77;
        return c;
    };
    configs.push_back(base(ExperimentKind::kBoxdim, "digits:1,2", "digits:1,2"));
    configs.push_back(base(ExperimentKind::kEsssup, "digits:1,2", "digits:1,2"));
    configs.push_back(base(ExperimentKind::kEmptyRate, "moran:t=0.4", "moran:t=0.4"));
    auto mart = base(ExperimentKind::kMartingale, "digits:1,2", "digits:1,2");
    mart.depth = 10;
    configs.push_back(mart);
    auto en = base(ExperimentKind::kEnergy, "digits:1,2", "digits:1,2");
    en.depth = 10;
    en.s = 0.1;
    configs.push_back(en);
    auto tail = base(ExperimentKind::kExampleTail, "union:alpha=0.5,imax=12", "full");
    tail.depth = 12;
    configs.push_back(tail);
    auto pre = base(ExperimentKind::kPremeasure, "moran:t=0.6", "full");
    pre.s = 0.6;
    configs.push_back(pre);

    auto write = [&](ExperimentConfig cfg, int threads, OutputFormat format, const fs::path& path) {
        cfg.threads = threads;
        std::ofstream out(path, std::ios::binary);
        write_report(run_experiment(cfg), cfg, format, out);
    };
    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    int identical = 0;
    int total = 0;
    for (const auto& cfg : configs) {
        for (auto format : {OutputFormat::kCsv, OutputFormat::kJson}) {
            const std::string stem = std::string(kind_name(cfg.kind)) + (format == OutputFormat::kCsv ? ".csv" : ".json");
            const auto a = workdir / ("t1-" + stem);
            const auto b = workdir / ("tn-" + stem);
            const auto c = workdir / ("t1-rerun-" + stem);
            write(cfg, 1, format, a);
            write(cfg, many, format, b);
            write(cfg, 1, format, c);
            const auto sa = slurp(a);
            identical += !sa.empty() && sa == slurp(b) && sa == slurp(c);
            ++total;
        }
    }
    return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                    " output files byte-identical across reruns at 1 and " + std::to_string(many) +
                                    " threads"};
}

std::set<int> parse_list(const std::string& text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(std::stoi(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string only;
    std::string expect_red;
    std::string workdir = (fs::temp_directory_path() / "cantor_acceptance").string();
    app.add_option("--only", only, "comma-separated criteria to run");
    app.add_option("--expect-red", expect_red, "criteria known to fail; exit 0 iff exactly these fail");
    app.add_option("--workdir", workdir, "scratch directory for determinism outputs");
    CLI11_PARSE(app, argc, argv);

    const std::map<int, std::function<Outcome()>> criteria{
        {1, cover_expectation},
        {2, martingale_exact},
        {3, uniformity},
        {4, codimension},
        {5, empty_rate},
        {6, second_moment},
        {7, energy_oracle},
        {8, premeasure_dp},
        {9, example_tail},
        {10, [&] { return determinism(workdir); }},
    };
    const auto selected = parse_list(only);
    const auto red = parse_list(expect_red);
    std::set<int> failed;
    for (const auto& [id, run] : criteria) {
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) failed.insert(id);
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    }
    std::set<int> expected;
    for (int id : red) {
        if (selected.empty() || selected.count(id)) expected.insert(id);
    }
    if (!expected.empty()) {
        std::cout << "expected red:";
        for (int id : expected) std::cout << ' ' << id;
        std::cout << std::endl;
    }
    return failed == expected ? 0 : 1;
}
