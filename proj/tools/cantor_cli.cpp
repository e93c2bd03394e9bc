// Command-line front end. Exit codes: 0 success, 1 validation error or
// refusal, 2 failed identity.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>

#include "cantor/automorphism.hpp"
#include "cantor/experiments.hpp"
#include "cantor/sets.hpp"

namespace {

using namespace cantor;

struct CommonFlags {
    std::string m;
    std::string r;
    std::string set_e;
    std::string set_f;
    std::string depth;
    std::string k_range;
    std::string trials;
    std::string seed;
    std::string s;
    std::string cylinder;
    std::string l_first;
    std::string component;
    std::string j_range;
    std::string epsilon;
    std::string config;
    std::string out;
    std::string format = "json";
    int threads = 1;
    bool exact = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--m", f.m, "alphabet size");
    app->add_option("--r", f.r, "metric scale, decimal or fraction");
    app->add_option("--set-e", f.set_e, "set spec for E");
    app->add_option("--set-f", f.set_f, "set spec for F");
    app->add_option("--depth", f.depth, "trie depth");
    app->add_option("--k-range", f.k_range, "level window a..b");
    app->add_option("--trials", f.trials, "number of trials");
    app->add_option("--seed", f.seed, "base seed");
    app->add_option("--s", f.s, "exponent s");
    app->add_option("--cylinder", f.cylinder, "cylinder A (1-based, ROOT for the root)");
    app->add_option("--l-first", f.l_first, "first martingale level reported");
    app->add_option("--component", f.component, "union component index i");
    app->add_option("--j-range", f.j_range, "tail levels a..b");
    app->add_option("--epsilon", f.epsilon, "esssup tolerance");
    app->add_option("--config", f.config, "JSON config file; flags override it");
    app->add_option("--out", f.out, "output path (stdout if absent)");
    app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    app->add_flag("--exact", f.exact, "rational arithmetic where supported");
}

ExperimentConfig build_config(ExperimentKind kind, const CommonFlags& f) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw std::invalid_argument("cannot open config " + f.config);
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config " + f.config + ": " + e.what());
        }
        if (j.contains("experiment") && j["experiment"] != kind_name(kind)) {
            throw std::invalid_argument("config is for experiment " + j["experiment"].dump());
        }
    }
    j["experiment"] = kind_name(kind);
    auto set_int = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = std::stoll(v);
    };
    auto set_uint = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = std::stoull(v);
    };
    auto set_str = [&](const char* key, const std::string& v) {
        if (!v.empty()) j[key] = v;
    };
    set_int("m", f.m);
    set_str("r", f.r);
    set_str("set_e", f.set_e);
    set_str("set_f", f.set_f);
    set_int("depth", f.depth);
    set_str("k_range", f.k_range);
    set_uint("trials", f.trials);
    set_uint("seed", f.seed);
    set_str("s", f.s);
    set_str("cylinder", f.cylinder);
    set_int("l_first", f.l_first);
    set_int("component", f.component);
    set_str("j_range", f.j_range);
    if (!f.epsilon.empty()) j["epsilon"] = parse_real(f.epsilon);
    if (f.exact) j["exact"] = true;
    ExperimentConfig cfg = config_from_json(j);
    cfg.threads = f.threads;
    return cfg;
}

// Writes through a temporary buffer so a failed run leaves no partial file.
void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random isometries of Cantor space: covers, martingales, energy and dimension experiments"};
    app.require_subcommand(1);

    struct Experiment {
        ExperimentKind kind;
        const char* description;
    };
    const Experiment experiments[] = {
        {ExperimentKind::kBoxdim, "box-dimension slopes of E ∩ sigma(F) over random isometries"},
        {ExperimentKind::kPremeasure, "interval premeasure of E by dynamic programming"},
        {ExperimentKind::kMartingale, "second moments of the intersection martingale"},
        {ExperimentKind::kEnergy, "mean energy terms of the intersection measure"},
        {ExperimentKind::kEsssup, "maximum slope over trials against the predicted dimension"},
        {ExperimentKind::kEmptyRate, "fraction of trials with a nonempty intersection"},
        {ExperimentKind::kExampleTail, "hit probabilities of a union component against its tail bound"},
    };
    std::vector<std::unique_ptr<CommonFlags>> flags;
    std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
    for (const auto& e : experiments) {
        auto* sub = app.add_subcommand(kind_name(e.kind), e.description);
        flags.push_back(std::make_unique<CommonFlags>());
        add_common(sub, *flags.back());
        subs.emplace_back(sub, e.kind);
    }

    int oracle_m = 2;
    int oracle_depth = 3;
    std::uint64_t oracle_seed = 1;
    std::uint64_t oracle_cap = TruncatedGroupEnumerator::kDefaultCap;
    std::string oracle_out;
    std::string oracle_format = "json";
    auto* oracle = app.add_subcommand("oracle", "exact enumeration identities over the truncated group");
    oracle->add_option("--m", oracle_m, "alphabet size");
    oracle->add_option("--depth", oracle_depth, "truncation depth");
    oracle->add_option("--seed", oracle_seed, "seed for the random sets and measures");
    oracle->add_option("--cap", oracle_cap, "largest enumeration attempted");
    oracle->add_option("--out", oracle_out, "output path (stdout if absent)");
    oracle->add_option("--format", oracle_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    int aut_m = 3;
    double aut_r = 1.0 / 3.0;
    std::uint64_t aut_seed = 1;
    int aut_depth = 2;
    std::string aut_word;
    std::string aut_out;
    auto* sample = app.add_subcommand("sample-aut", "tabulate a seeded automorphism or apply it to a word");
    sample->add_option("--m", aut_m, "alphabet size");
    sample->add_option("--r", aut_r, "metric scale");
    sample->add_option("--seed", aut_seed, "automorphism seed");
    sample->add_option("--depth", aut_depth, "levels to tabulate");
    sample->add_option("--word", aut_word, "print the image and preimage of this word instead");
    sample->add_option("--out", aut_out, "output path (stdout if absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i].first->parsed()) continue;
            const auto cfg = build_config(subs[i].second, *flags[i]);
            const auto report = run_experiment(cfg);
            std::ostringstream text;
            write_report(report, cfg, parse_format(flags[i]->format), text);
            emit(text.str(), flags[i]->out);
            return report.ok ? 0 : 2;
        }
        if (oracle->parsed()) {
            const auto report = run_oracle_suite(oracle_m, oracle_depth, oracle_seed, oracle_cap);
            std::ostringstream text;
            if (oracle_format == "json") {
                text << to_json(report).dump(2) << '\n';
            } else {
                text << "name,status,detail\n";
                for (const auto& c : report.checks) {
                    const char* status = c.status == OracleCheck::Status::kPass   ? "pass"
                                         : c.status == OracleCheck::Status::kFail ? "fail"
                                                                                  : "skipped";
                    text << '"' << c.name << "\"," << status << ",\"" << c.detail << "\"\n";
                }
            }
            emit(text.str(), oracle_out);
            return report.ok() ? 0 : 2;
        }
        if (sample->parsed()) {
            const SpaceParams p(aut_m, aut_r);
            const auto sigma = sample_automorphism(p, aut_seed);
            std::ostringstream text;
            if (!aut_word.empty()) {
                const Word w = Word::parse(aut_word, aut_m);
                text << "word=" << w.to_string() << " image=" << sigma.apply(w).to_string()
                     << " preimage=" << sigma.apply_inverse(w).to_string() << '\n';
            } else {
                if (aut_depth < 0 || aut_depth > ExplicitAutomorphism::kDefaultDepthLimit) {
                    throw std::invalid_argument("sample-aut: depth must lie in 0.." +
                                                std::to_string(ExplicitAutomorphism::kDefaultDepthLimit));
                }
                ExplicitAutomorphism::tabulate(LazyAutomorphism(aut_m, aut_seed), aut_depth).write(text);
            }
            emit(text.str(), aut_out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
