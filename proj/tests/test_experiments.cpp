#include <doctest.h>

#include <sstream>

#include "cantor/automorphism.hpp"
#include "cantor/experiments.hpp"
#include "cantor/measures.hpp"

using namespace cantor;

namespace {

ExperimentConfig small_config(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.set_e = parse_set_spec("digits:1,2");
    cfg.set_f = parse_set_spec("digits:1,2");
    cfg.depth = 10;
    cfg.trials = 64;
    cfg.base_seed = 9;
    switch (kind) {
        case ExperimentKind::kEmptyRate:
            cfg.set_e = parse_set_spec("moran:t=0.4");
            cfg.set_f = parse_set_spec("moran:t=0.4");
            break;
        case ExperimentKind::kExampleTail:
            cfg.set_e = parse_set_spec("union:alpha=0.5,imax=8");
            cfg.j_range = {4, 7};
            break;
        case ExperimentKind::kPremeasure:
            cfg.set_e = parse_set_spec("moran:t=0.6");
            cfg.s = 0.6;
            break;
        case ExperimentKind::kEnergy:
            cfg.s = 0.1;
            break;
        default:
            break;
    }
    return cfg;
}

std::string render(const ExperimentConfig& cfg, OutputFormat format) {
    std::ostringstream out;
    write_report(run_experiment(cfg), cfg, format, out);
    return out.str();
}

}  // namespace

TEST_SUITE("experiments") {
    TEST_CASE("parsing helpers") {
        const auto r = parse_k_range("3..7");
        CHECK(r.first == 3);
        CHECK(r.last == 7);
        CHECK(to_string(r) == "3..7");
        CHECK_THROWS_AS(parse_k_range("7..3"), std::invalid_argument);
        CHECK_THROWS_AS(parse_k_range("x"), std::invalid_argument);
        CHECK(parse_real("1/3") == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(parse_real("0.5") == 0.5);
        CHECK_THROWS_AS(parse_real("1/0"), std::invalid_argument);
        CHECK_THROWS_AS(parse_real("abc"), std::invalid_argument);
        for (auto kind : {ExperimentKind::kBoxdim, ExperimentKind::kPremeasure, ExperimentKind::kMartingale,
                          ExperimentKind::kEnergy, ExperimentKind::kEsssup, ExperimentKind::kEmptyRate,
                          ExperimentKind::kExampleTail}) {
            CHECK(parse_kind(kind_name(kind)) == kind);
        }
        CHECK_THROWS_AS(parse_kind("nonsense"), std::invalid_argument);
        CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
    }

    TEST_CASE("config round trip and hash") {
        auto cfg = small_config(ExperimentKind::kMartingale);
        cfg.cylinder = "12";
        cfg.k_range = KRange{2, 8};
        const auto j = config_to_json(cfg);
        const auto back = config_from_json(j);
        CHECK(config_to_json(back) == j);
        CHECK(config_hash(back) == config_hash(cfg));
        CHECK(config_hash(cfg).size() == 16);
        auto threaded = cfg;
        threaded.threads = 8;
        CHECK(config_hash(threaded) == config_hash(cfg));
        auto other = cfg;
        other.base_seed = 10;
        CHECK(config_hash(other) != config_hash(cfg));
        auto with_comment = j;
        with_comment["comment"] = "annotated";
        CHECK(config_hash(config_from_json(with_comment)) == config_hash(cfg));
        auto unknown = j;
        unknown["sead"] = 3;
        CHECK_THROWS_AS(config_from_json(unknown), std::invalid_argument);
    }

    TEST_CASE("output does not depend on the thread count") {
        for (auto kind : {ExperimentKind::kBoxdim, ExperimentKind::kMartingale, ExperimentKind::kEnergy,
                          ExperimentKind::kEsssup, ExperimentKind::kEmptyRate, ExperimentKind::kExampleTail,
                          ExperimentKind::kPremeasure}) {
            CAPTURE(kind_name(kind));
            auto one = small_config(kind);
            auto many = one;
            many.threads = 4;
            for (auto format : {OutputFormat::kCsv, OutputFormat::kJson}) {
                REQUIRE(render(one, format) == render(many, format));
            }
        }
    }

    TEST_CASE("report headers carry version and hash") {
        const auto cfg = small_config(ExperimentKind::kBoxdim);
        const auto csv = render(cfg, OutputFormat::kCsv);
        CHECK(csv.rfind("# version=" + std::string(kArtifactVersion) + " config_hash=" + config_hash(cfg), 0) == 0);
        const auto json = nlohmann::json::parse(render(cfg, OutputFormat::kJson));
        CHECK(json["version"] == kArtifactVersion);
        CHECK(json["config_hash"] == config_hash(cfg));
        CHECK(config_hash(config_from_json(json["config"])) == config_hash(cfg));
    }

    TEST_CASE("example tail stays under its bound") {
        auto cfg = small_config(ExperimentKind::kExampleTail);
        cfg.trials = 2000;
        const auto report = run_experiment(cfg);
        REQUIRE(report.summary.contains("levels"));
        for (const auto& level : report.summary["levels"]) CHECK(level["ratio"].get<double>() <= 1.0);
    }

    TEST_CASE("exact premeasure needs the ambient exponent") {
        auto cfg = small_config(ExperimentKind::kPremeasure);
        cfg.exact = true;
        CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
        cfg.s = 1.0;
        CHECK_NOTHROW(run_experiment(cfg));
    }

    TEST_CASE("martingale refuses a subcritical pair") {
        auto cfg = small_config(ExperimentKind::kMartingale);
        cfg.set_e = parse_set_spec("moran:t=0.4");
        cfg.set_f = parse_set_spec("moran:t=0.4");
        CHECK_THROWS_AS(run_experiment(cfg), HypothesisError);
    }

    TEST_CASE("oracle suite at small sizes") {
        for (auto [m, depth] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 2}}) {
            const auto report = run_oracle_suite(m, depth, 5, TruncatedGroupEnumerator::kDefaultCap);
            CAPTURE(m);
            CAPTURE(depth);
            CHECK(report.ok());
            int passed = 0;
            for (const auto& c : report.checks) passed += c.status == OracleCheck::Status::kPass;
            CHECK(passed > 0);
        }
    }
}
