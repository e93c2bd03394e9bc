#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cantor/box_dim.hpp"
#include "cantor/sets.hpp"
#include "cantor/space.hpp"

namespace cantor {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class ExperimentKind { kBoxdim, kPremeasure, kMartingale, kEnergy, kEsssup, kEmptyRate, kExampleTail };

const char* kind_name(ExperimentKind kind);
ExperimentKind parse_kind(std::string_view name);

// "a..b", inclusive.
KRange parse_k_range(std::string_view text);
std::string to_string(const KRange& range);

// Accepts a decimal ("0.5") or a fraction ("1/3").
double parse_real(std::string_view text);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::kBoxdim;
    SpaceParams space{3, 1.0 / 3.0};
    SetSpec set_e = FullSet{};
    SetSpec set_f = FullSet{};
    int depth = 20;
    std::optional<KRange> k_range;  // regression or level window; defaults per experiment
    std::uint64_t trials = 100;
    std::uint64_t base_seed = 1;
    int threads = 1;  // scheduling only; never affects output

    double s = 0.5;          // premeasure, energy
    std::string cylinder;    // A for martingale, 1-based; empty is the root
    int l_first = 0;         // martingale: first level reported
    std::optional<int> component;  // example-tail: index i of E_i
    KRange j_range{6, 9};    // example-tail
    double epsilon = 0.05;   // esssup
    bool exact = false;      // premeasure in rational arithmetic
};

// Canonical JSON of every field that affects output (threads excluded).
nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct TrialRecord {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    bool nonempty = false;
    std::vector<std::uint64_t> counts;  // levels 0..depth; empty when not computed
    DimensionEstimate estimate;
};

// Per-trial rows for CSV, summary for JSON.
struct ExperimentReport {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json summary = nlohmann::json::object();
    bool ok = true;  // false when a checked identity failed
};

ExperimentReport run_codimension_experiment(const ExperimentConfig& cfg);
ExperimentReport run_esssup_experiment(const ExperimentConfig& cfg);
ExperimentReport run_empty_rate_experiment(const ExperimentConfig& cfg);
ExperimentReport run_example_tail_experiment(const ExperimentConfig& cfg);
ExperimentReport run_martingale_experiment(const ExperimentConfig& cfg);
ExperimentReport run_energy_experiment(const ExperimentConfig& cfg);
ExperimentReport run_premeasure_experiment(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class OutputFormat { kCsv, kJson };
OutputFormat parse_format(std::string_view name);

// CSV: "# version=... config_hash=..." then header and rows.
// JSON: {version, config_hash, config, summary}.
void write_report(const ExperimentReport& report, const ExperimentConfig& cfg, OutputFormat format, std::ostream& out);

struct OracleCheck {
    std::string name;
    enum class Status { kPass, kFail, kSkipped } status = Status::kPass;
    std::string detail;
};

struct OracleReport {
    int m = 2;
    int depth = 0;
    std::vector<OracleCheck> checks;
    bool ok() const;
};

// Exact enumeration identities over the truncated group at (m, depth), in
// integer and rational arithmetic: group order, uniformity of sigma(I), the
// cover expectation m^{-k}|U_k(E)||U_k(F)| for random pairs, and the
// conditional martingale identity for random integer masses. Checks whose
// enumeration would exceed `cap` are skipped with the required count.
OracleReport run_oracle_suite(int m, int depth, std::uint64_t seed, std::uint64_t cap);

nlohmann::json to_json(const OracleReport& report);

}  // namespace cantor
