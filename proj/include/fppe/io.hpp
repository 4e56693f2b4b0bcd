#pragma once

/*
 * Experiment configuration (JSON), orchestration of the five
 * subcommands (constants, classify, ground-state, simulate, verify),
 * and bit-stable emission of trajectories (CSV / JSONL) and summaries.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fppe/classify.hpp"
#include "fppe/evolution.hpp"
#include "fppe/stationary.hpp"

namespace fppe {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct InitialData {
    // exactly one of the two variants is active
    std::optional<double> ground_state_scaled;          // u0 = mu * phi0
    std::vector<std::pair<int, double>> modes;          // (1-based index, coefficient)
};

struct OutputConfig {
    std::string dir = ".";
    std::vector<std::string> formats = {"csv"};
};

struct ExperimentConfig {
    DomainSpec domain{};
    InitialData initial_data{};
    EvolutionConfig evolution{};
    OutputConfig output{};
    std::uint64_t seed = 42;

    void validate() const;
};

/// Parses and validates a JSON config; unknown keys and invariant
/// violations raise ConfigError naming the offending key or invariant.
ExperimentConfig parse_config(const std::string& text);

/// Builds u0 from the config (solves the ground state when needed).
SpectralField realize_initial_data(const ExperimentConfig& cfg, const QuadratureRule& rule);

struct RunSummary {
    std::string subcommand;
    std::string config_echo;  // canonical JSON of the effective config
    std::optional<WellConstants> constants;
    std::optional<ClassificationReport> report;
    std::optional<GroundState> ground;
    std::optional<Outcome> outcome;
    std::optional<double> T_star;
    std::optional<double> max_energy_residual;
    double wall_seconds = 0.0;  // reported on stderr, never serialized
    int n_modes = 0;
    std::vector<std::string> emitted_files;
};

/// Deterministic serialization (wall time excluded).
std::string summary_to_json(const RunSummary& summary);

void emit_trajectory_csv(const TrajectoryRecord& record, const std::string& path);
void emit_trajectory_jsonl(const TrajectoryRecord& record, const std::string& path);

/// name in {constants, classify, ground-state, simulate, verify}.
/// Writes result documents under out_dir and streams progress to log.
/// Returns the process exit code (0 ok, 4 verification failure).
int run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                   const std::string& out_dir, std::ostream& log, RunSummary* summary_out = nullptr);

}  // namespace fppe
