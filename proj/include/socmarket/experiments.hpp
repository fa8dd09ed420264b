#pragma once

// End-to-end experiment commands behind the command-line tool. Each command
// works either on live simulations described by an ExperimentConfig or on
// run records written earlier by cmd_run, writes its outputs into the
// configured output directory and returns the computed values.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "socmarket/analysis.hpp"
#include "socmarket/config.hpp"
#include "socmarket/topology.hpp"

namespace socmarket {

inline constexpr const char* kVersion = "1.0.0";

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<EngineKind> engine;
  std::optional<double> f0;
  std::optional<double> f0_quantile;
  std::optional<std::uint32_t> workers;
  // Recorded runs (files, or directories holding run_seed*.txt) to analyze
  // instead of simulating.
  std::vector<std::filesystem::path> records;
  bool resume = false;
};

// Folds command-line overrides into the config and revalidates it.
void apply_overrides(ExperimentConfig& cfg, const CommandOptions& opts);

// Reads a config from an INI file or from any JSON output of this tool
// (which embeds the config text).
ExperimentConfig load_config_or_manifest(const std::filesystem::path& path);

std::vector<std::uint64_t> ensemble_seeds(const ExperimentConfig& cfg);

struct BuiltSystem {
  TradeNetwork net;
  ExpenditureMatrix wts;
};

// Network and weights for one seed. Random pieces draw from the topology and
// weights streams of that seed.
BuiltSystem build_system(const ExperimentConfig& cfg, std::uint64_t seed);

enum class ThresholdMode { absolute, quantile, fallback_quantile };
std::string_view to_string(ThresholdMode m) noexcept;

struct ThresholdChoice {
  double f0 = 0.0;
  ThresholdMode mode = ThresholdMode::absolute;
  std::optional<double> quantile;
  // Pilot diagnostics; zero when no pilot ran. Mean activity is at the
  // chosen f0 (estimated from the sampled profits for quantile modes);
  // events counts avalanches under the absolute f0.
  double pilot_mean_activity = 0.0;
  std::size_t pilot_events = 0;
};

// Resolves the activity threshold for one seed. Quantile thresholds come
// from a pilot run over the first transient + pilot_steps steps of the
// same seed, sampling every agent's rescaled profit each pilot_stride steps.
// An absolute f0 is kept unless the pilot shows degenerate activity (fewer
// than 100 avalanches, or fewer than 3 populated log bins inside the size
// fit range) and fallback is enabled.
ThresholdChoice resolve_threshold(const ExperimentConfig& cfg, const BuiltSystem& sys,
                                  std::uint64_t seed);

// One simulated or loaded run, ready for analysis.
struct RunSource {
  std::uint64_t seed = 0;
  RunRecord record;
  std::optional<ThresholdChoice> threshold;
  NetworkKind kind = NetworkKind::ring;
  Coord extents;
  std::size_t n_agents = 0;
  double eta_max = 0.0;
  std::string source;  // record path, or "live"
};

struct RunResult {
  std::vector<std::uint64_t> seeds;
  std::vector<ThresholdChoice> thresholds;
  std::vector<std::filesystem::path> files;
};

struct WalkResult {
  DistanceMetric primary_metric = DistanceMetric::norm;
  JumpStats primary;
  DistanceMetric alternate_metric = DistanceMetric::component;
  JumpStats alternate;  // same mode, other metric
  bool fitted = true;   // false for networks without spatial structure
  std::vector<std::string> warnings;
};

struct AvalancheResult {
  std::vector<AvalancheEvent> events;
  std::optional<BinnedDistribution> size_dist;
  std::optional<BinnedDistribution> duration_dist;
  std::optional<PowerLawFit> size_fit;
  std::optional<PowerLawFit> duration_fit;
  std::optional<GammaFit> gamma;
  std::optional<ScalingCheck> scaling;
  double duration_fit_min = 0.0;
  double duration_fit_max = 0.0;
  std::vector<ThresholdChoice> thresholds;
  std::vector<std::string> warnings;
};

struct DecayResult {
  std::vector<double> fitted_k;  // per run
  double mean_fitted_k = 0.0;
  double predicted_k = 0.0;
  double ratio = 0.0;
  std::vector<std::string> warnings;
};

// Commands take the config with overrides already applied; from opts they
// read only `records` and `resume`.
RunResult cmd_run(const ExperimentConfig& cfg, const CommandOptions& opts);
WalkResult cmd_walk_stats(const ExperimentConfig& cfg, const CommandOptions& opts);
AvalancheResult cmd_avalanche_stats(const ExperimentConfig& cfg, const CommandOptions& opts);
DecayResult cmd_decay_check(const ExperimentConfig& cfg, const CommandOptions& opts);

// Lower-level pieces shared with the acceptance checks.
std::vector<RunSource> simulate_ensemble(const ExperimentConfig& cfg, bool with_activity);
std::vector<RunSource> load_records(const std::vector<std::filesystem::path>& paths);
AvalancheResult analyze_avalanches(const ExperimentConfig& cfg, const std::vector<RunSource>& runs);
WalkResult analyze_walk(const ExperimentConfig& cfg, const std::vector<RunSource>& runs);
DecayResult analyze_decay(const ExperimentConfig& cfg, const std::vector<RunSource>& runs);

}  // namespace socmarket
