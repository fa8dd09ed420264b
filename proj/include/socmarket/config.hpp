#pragma once

// Experiment configuration: an INI-style file with sections
//
//   [topology]   kind, corner, n_agents, side, alpha
//   [weights]    scheme, split
//   [simulation] price_floor, eta_max, total_steps, transient_steps, seed,
//                renorm_threshold, engine, audit_interval, checkpoint_interval
//   [analysis]   f0, f0_quantile, f0_mean_active, f0_fallback, pilot_steps,
//                pilot_stride, size_fit_min, size_fit_max, duration_fit,
//                duration_fit_min, duration_fit_max, min_per_duration,
//                distance_mode, distance_metric, decay_source, decay_smoothing
//   [ensemble]   runs, workers
//   [output]     dir, write_records
//
// Every key is optional; omitted keys keep the defaults below. Unknown keys
// are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "socmarket/analysis.hpp"
#include "socmarket/dynamics.hpp"
#include "socmarket/engine.hpp"
#include "socmarket/topology.hpp"

namespace socmarket {

struct TopologySpec {
  NetworkKind kind = NetworkKind::ring;
  Corner corner = Corner::RT;
  std::size_t n_agents = 100;  // ring and er_embedded
  std::int32_t side = 32;      // lattices
  double alpha = 0.05;         // er_embedded edge probability

  std::size_t agent_count() const;
};

struct WeightSpec {
  WeightScheme scheme = WeightScheme::fixed_split;
  double split = 0.5;
};

enum class DurationFitRange { matched, explicit_range };

struct AnalysisSpec {
  // Threshold on profit / mean price. Resolution order: f0, then
  // f0_quantile, then the quantile f0_mean_active / N.
  std::optional<double> f0;
  std::optional<double> f0_quantile;
  double f0_mean_active = 3.5;
  // With an absolute f0, switch to the quantile rule if the pilot shows
  // degenerate activity.
  bool f0_fallback = true;
  std::uint64_t pilot_steps = 200'000;  // post-transient steps of the pilot prefix
  std::uint64_t pilot_stride = 100;

  double size_fit_min = 10.0;
  double size_fit_max = 1000.0;
  // matched: duration range is the size range mapped through S ~ T^gamma.
  DurationFitRange duration_fit = DurationFitRange::matched;
  double duration_fit_min = 10.0;
  double duration_fit_max = 1000.0;
  std::size_t min_per_duration = 10;

  DistanceMode distance_mode = DistanceMode::raw;
  DistanceMetric distance_metric = DistanceMetric::norm;

  DecaySource decay_source = DecaySource::mean_price;
  std::size_t decay_smoothing = 1000;
};

struct EnsembleSpec {
  std::uint32_t runs = 1;
  std::uint32_t workers = 1;
};

struct OutputSpec {
  std::filesystem::path dir = "out";
  bool write_records = true;
};

struct ExperimentConfig {
  TopologySpec topology;
  WeightSpec weights;
  SimConfig sim;
  EngineKind engine = EngineKind::incremental;
  std::uint64_t audit_interval = 0;
  std::uint64_t checkpoint_interval = 100'000;
  AnalysisSpec analysis;
  EnsembleSpec ensemble;
  OutputSpec output;

  // Throws ConfigError naming the offending field as "section.key".
  void validate() const;

  // Full config in the file format, keys in a fixed order.
  std::string to_text() const;
  // The result-determining part of to_text(): everything except [output]
  // and ensemble.workers.
  std::string canonical_text() const;
  // SHA-256 (hex) of canonical_text().
  std::string hash() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view to_string(DurationFitRange r) noexcept;
std::string_view to_string(DecaySource s) noexcept;

}  // namespace socmarket
