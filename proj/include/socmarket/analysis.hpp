#pragma once

// Observables extracted from run records: rescaled profits, profit decay
// rate, activity signal and avalanches, log-binned distributions with
// power-law fits, loser-jump statistics and the size/duration scaling
// relation.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "socmarket/dynamics.hpp"
#include "socmarket/topology.hpp"

namespace socmarket {

// ---- profit rescaling and decay --------------------------------------------

// s(t) / mean_price(t), element-wise over aligned series.
std::vector<double> rescale_profits(std::span<const double> profits,
                                    std::span<const double> mean_price);

// Per-step full profit vectors divided by that step's mean price.
std::vector<std::vector<double>> rescale_profits(const std::vector<std::vector<double>>& profits,
                                                 std::span<const double> mean_price);

// Detrends by a fitted exp(-k t) instead of the mean price:
// s(t) * exp(k t) / scale.
std::vector<double> detrend_exponential(std::span<const double> series, double k, double scale);

// Least-squares decay rate of |series| over [begin, end). The series is first
// averaged over consecutive blocks of `smoothing` steps; the smoothed values
// must share one strict sign. Returns k in series ~ exp(-k t).
double fit_decay_rate(std::span<const double> series, std::size_t begin, std::size_t end,
                      std::size_t smoothing = 1);

enum class DecaySource { mean_price, min_profit };

// Decay rate of a recorded run over its post-transient window. mean_price
// uses the renormalization-corrected mean price; min_profit uses the
// smoothed envelope of the raw minimum profit.
double fit_decay_rate(const RunRecord& record, DecaySource source, std::size_t smoothing = 1000);

// k = <eta> / (N (1 - <eta>)).
double predicted_decay_rate(double mean_eta, std::size_t n_agents);

// ---- activity and avalanches -----------------------------------------------

// y(t) = #{i : rescaled[t][i] < f0}.
std::vector<std::uint32_t> activity_signal(const std::vector<std::vector<double>>& rescaled,
                                           double f0);

struct AvalancheEvent {
  std::uint64_t size = 0;      // S, summed activity
  std::uint64_t duration = 0;  // T, number of active steps

  friend bool operator==(const AvalancheEvent&, const AvalancheEvent&) = default;
};

// Maximal runs of nonzero activity bounded by zeros on both sides. Runs
// touching either end of the signal are discarded.
std::vector<AvalancheEvent> extract_avalanches(std::span<const std::uint32_t> y);

// Activity in the discarded leading/trailing runs.
std::uint64_t boundary_activity(std::span<const std::uint32_t> y);

// ---- distributions and fits --------------------------------------------------

// Log bins [2^r, 2^(r+1) - 1], r = 0, 1, ...; representative (lo + hi) / 2;
// density = count / (total * width). Empty interior bins are kept.
struct BinnedDistribution {
  std::vector<std::uint64_t> bin_lo;
  std::vector<std::uint64_t> bin_hi;
  std::vector<double> representative_x;
  std::vector<double> density;
  std::vector<std::uint64_t> count;
  std::uint64_t total = 0;

  std::size_t size() const noexcept { return density.size(); }
  double width(std::size_t k) const { return static_cast<double>(bin_hi[k] - bin_lo[k] + 1); }
};

BinnedDistribution log_bin(std::span<const std::uint64_t> values);

struct PowerLawFit {
  double exponent = 0.0;  // tau in P(x) ~ x^-tau
  double std_error = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t points = 0;
  double r_squared = 0.0;
};

// Least squares on (log x, log density) over bins whose representative lies
// in [x_min, x_max] and whose density is positive.
PowerLawFit fit_power_law(const BinnedDistribution& dist, double x_min, double x_max,
                          std::size_t min_bins = 3);

// Same fit over raw (x, y) points with positive coordinates.
PowerLawFit fit_power_law_points(std::span<const double> x, std::span<const double> y,
                                 double x_min, double x_max, std::size_t min_points = 3);

// Discrete maximum-likelihood estimate for x >= x_min (continuous
// approximation with the half-integer shift).
PowerLawFit fit_power_law_mle(std::span<const std::uint64_t> values, std::uint64_t x_min);

// ---- loser walk --------------------------------------------------------------

struct JumpFitOptions {
  DistanceMode mode = DistanceMode::raw;
  DistanceMetric metric = DistanceMetric::norm;
  bool fit = true;  // off for networks without spatial structure
};

struct JumpStats {
  std::vector<double> distances;
  // Empirical F(xi) = fraction of jumps with distance <= xi, at each distinct xi.
  std::vector<std::pair<double, double>> cumulative;
  // Density of xi on [1, L/2] and of |L - xi| for xi > L/2, binned on
  // [2^r, 2^(r+1)) with representative 1.5 * 2^r.
  std::vector<std::pair<double, double>> near_density;
  std::vector<std::pair<double, double>> far_density;
  std::optional<PowerLawFit> near;  // pi_1
  std::optional<PowerLawFit> far;   // pi_2
  bool low_statistics = false;      // fewer than 1000 jumps
};

JumpStats loser_jump_stats(std::span<const Coord> positions, const Coord& extents,
                           const JumpFitOptions& options = {});

// Distances between consecutive positions.
std::vector<double> jump_distances(std::span<const Coord> positions, const Coord& extents,
                                   DistanceMode mode, DistanceMetric metric);

// Same statistics over an already computed (possibly pooled) distance list.
JumpStats jump_stats_from_distances(std::vector<double> distances, const Coord& extents,
                                    const JumpFitOptions& options = {});

// ---- size / duration scaling -----------------------------------------------

struct GammaFit {
  double gamma = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

// Groups events by exact duration (groups with at least `min_per_duration`
// events), fits log <S> against log T. Needs >= 1000 events.
GammaFit gamma_st(std::span<const AvalancheEvent> events, std::size_t min_per_duration = 10);

struct ScalingCheck {
  double residual = 0.0;  // |tau_S - 1 - (tau_T - 1) / gamma|
  double combined_stderr = 0.0;
};

ScalingCheck scaling_relation(const PowerLawFit& size_fit, const PowerLawFit& duration_fit,
                              const GammaFit& gamma);

// ---- misc ----------------------------------------------------------------------

// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace socmarket
