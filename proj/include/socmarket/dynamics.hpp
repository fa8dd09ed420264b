#pragma once

// Extremal price dynamics: each trading day the market is evaluated, the
// agent with the least profit is found, and that agent cuts its price by a
// random fraction eta drawn uniformly from [0, eta_max).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "socmarket/engine.hpp"
#include "socmarket/market.hpp"
#include "socmarket/random.hpp"
#include "socmarket/topology.hpp"

namespace socmarket {

struct SimConfig {
  double price_floor = 10.0;  // initial prices uniform on [floor, floor + 1]
  double eta_max = 0.01;
  std::uint64_t total_steps = 1'000'000;
  std::uint64_t transient_steps = 100'000;
  std::uint64_t seed = 1;
  // Prices are divided by their mean once the mean drops below this
  // fraction of its initial (or last renormalized) level. Profits are homogeneous of degree one in
  // prices, so this only guards against underflow.
  double renorm_threshold = 1e-6;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

PriceVector init_prices(const SimConfig& config, std::size_t n_agents, Rng& rng);

// Lowest index of the minimum profit.
AgentId find_loser(std::span<const double> profits);

// Cuts the loser's price in place by a fresh eta and returns that eta.
double apply_price_cut(PriceVector& prices, AgentId loser, double eta_max, Rng& rng);

struct StepRecord {
  std::uint64_t t = 0;
  AgentId loser = 0;
  Coord position;
  double min_profit = 0.0;
  double mean_price = 0.0;  // after any renormalization at this step
  bool renormalized = false;
  // Cumulative log of renormalization divisors: true mean price is
  // mean_price * exp(log_price_scale).
  double log_price_scale = 0.0;
  std::optional<std::uint32_t> activity;
  double eta = 0.0;
};

// Per-step series of a run. Index t is the trading day.
struct RunRecord {
  std::uint64_t transient = 0;
  std::uint8_t position_dim = 1;
  std::vector<AgentId> loser_index;
  std::vector<Coord> loser_position;
  std::vector<double> min_profit;
  std::vector<double> mean_price;
  std::vector<std::uint8_t> renorm_flag;
  std::vector<double> log_price_scale;
  std::optional<double> activity_threshold;
  std::vector<std::uint32_t> activity;  // empty unless a threshold was set
  std::vector<std::vector<double>> profits_stream;  // empty unless requested

  std::size_t size() const noexcept { return loser_index.size(); }
  void append(const StepRecord& step);

  template <typename T>
  static std::span<const T> after(const std::vector<T>& series, std::uint64_t from) {
    const auto k = std::min<std::size_t>(from, series.size());
    return {series.data() + k, series.size() - k};
  }
  std::span<const Coord> post_transient_positions() const { return after(loser_position, transient); }
  std::span<const std::uint32_t> post_transient_activity() const { return after(activity, transient); }
  std::span<const double> post_transient_min_profit() const { return after(min_profit, transient); }
};

struct RunOptions {
  EngineKind engine = EngineKind::incremental;
  // Threshold f0 on profit / mean price; enables the activity series.
  std::optional<double> activity_threshold;
  bool record_profits = false;
  std::uint64_t audit_interval = 0;
  // Called at every step with the evaluated market, before the price cut.
  std::function<void(std::uint64_t t, const MarketSnapshot& snap, double mean_price)> observer;
};

// Everything needed to continue a run bit-identically.
struct SimState {
  PriceVector prices;
  std::uint64_t t = 0;
  double log_price_scale = 0.0;
  double renorm_level = 0.0;  // mean-price trigger, reset after each renormalization
  Rng rng;
};

class Simulation {
 public:
  Simulation(const TradeNetwork& net, const ExpenditureMatrix& wts, SimConfig config,
             RunOptions options = {});
  // Resume from a saved state.
  Simulation(const TradeNetwork& net, const ExpenditureMatrix& wts, SimConfig config,
             RunOptions options, SimState state);

  StepRecord step();
  bool done() const noexcept { return state_.t >= config_.total_steps; }

  const SimState& state() const noexcept { return state_; }
  const MarketEngine& engine() const noexcept { return *engine_; }
  const SimConfig& config() const noexcept { return config_; }

 private:
  double renormalize(double mean);

  const TradeNetwork* net_;
  const ExpenditureMatrix* wts_;
  SimConfig config_;
  RunOptions options_;
  SimState state_;
  std::unique_ptr<MarketEngine> engine_;
};

RunRecord run(const TradeNetwork& net, const ExpenditureMatrix& wts, const SimConfig& config,
              const RunOptions& options = {});

}  // namespace socmarket
