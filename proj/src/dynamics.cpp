#include "socmarket/dynamics.hpp"

#include <cmath>
#include <string>

#include "socmarket/errors.hpp"
#include "socmarket/kernels.hpp"

namespace socmarket {

void SimConfig::validate() const {
  if (!(price_floor > 0.0) || !std::isfinite(price_floor)) {
    throw ConfigError("price_floor", "must be > 0");
  }
  if (!(eta_max > 0.0 && eta_max < 1.0)) throw ConfigError("eta_max", "must lie in (0, 1)");
  if (total_steps == 0) throw ConfigError("total_steps", "must be positive");
  if (transient_steps >= total_steps) {
    throw ConfigError("transient_steps", "must be smaller than total_steps");
  }
  if (!(renorm_threshold > 0.0 && renorm_threshold < 1.0)) {
    throw ConfigError("renorm_threshold", "must lie in (0, 1)");
  }
}

PriceVector init_prices(const SimConfig& config, std::size_t n_agents, Rng& rng) {
  std::vector<double> p(n_agents);
  for (auto& v : p) v = config.price_floor + uniform01(rng);
  return PriceVector(std::move(p));
}

AgentId find_loser(std::span<const double> profits) {
  if (profits.empty()) throw InvalidSize("cannot pick a loser from an empty market");
  return static_cast<AgentId>(kernels::argmin(profits));
}

double apply_price_cut(PriceVector& prices, AgentId loser, double eta_max, Rng& rng) {
  const double eta = eta_max * uniform01(rng);
  prices.set(loser, prices[loser] * (1.0 - eta));
  return eta;
}

void RunRecord::append(const StepRecord& step) {
  loser_index.push_back(step.loser);
  loser_position.push_back(step.position);
  min_profit.push_back(step.min_profit);
  mean_price.push_back(step.mean_price);
  renorm_flag.push_back(step.renormalized ? 1 : 0);
  log_price_scale.push_back(step.log_price_scale);
  if (step.activity) activity.push_back(*step.activity);
}

Simulation::Simulation(const TradeNetwork& net, const ExpenditureMatrix& wts, SimConfig config,
                       RunOptions options)
    : net_(&net), wts_(&wts), config_(config), options_(std::move(options)) {
  config_.validate();
  state_.rng = make_rng(config_.seed, Stream::dynamics);
  state_.prices = init_prices(config_, net.size(), state_.rng);
  state_.renorm_level =
      config_.renorm_threshold * (kernels::sum(state_.prices.values()) / static_cast<double>(net.size()));
  engine_ = make_engine(options_.engine, net, wts, options_.audit_interval);
  engine_->reset(state_.prices);
}

Simulation::Simulation(const TradeNetwork& net, const ExpenditureMatrix& wts, SimConfig config,
                       RunOptions options, SimState state)
    : net_(&net), wts_(&wts), config_(config), options_(std::move(options)), state_(std::move(state)) {
  config_.validate();
  if (state_.prices.size() != net.size()) throw ConsistencyError("saved prices do not match network");
  engine_ = make_engine(options_.engine, net, wts, options_.audit_interval);
  engine_->reset(state_.prices);
}

double Simulation::renormalize(double mean) {
  state_.prices.divide(mean);
  state_.log_price_scale += std::log(mean);
  engine_->reset(state_.prices);
  const double fresh = kernels::sum(state_.prices.values()) / static_cast<double>(net_->size());
  // Next trigger sits the same factor below the new level.
  state_.renorm_level = config_.renorm_threshold * fresh;
  return fresh;
}

StepRecord Simulation::step() {
  StepRecord rec;
  rec.t = state_.t;
  const auto n = static_cast<double>(net_->size());
  double mean = kernels::sum(state_.prices.values()) / n;
  if (mean < state_.renorm_level) {
    mean = renormalize(mean);
    rec.renormalized = true;
  }

  const MarketSnapshot& snap = engine_->snapshot();
  if (options_.observer) options_.observer(state_.t, snap, mean);

  rec.loser = engine_->loser();
  rec.position = net_->position(rec.loser);
  rec.min_profit = snap.profit[rec.loser];
  rec.mean_price = mean;
  rec.log_price_scale = state_.log_price_scale;
  if (options_.activity_threshold) {
    rec.activity = static_cast<std::uint32_t>(
        kernels::count_below_scaled(snap.profit, mean, *options_.activity_threshold));
  }

  rec.eta = apply_price_cut(state_.prices, rec.loser, config_.eta_max, state_.rng);
  engine_->price_changed(rec.loser, state_.prices);
  ++state_.t;
  return rec;
}

RunRecord run(const TradeNetwork& net, const ExpenditureMatrix& wts, const SimConfig& config,
              const RunOptions& options) {
  RunRecord record;
  RunOptions opts = options;
  if (options.record_profits) {
    opts.observer = [&record, user = options.observer](std::uint64_t t, const MarketSnapshot& snap,
                                                       double mean) {
      record.profits_stream.push_back(snap.profit);
      if (user) user(t, snap, mean);
    };
  }
  Simulation sim(net, wts, config, std::move(opts));
  record.transient = config.transient_steps;
  record.position_dim = net.extents().dim;
  record.activity_threshold = options.activity_threshold;
  const auto steps = static_cast<std::size_t>(config.total_steps);
  record.loser_index.reserve(steps);
  record.loser_position.reserve(steps);
  record.min_profit.reserve(steps);
  record.mean_price.reserve(steps);
  record.renorm_flag.reserve(steps);
  record.log_price_scale.reserve(steps);
  if (options.activity_threshold) record.activity.reserve(steps);
  while (!sim.done()) record.append(sim.step());
  return record;
}

}  // namespace socmarket
