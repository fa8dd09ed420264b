#include "socmarket/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "socmarket/errors.hpp"
#include "socmarket/kernels.hpp"

namespace socmarket {

std::string_view to_string(EngineKind kind) noexcept {
  return kind == EngineKind::full ? "full" : "incremental";
}

EngineKind parse_engine_kind(std::string_view text) {
  if (text == "full") return EngineKind::full;
  if (text == "incremental") return EngineKind::incremental;
  throw InvalidParameter("unknown engine '" + std::string(text) + "'");
}

IncrementalUpdater::IncrementalUpdater(const TradeNetwork& net)
    : net_(&net),
      mark_produce_(net.size(), 0),
      mark_supply_(net.size(), 0),
      mark_trade_(net.size(), 0),
      mark_profit_(net.size(), 0) {}

void IncrementalUpdater::add(std::vector<AgentId>& out, std::vector<std::uint32_t>& mark,
                             AgentId id) {
  if (mark[id] == epoch_) return;
  mark[id] = epoch_;
  out.push_back(id);
}

const AffectedSets& IncrementalUpdater::collect(AgentId changed) {
  if (++epoch_ == 0) {
    for (auto* m : {&mark_produce_, &mark_supply_, &mark_trade_, &mark_profit_}) {
      std::fill(m->begin(), m->end(), 0);
    }
    epoch_ = 1;
  }
  auto& s = sets_;
  s.produce.clear();
  s.supply.clear();
  s.trade.clear();
  s.profit.clear();

  add(s.produce, mark_produce_, changed);
  for (AgentId i : net_->customers(changed)) add(s.produce, mark_produce_, i);
  for (AgentId i : s.produce) {
    for (AgentId j : net_->suppliers(i)) add(s.supply, mark_supply_, j);
  }
  for (AgentId i : s.produce) add(s.trade, mark_trade_, i);
  for (AgentId j : s.supply) add(s.trade, mark_trade_, j);
  for (AgentId i : s.trade) {
    add(s.profit, mark_profit_, i);
    for (AgentId c : net_->customers(i)) add(s.profit, mark_profit_, c);
  }
  return s;
}

std::span<const AgentId> IncrementalUpdater::apply(MarketSnapshot& snap, AgentId changed,
                                                   const PriceVector& prices,
                                                   const ExpenditureMatrix& wts) {
  const auto& s = collect(changed);
  const auto p = prices.values();
  const TradeNetwork& net = *net_;

  for (AgentId i : s.produce) {
    snap.production[i] = detail::production_of(i, p, net, wts);
    detail::wants_of(i, snap.production[i], p, net, wts, snap.wants);
  }
  for (AgentId j : s.supply) snap.demand[j] = detail::demand_of(j, net, snap.wants);
  for (AgentId i : s.trade) snap.traded[i] = traded_quantity(snap.production[i], snap.demand[i]);
  for (AgentId j : s.supply) {
    for (auto e : net.customer_edges(j)) snap.shares[e] = detail::share_of(snap.wants[e], snap.demand[j]);
  }
  for (AgentId i : s.profit) snap.profit[i] = detail::profit_of(i, p, net, snap.traded, snap.shares);
  return s.profit;
}

MarketSnapshot incremental_evaluate(const MarketSnapshot& prev, AgentId changed,
                                    const PriceVector& prices, const TradeNetwork& net,
                                    const ExpenditureMatrix& wts) {
  if (prev.production.size() != net.size() || prev.wants.size() != net.edge_count() ||
      prices.size() != net.size()) {
    throw ConsistencyError("snapshot does not belong to this network");
  }
  if (changed >= net.size()) throw InvalidParameter("changed agent out of range");
  MarketSnapshot next = prev;
  IncrementalUpdater updater(net);
  updater.apply(next, changed, prices, wts);
  return next;
}

void FullEngine::reset(const PriceVector& prices) {
  snap_ = evaluate_market(prices, *net_, *wts_);
  loser_ = static_cast<AgentId>(kernels::argmin(snap_.profit));
}

void FullEngine::price_changed(AgentId, const PriceVector& prices) { reset(prices); }

IncrementalEngine::IncrementalEngine(const TradeNetwork& net, const ExpenditureMatrix& wts,
                                     std::uint64_t audit_interval)
    : net_(&net), wts_(&wts), updater_(net), audit_interval_(audit_interval) {}

void IncrementalEngine::reset(const PriceVector& prices) {
  snap_ = evaluate_market(prices, *net_, *wts_);
  queue_.assign(snap_.profit);
  last_affected_ = {};
}

void IncrementalEngine::price_changed(AgentId changed, const PriceVector& prices) {
  last_affected_ = updater_.apply(snap_, changed, prices, *wts_);
  for (AgentId i : last_affected_) queue_.update(i, snap_.profit[i]);
  ++updates_;
  if (audit_interval_ > 0 && updates_ % audit_interval_ == 0) audit(prices);
}

void IncrementalEngine::audit(const PriceVector& prices) const {
  const MarketSnapshot ref = evaluate_market(prices, *net_, *wts_);
  auto check = [](const std::vector<double>& got, const std::vector<double>& want,
                  const char* field) {
    for (std::size_t k = 0; k < want.size(); ++k) {
      if (std::abs(got[k] - want[k]) > 1e-10 * std::max(1.0, std::abs(want[k]))) {
        throw ConsistencyError(std::string("incremental snapshot diverged in ") + field +
                               " at index " + std::to_string(k));
      }
    }
  };
  check(snap_.production, ref.production, "production");
  check(snap_.wants, ref.wants, "wants");
  check(snap_.demand, ref.demand, "demand");
  check(snap_.traded, ref.traded, "traded");
  check(snap_.shares, ref.shares, "shares");
  check(snap_.profit, ref.profit, "profit");
}

std::unique_ptr<MarketEngine> make_engine(EngineKind kind, const TradeNetwork& net,
                                          const ExpenditureMatrix& wts,
                                          std::uint64_t audit_interval) {
  if (kind == EngineKind::full) return std::make_unique<FullEngine>(net, wts);
  return std::make_unique<IncrementalEngine>(net, wts, audit_interval);
}

}  // namespace socmarket
