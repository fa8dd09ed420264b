#include "socmarket/market.hpp"

#include <string>

#include "socmarket/errors.hpp"

namespace socmarket {

namespace {

void check_price(double p, std::size_t i) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw DomainError("price of agent " + std::to_string(i) + " must be finite and positive");
  }
}

void check_sizes(const PriceVector& prices, const TradeNetwork& net) {
  if (prices.size() != net.size()) throw InvalidSize("price vector does not match network size");
}

}  // namespace

PriceVector::PriceVector(std::vector<double> prices) : prices_(std::move(prices)) {
  for (std::size_t i = 0; i < prices_.size(); ++i) check_price(prices_[i], i);
}

void PriceVector::set(AgentId i, double price) {
  check_price(price, i);
  prices_[i] = price;
}

void PriceVector::scale(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("price scale must be positive");
  for (std::size_t i = 0; i < prices_.size(); ++i) {
    prices_[i] *= factor;
    check_price(prices_[i], i);
  }
}

void PriceVector::divide(double divisor) {
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw DomainError("price divisor must be positive");
  for (std::size_t i = 0; i < prices_.size(); ++i) {
    prices_[i] /= divisor;
    check_price(prices_[i], i);
  }
}

double production_quantity(AgentId agent, const PriceVector& prices, const TradeNetwork& net,
                           const ExpenditureMatrix& wts) {
  check_sizes(prices, net);
  return detail::production_of(agent, prices.values(), net, wts);
}

std::vector<double> intended_wants(AgentId agent, double production, const PriceVector& prices,
                                   const TradeNetwork& net, const ExpenditureMatrix& wts) {
  check_sizes(prices, net);
  std::vector<double> all(net.edge_count());
  detail::wants_of(agent, production, prices.values(), net, wts, all);
  return {all.begin() + net.edge_begin(agent), all.begin() + net.edge_end(agent)};
}

std::vector<double> net_demand(const TradeNetwork& net, std::span<const double> wants) {
  std::vector<double> demand(net.size());
  for (AgentId j = 0; j < net.size(); ++j) demand[j] = detail::demand_of(j, net, wants);
  return demand;
}

std::vector<double> net_demand(const PriceVector& prices, const TradeNetwork& net,
                               const ExpenditureMatrix& wts, std::span<const double> productions) {
  check_sizes(prices, net);
  std::vector<double> wants(net.edge_count());
  for (AgentId i = 0; i < net.size(); ++i) {
    detail::wants_of(i, productions[i], prices.values(), net, wts, wants);
  }
  return net_demand(net, wants);
}

std::vector<double> expenditure_shares(const TradeNetwork& net, std::span<const double> wants,
                                       std::span<const double> demands) {
  std::vector<double> shares(net.edge_count());
  for (std::uint32_t e = 0; e < shares.size(); ++e) {
    shares[e] = detail::share_of(wants[e], demands[net.edge_supplier(e)]);
  }
  return shares;
}

std::vector<double> profits(const PriceVector& prices, std::span<const double> traded,
                            std::span<const double> shares, const TradeNetwork& net) {
  check_sizes(prices, net);
  std::vector<double> out(net.size());
  for (AgentId i = 0; i < net.size(); ++i) {
    out[i] = detail::profit_of(i, prices.values(), net, traded, shares);
  }
  return out;
}

MarketSnapshot evaluate_market(const PriceVector& prices, const TradeNetwork& net,
                               const ExpenditureMatrix& wts) {
  check_sizes(prices, net);
  const auto p = prices.values();
  const std::size_t n = net.size();
  MarketSnapshot s;
  s.production.resize(n);
  s.wants.resize(net.edge_count());
  for (AgentId i = 0; i < n; ++i) {
    s.production[i] = detail::production_of(i, p, net, wts);
    detail::wants_of(i, s.production[i], p, net, wts, s.wants);
  }
  s.demand = net_demand(net, s.wants);
  s.traded.resize(n);
  for (AgentId i = 0; i < n; ++i) s.traded[i] = traded_quantity(s.production[i], s.demand[i]);
  s.shares = expenditure_shares(net, s.wants, s.demand);
  s.profit = profits(prices, s.traded, s.shares, net);
  return s;
}

double utility(double production, std::span<const double> consumptions) {
  if (production < 0.0) throw DomainError("negative production");
  double comfort = 0.0;
  for (double c : consumptions) {
    if (c < 0.0) throw DomainError("negative consumption");
    comfort += 2.0 * std::sqrt(c);
  }
  return -0.5 * production * production + comfort;
}

}  // namespace socmarket
