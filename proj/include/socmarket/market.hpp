#pragma once

// One trading day: closed-form production optimum, intended wants, demand,
// traded quantities, expenditure shares and profits.
//
// Utility u = -q^2/2 + sum_j 2 sqrt(q_j) under the budget p_i q_i = sum_j p_j q_ij
// with q_ij = a_ij (p_i / p_j) q_i gives the production optimum
//   q_i = (sum_j sqrt(a_ij p_i / p_j))^(2/3).
//
// Units: prices in money per good, quantities in goods, profits in money.

#include <cmath>
#include <span>
#include <vector>

#include "socmarket/topology.hpp"

namespace socmarket {

class PriceVector {
 public:
  PriceVector() = default;
  // Throws DomainError unless every price is finite and strictly positive.
  explicit PriceVector(std::vector<double> prices);

  std::size_t size() const noexcept { return prices_.size(); }
  double operator[](AgentId i) const { return prices_[i]; }
  std::span<const double> values() const noexcept { return prices_; }

  void set(AgentId i, double price);
  // Multiplies every price by factor > 0.
  void scale(double factor);
  // Divides every price by divisor > 0.
  void divide(double divisor);

 private:
  std::vector<double> prices_;
};

struct MarketSnapshot {
  std::vector<double> production;  // per agent
  std::vector<double> wants;       // per supplier edge
  std::vector<double> demand;      // per agent
  std::vector<double> traded;      // per agent
  std::vector<double> shares;      // per supplier edge
  std::vector<double> profit;      // per agent

  friend bool operator==(const MarketSnapshot&, const MarketSnapshot&) = default;
};

// Per-agent formulas shared by the full and incremental evaluators. Both
// call exactly these, in the same summation order, so the two paths agree
// bit for bit.
namespace detail {

inline double production_of(AgentId i, std::span<const double> p, const TradeNetwork& net,
                            const ExpenditureMatrix& wts) {
  double root_sum = 0.0;
  for (auto e = net.edge_begin(i); e < net.edge_end(i); ++e) {
    root_sum += std::sqrt(wts[e] * (p[i] / p[net.edge_supplier(e)]));
  }
  return std::cbrt(root_sum * root_sum);
}

inline void wants_of(AgentId i, double production, std::span<const double> p,
                     const TradeNetwork& net, const ExpenditureMatrix& wts,
                     std::span<double> wants) {
  for (auto e = net.edge_begin(i); e < net.edge_end(i); ++e) {
    wants[e] = wts[e] * (p[i] / p[net.edge_supplier(e)]) * production;
  }
}

inline double demand_of(AgentId j, const TradeNetwork& net, std::span<const double> wants) {
  double total = 0.0;
  for (auto e : net.customer_edges(j)) total += wants[e];
  return total;
}

inline double share_of(double want, double supplier_demand) {
  return supplier_demand > 0.0 ? want / supplier_demand : 0.0;
}

inline double profit_of(AgentId i, std::span<const double> p, const TradeNetwork& net,
                        std::span<const double> traded, std::span<const double> shares) {
  double spent = 0.0;
  for (auto e = net.edge_begin(i); e < net.edge_end(i); ++e) {
    const AgentId j = net.edge_supplier(e);
    spent += shares[e] * p[j] * traded[j];
  }
  return p[i] * traded[i] - spent;
}

}  // namespace detail

double production_quantity(AgentId agent, const PriceVector& prices, const TradeNetwork& net,
                           const ExpenditureMatrix& wts);

// Wants of `agent` from each of its suppliers, in supplier order.
std::vector<double> intended_wants(AgentId agent, double production, const PriceVector& prices,
                                   const TradeNetwork& net, const ExpenditureMatrix& wts);

// Demand for each agent's good given everyone's production.
std::vector<double> net_demand(const PriceVector& prices, const TradeNetwork& net,
                               const ExpenditureMatrix& wts, std::span<const double> productions);

// Same, from precomputed per-edge wants.
std::vector<double> net_demand(const TradeNetwork& net, std::span<const double> wants);

inline double traded_quantity(double production, double demand) {
  return production < demand ? production : demand;
}

// b_e = want_e / demand(supplier of e); 0 when that demand is 0.
std::vector<double> expenditure_shares(const TradeNetwork& net, std::span<const double> wants,
                                       std::span<const double> demands);

std::vector<double> profits(const PriceVector& prices, std::span<const double> traded,
                            std::span<const double> shares, const TradeNetwork& net);

MarketSnapshot evaluate_market(const PriceVector& prices, const TradeNetwork& net,
                               const ExpenditureMatrix& wts);

// -q^2/2 + sum 2 sqrt(c). Throws DomainError on negative quantities.
double utility(double production, std::span<const double> consumptions);

}  // namespace socmarket
