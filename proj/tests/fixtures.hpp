#pragma once

// Random instances shared by the unit tests and the acceptance checks.

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "socmarket/market.hpp"
#include "socmarket/topology.hpp"

namespace fixture {

using namespace socmarket;

struct Instance {
  std::string label;
  TradeNetwork net;
  ExpenditureMatrix wts;
  PriceVector prices;
};

enum class Family { ring, rt, lt, lb, rb, manhattan, f_lattice, er };

inline const std::vector<Family>& all_families() {
  static const std::vector<Family> f{Family::ring, Family::rt, Family::lt, Family::lb,
                                     Family::rb, Family::manhattan, Family::f_lattice, Family::er};
  return f;
}

inline const char* name(Family f) {
  switch (f) {
    case Family::ring: return "ring";
    case Family::rt: return "RT";
    case Family::lt: return "LT";
    case Family::lb: return "LB";
    case Family::rb: return "RB";
    case Family::manhattan: return "manhattan";
    case Family::f_lattice: return "F";
    case Family::er: return "ER";
  }
  return "?";
}

// Prices spread over several decades so that the identities are exercised
// away from the symmetric point.
inline PriceVector random_prices(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  for (auto& v : p) v = std::exp(4.0 * (uniform01(rng) - 0.5)) * 10.0;
  return PriceVector(std::move(p));
}

inline Instance random_instance(Family f, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::dynamics);
  const auto side = static_cast<std::int32_t>(4 + 2 * uniform_index(rng, 3));  // 4, 6, 8
  auto build = [&]() -> TradeNetwork {
    switch (f) {
      case Family::ring: return build_ring(3 + uniform_index(rng, 30));
      case Family::rt: return build_corner_lattice(side, Corner::RT);
      case Family::lt: return build_corner_lattice(side, Corner::LT);
      case Family::lb: return build_corner_lattice(side, Corner::LB);
      case Family::rb: return build_corner_lattice(side, Corner::RB);
      case Family::manhattan: return build_manhattan(side);
      case Family::f_lattice: return build_f_lattice(side);
      case Family::er: {
        Rng t = make_rng(seed, Stream::topology);
        return build_er_embedded(20 + uniform_index(rng, 60), 0.05 + 0.1 * uniform01(rng), t);
      }
    }
    return build_ring(3);
  };
  TradeNetwork net = build();
  ExpenditureMatrix wts;
  if (f == Family::er) {
    Rng w = make_rng(seed, Stream::weights);
    wts = assign_weights_uniform(net, w);
  } else {
    wts = assign_weights_fixed(net, 0.05 + 0.9 * uniform01(rng));
  }
  PriceVector prices = random_prices(net.size(), rng);
  return {name(f), std::move(net), std::move(wts), std::move(prices)};
}

// Adjacency in the oracle's plain form.
inline std::vector<std::vector<int>> supplier_lists(const TradeNetwork& net) {
  std::vector<std::vector<int>> s(net.size());
  for (AgentId i = 0; i < net.size(); ++i) {
    for (AgentId j : net.suppliers(i)) s[i].push_back(static_cast<int>(j));
  }
  return s;
}

inline std::vector<std::vector<double>> weight_lists(const TradeNetwork& net, const ExpenditureMatrix& wts) {
  std::vector<std::vector<double>> a(net.size());
  for (AgentId i = 0; i < net.size(); ++i) {
    for (double w : wts.row(net, i)) a[i].push_back(w);
  }
  return a;
}

inline double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

}  // namespace fixture
