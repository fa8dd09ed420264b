#pragma once

// Test-side reference computations. These deliberately avoid the library's
// internals: dense per-agent loops written from the model equations, plain
// pow() instead of cbrt, a separate discrete power-law sampler, and brute
// force where brute force is cheap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Market {
  std::vector<double> production;
  std::map<std::pair<int, int>, double> wants;   // (customer i, supplier j)
  std::vector<double> demand;
  std::vector<double> traded;
  std::map<std::pair<int, int>, double> shares;  // (customer i, supplier j)
  std::vector<double> profit;
};

// suppliers[i][k] with weights a[i][k].
inline Market evaluate(const std::vector<double>& p, const std::vector<std::vector<int>>& suppliers,
                       const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(p.size());
  Market m;
  m.production.assign(n, 0.0);
  m.demand.assign(n, 0.0);
  m.traded.assign(n, 0.0);
  m.profit.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < suppliers[i].size(); ++k) s += std::sqrt(a[i][k] * p[i] / p[suppliers[i][k]]);
    m.production[i] = std::pow(s, 2.0 / 3.0);
  }
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < suppliers[i].size(); ++k) {
      const int j = suppliers[i][k];
      m.wants[{i, j}] = a[i][k] * (p[i] / p[j]) * m.production[i];
    }
  }
  for (const auto& [edge, w] : m.wants) m.demand[edge.second] += w;
  for (int i = 0; i < n; ++i) m.traded[i] = std::min(m.production[i], m.demand[i]);
  for (const auto& [edge, w] : m.wants) {
    const double d = m.demand[edge.second];
    m.shares[edge] = d > 0.0 ? w / d : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double spent = 0.0;
    for (int j : suppliers[i]) spent += m.shares[{i, j}] * p[j] * m.traded[j];
    m.profit[i] = p[i] * m.traded[i] - spent;
  }
  return m;
}

// u(q) = -q^2/2 + sum_j 2 sqrt(c_j), with consumptions c_j = a_j P_j q
// implied by the budget at output q.
inline double utility_at(double q, const std::vector<double>& a, const std::vector<double>& ratio) {
  double u = -0.5 * q * q;
  for (std::size_t k = 0; k < a.size(); ++k) u += 2.0 * std::sqrt(a[k] * ratio[k] * q);
  return u;
}

struct GridMax {
  double q = 0.0;
  double u = -INFINITY;
  double step = 0.0;
};

inline GridMax grid_maximize(const std::vector<double>& a, const std::vector<double>& ratio, double lo,
                             double hi, int points) {
  GridMax g;
  g.step = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    const double q = lo + g.step * k;
    const double u = utility_at(q, a, ratio);
    if (u > g.u) {
      g.u = u;
      g.q = q;
    }
  }
  return g;
}

// Discrete power law P(x) ~ x^-tau on [1, x_max] by inverse transform over
// a cumulative table.
class PowerLawSampler {
 public:
  PowerLawSampler(double tau, std::uint64_t x_max) : cdf_(x_max) {
    double acc = 0.0;
    for (std::uint64_t x = 1; x <= x_max; ++x) {
      acc += std::pow(static_cast<double>(x), -tau);
      cdf_[x - 1] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }

  template <typename Gen>
  std::uint64_t operator()(Gen& gen) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = u(gen);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), r);
    return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
  }

 private:
  std::vector<double> cdf_;
};

// Agents whose profit can move when only agent c changes price, built from
// plain adjacency lists:
//   production/wants move for c and its customers;
//   demand moves for every supplier of those;
//   traded moves for any agent whose production or demand moved;
//   profit moves for traders and for customers of traders (they pay them).
inline std::set<int> profit_dependents(int c, const std::vector<std::vector<int>>& suppliers) {
  const int n = static_cast<int>(suppliers.size());
  std::vector<std::vector<int>> customers(n);
  for (int i = 0; i < n; ++i) {
    for (int j : suppliers[i]) customers[j].push_back(i);
  }
  std::set<int> produce{c};
  for (int i : customers[c]) produce.insert(i);
  std::set<int> traded = produce;
  for (int i : produce) {
    for (int j : suppliers[i]) traded.insert(j);
  }
  std::set<int> profit = traded;
  for (int j : traded) {
    for (int i : customers[j]) profit.insert(i);
  }
  return profit;
}

}  // namespace oracle
