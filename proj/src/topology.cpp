#include "socmarket/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "socmarket/errors.hpp"

namespace socmarket {

std::string_view to_string(NetworkKind kind) noexcept {
  switch (kind) {
    case NetworkKind::ring: return "ring";
    case NetworkKind::manhattan: return "manhattan";
    case NetworkKind::f_lattice: return "f_lattice";
    case NetworkKind::corner: return "corner";
    case NetworkKind::er_embedded: return "er_embedded";
  }
  return "unknown";
}

std::string_view to_string(Corner corner) noexcept {
  switch (corner) {
    case Corner::RT: return "RT";
    case Corner::LT: return "LT";
    case Corner::LB: return "LB";
    case Corner::RB: return "RB";
  }
  return "unknown";
}

NetworkKind parse_network_kind(std::string_view text) {
  for (NetworkKind k : {NetworkKind::ring, NetworkKind::manhattan, NetworkKind::f_lattice,
                        NetworkKind::corner, NetworkKind::er_embedded}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidParameter("unknown network kind '" + std::string(text) + "'");
}

Corner parse_corner(std::string_view text) {
  for (Corner c : {Corner::RT, Corner::LT, Corner::LB, Corner::RB}) {
    if (text == to_string(c)) return c;
  }
  throw InvalidParameter("unknown corner '" + std::string(text) + "'");
}

std::string_view to_string(WeightScheme scheme) noexcept {
  return scheme == WeightScheme::fixed_split ? "fixed_split" : "uniform_random";
}

std::string_view to_string(DistanceMode mode) noexcept {
  return mode == DistanceMode::raw ? "raw" : "min_image";
}

std::string_view to_string(DistanceMetric metric) noexcept {
  return metric == DistanceMetric::norm ? "norm" : "component";
}

DistanceMode parse_distance_mode(std::string_view text) {
  if (text == "raw") return DistanceMode::raw;
  if (text == "min_image") return DistanceMode::min_image;
  throw InvalidParameter("unknown distance mode '" + std::string(text) + "'");
}

DistanceMetric parse_distance_metric(std::string_view text) {
  if (text == "norm") return DistanceMetric::norm;
  if (text == "component") return DistanceMetric::component;
  throw InvalidParameter("unknown distance metric '" + std::string(text) + "'");
}

TradeNetwork TradeNetwork::from_suppliers(NetworkKind kind, Corner corner, Coord extents,
                                          std::vector<Coord> embedding,
                                          const std::vector<std::vector<AgentId>>& suppliers) {
  const std::size_t n = suppliers.size();
  if (embedding.size() != n) throw InvalidSize("embedding size does not match agent count");

  TradeNetwork net;
  net.kind_ = kind;
  net.corner_ = corner;
  net.extents_ = extents;
  net.embedding_ = std::move(embedding);
  net.supplier_offsets_.assign(n + 1, 0);

  std::vector<std::uint32_t> in_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = suppliers[i];
    if (row.empty()) {
      throw TopologyMismatch("agent " + std::to_string(i) + " has no suppliers");
    }
    for (std::size_t s = 0; s < row.size(); ++s) {
      AgentId j = row[s];
      if (j >= n) throw InvalidParameter("supplier id out of range");
      if (j == i) throw TopologyMismatch("self edge at agent " + std::to_string(i));
      if (std::find(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(s), j) !=
          row.begin() + static_cast<std::ptrdiff_t>(s)) {
        throw TopologyMismatch("duplicate supplier at agent " + std::to_string(i));
      }
      net.supplier_ids_.push_back(j);
      ++in_count[j];
    }
    net.supplier_offsets_[i + 1] = static_cast<std::uint32_t>(net.supplier_ids_.size());
  }

  net.customer_offsets_.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) net.customer_offsets_[j + 1] = net.customer_offsets_[j] + in_count[j];
  net.customer_ids_.resize(net.supplier_ids_.size());
  net.customer_edges_.resize(net.supplier_ids_.size());
  std::vector<std::uint32_t> fill(net.customer_offsets_.begin(), net.customer_offsets_.end() - 1);
  for (AgentId i = 0; i < n; ++i) {
    for (std::uint32_t e = net.edge_begin(i); e < net.edge_end(i); ++e) {
      AgentId j = net.supplier_ids_[e];
      net.customer_ids_[fill[j]] = i;
      net.customer_edges_[fill[j]] = e;
      ++fill[j];
    }
  }
  return net;
}

ExpenditureMatrix::ExpenditureMatrix(const TradeNetwork& net, std::vector<double> weights,
                                     WeightScheme scheme, double split)
    : weights_(std::move(weights)), scheme_(scheme), split_(split) {
  if (weights_.size() != net.edge_count()) {
    throw TopologyMismatch("weight count does not match edge count");
  }
  for (AgentId i = 0; i < net.size(); ++i) {
    double total = 0.0;
    for (double w : row(net, i)) {
      if (!(w >= 0.0)) throw DomainError("negative expenditure weight at agent " + std::to_string(i));
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw DomainError("weights of agent " + std::to_string(i) + " do not sum to 1");
    }
  }
}

namespace {

enum class Dir { R, T, L, B };

AgentId lattice_neighbor(std::int32_t side, std::int32_t x, std::int32_t y, Dir d) {
  switch (d) {
    case Dir::R: x = (x + 1) % side; break;
    case Dir::T: y = (y + 1) % side; break;
    case Dir::L: x = (x + side - 1) % side; break;
    case Dir::B: y = (y + side - 1) % side; break;
  }
  return static_cast<AgentId>(y * side + x);
}

// The two supplier directions of a corner, in R, T, L, B precedence.
std::array<Dir, 2> corner_dirs(Corner c) {
  switch (c) {
    case Corner::RT: return {Dir::R, Dir::T};
    case Corner::LT: return {Dir::T, Dir::L};
    case Corner::LB: return {Dir::L, Dir::B};
    case Corner::RB: return {Dir::R, Dir::B};
  }
  return {Dir::R, Dir::T};
}

template <typename DirsAt>
TradeNetwork build_lattice(std::int32_t side, NetworkKind kind, Corner corner, DirsAt dirs_at) {
  const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  std::vector<std::vector<AgentId>> suppliers(n);
  std::vector<Coord> embedding(n);
  for (std::int32_t y = 0; y < side; ++y) {
    for (std::int32_t x = 0; x < side; ++x) {
      const auto i = static_cast<std::size_t>(y * side + x);
      embedding[i] = coord2(x, y);
      for (Dir d : dirs_at(x, y)) suppliers[i].push_back(lattice_neighbor(side, x, y, d));
    }
  }
  return TradeNetwork::from_suppliers(kind, corner, coord2(side, side), std::move(embedding),
                                      suppliers);
}

void require_even_side(std::int32_t side, const char* what) {
  if (side < 4 || side % 2 != 0) {
    throw InvalidSize(std::string(what) + " needs an even side length >= 4, got " +
                      std::to_string(side));
  }
}

}  // namespace

TradeNetwork build_ring(std::size_t n_agents) {
  if (n_agents < 3) throw InvalidSize("ring needs at least 3 agents");
  std::vector<std::vector<AgentId>> suppliers(n_agents);
  std::vector<Coord> embedding(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    suppliers[i] = {static_cast<AgentId>((i + n_agents - 1) % n_agents),
                    static_cast<AgentId>((i + 1) % n_agents)};
    embedding[i] = coord1(static_cast<std::int32_t>(i));
  }
  return TradeNetwork::from_suppliers(NetworkKind::ring, Corner::RT,
                                      coord1(static_cast<std::int32_t>(n_agents)),
                                      std::move(embedding), suppliers);
}

TradeNetwork build_corner_lattice(std::int32_t side, Corner corner) {
  if (side < 3) throw InvalidSize("corner lattice needs side length >= 3");
  const auto dirs = corner_dirs(corner);
  return build_lattice(side, NetworkKind::corner, corner,
                       [&](std::int32_t, std::int32_t) { return dirs; });
}

Corner manhattan_corner_at(std::int32_t x, std::int32_t y) {
  // Even rows supply from the right, odd rows from the left; even columns
  // from the top, odd columns from the bottom. The unit loop
  // (0,0) -> (1,0) -> (1,1) -> (0,1) then reads RT, RB, LB, LT.
  const bool right = (y % 2) == 0;
  const bool top = (x % 2) == 0;
  if (right) return top ? Corner::RT : Corner::RB;
  return top ? Corner::LT : Corner::LB;
}

TradeNetwork build_manhattan(std::int32_t side) {
  require_even_side(side, "Manhattan lattice");
  return build_lattice(side, NetworkKind::manhattan, Corner::RT, [](std::int32_t x, std::int32_t y) {
    return corner_dirs(manhattan_corner_at(x, y));
  });
}

TradeNetwork build_f_lattice(std::int32_t side) {
  require_even_side(side, "F lattice");
  return build_lattice(side, NetworkKind::f_lattice, Corner::RT, [](std::int32_t x, std::int32_t y) {
    return ((x + y) % 2 == 0) ? std::array<Dir, 2>{Dir::R, Dir::L}
                              : std::array<Dir, 2>{Dir::T, Dir::B};
  });
}

TradeNetwork build_er_embedded(std::size_t n_agents, double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("link probability alpha must lie in (0, 1)");
  }
  if (n_agents < 2) throw InvalidSize("ER network needs at least 2 agents");
  std::vector<std::vector<AgentId>> suppliers(n_agents);
  std::vector<Coord> embedding(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    embedding[i] = coord1(static_cast<std::int32_t>(i));
    for (std::size_t j = 0; j < n_agents; ++j) {
      if (j == i) continue;
      if (uniform01(rng) < alpha) suppliers[i].push_back(static_cast<AgentId>(j));
    }
    if (suppliers[i].empty()) {
      auto j = uniform_index(rng, n_agents - 1);
      if (j >= i) ++j;
      suppliers[i].push_back(static_cast<AgentId>(j));
    }
  }
  return TradeNetwork::from_suppliers(NetworkKind::er_embedded, Corner::RT,
                                      coord1(static_cast<std::int32_t>(n_agents)),
                                      std::move(embedding), suppliers);
}

ExpenditureMatrix assign_weights_fixed(const TradeNetwork& net, double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("choice parameter a must lie in (0, 1)");
  std::vector<double> w;
  w.reserve(net.edge_count());
  for (AgentId i = 0; i < net.size(); ++i) {
    if (net.suppliers(i).size() != 2) {
      throw TopologyMismatch("fixed split needs exactly 2 suppliers; agent " + std::to_string(i) +
                             " has " + std::to_string(net.suppliers(i).size()));
    }
    w.push_back(a);
    w.push_back(1.0 - a);
  }
  return ExpenditureMatrix(net, std::move(w), WeightScheme::fixed_split, a);
}

ExpenditureMatrix assign_weights_uniform(const TradeNetwork& net, Rng& rng) {
  std::vector<double> w(net.edge_count());
  for (AgentId i = 0; i < net.size(); ++i) {
    const auto begin = net.edge_begin(i);
    const auto end = net.edge_end(i);
    double total = 0.0;
    for (auto e = begin; e < end; ++e) {
      w[e] = uniform01_open_low(rng);
      total += w[e];
    }
    for (auto e = begin; e < end; ++e) w[e] /= total;
  }
  return ExpenditureMatrix(net, std::move(w), WeightScheme::uniform_random);
}

double jump_distance(const Coord& a, const Coord& b, const Coord& extents, DistanceMode mode,
                     DistanceMetric metric) {
  if (a.dim != b.dim || a.dim != extents.dim || a.dim < 1 || a.dim > 2) {
    throw InvalidParameter("coordinate dimension mismatch");
  }
  std::array<double, 2> delta{};
  for (std::size_t k = 0; k < a.dim; ++k) {
    std::int32_t d = std::abs(a.v[k] - b.v[k]);
    if (mode == DistanceMode::min_image) d = std::min(d, extents.v[k] - d);
    delta[k] = static_cast<double>(d);
  }
  if (metric == DistanceMetric::component) return delta[0];
  return std::sqrt(delta[0] * delta[0] + delta[1] * delta[1]);
}

}  // namespace socmarket
