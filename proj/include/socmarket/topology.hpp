#pragma once

// Directed trade networks and expenditure weights.
//
// Edges point from supplier to customer. An agent's suppliers are stored in
// a CSR layout; "edge e" always means the e-th entry of that layout, i.e. the
// pair (customer i, supplier j) with e in [edge_begin(i), edge_end(i)). Every
// per-edge quantity in the library (weights, wants, shares) is indexed this way.
//
// Lattice agents live at index y * L + x. Direction names follow the usual
// picture: R = (x+1, y), T = (x, y+1), L = (x-1, y), B = (x, y-1), all
// periodic. Supplier lists on lattices are ordered R, T, L, B.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socmarket/random.hpp"

namespace socmarket {

using AgentId = std::uint32_t;

enum class NetworkKind { ring, manhattan, f_lattice, corner, er_embedded };
enum class Corner { RT, LT, LB, RB };

std::string_view to_string(NetworkKind kind) noexcept;
std::string_view to_string(Corner corner) noexcept;
NetworkKind parse_network_kind(std::string_view text);
Corner parse_corner(std::string_view text);

// A lattice coordinate or a per-dimension extent; dim is 1 or 2.
struct Coord {
  std::array<std::int32_t, 2> v{};
  std::uint8_t dim = 1;

  friend bool operator==(const Coord&, const Coord&) = default;
};

inline Coord coord1(std::int32_t x) { return Coord{{x, 0}, 1}; }
inline Coord coord2(std::int32_t x, std::int32_t y) { return Coord{{x, y}, 2}; }

class TradeNetwork {
 public:
  // Validates and freezes a network given per-agent supplier lists.
  // Rejects self edges, duplicate suppliers, out-of-range ids and agents
  // without suppliers. Customers are derived as the transpose, ordered by
  // ascending customer id.
  static TradeNetwork from_suppliers(NetworkKind kind, Corner corner, Coord extents,
                                     std::vector<Coord> embedding,
                                     const std::vector<std::vector<AgentId>>& suppliers);

  std::size_t size() const noexcept { return embedding_.size(); }
  std::size_t edge_count() const noexcept { return supplier_ids_.size(); }

  NetworkKind kind() const noexcept { return kind_; }
  // Meaningful only for corner lattices.
  Corner corner() const noexcept { return corner_; }
  const Coord& extents() const noexcept { return extents_; }
  const Coord& position(AgentId i) const { return embedding_[i]; }

  std::span<const AgentId> suppliers(AgentId i) const {
    return {supplier_ids_.data() + edge_begin(i), supplier_ids_.data() + edge_end(i)};
  }
  std::span<const AgentId> customers(AgentId j) const {
    return {customer_ids_.data() + customer_offsets_[j],
            customer_ids_.data() + customer_offsets_[j + 1]};
  }
  // Supplier-CSR edge index of each entry of customers(j).
  std::span<const std::uint32_t> customer_edges(AgentId j) const {
    return {customer_edges_.data() + customer_offsets_[j],
            customer_edges_.data() + customer_offsets_[j + 1]};
  }

  std::uint32_t edge_begin(AgentId i) const { return supplier_offsets_[i]; }
  std::uint32_t edge_end(AgentId i) const { return supplier_offsets_[i + 1]; }
  AgentId edge_supplier(std::uint32_t e) const { return supplier_ids_[e]; }

 private:
  NetworkKind kind_ = NetworkKind::ring;
  Corner corner_ = Corner::RT;
  Coord extents_;
  std::vector<Coord> embedding_;
  std::vector<std::uint32_t> supplier_offsets_;
  std::vector<AgentId> supplier_ids_;
  std::vector<std::uint32_t> customer_offsets_;
  std::vector<AgentId> customer_ids_;
  std::vector<std::uint32_t> customer_edges_;
};

enum class WeightScheme { fixed_split, uniform_random };

std::string_view to_string(WeightScheme scheme) noexcept;

// Expenditure fractions a_ij on supplier edges; rows sum to one.
class ExpenditureMatrix {
 public:
  ExpenditureMatrix() = default;
  // Validates non-negativity, alignment with `net` and unit row sums (1e-12).
  ExpenditureMatrix(const TradeNetwork& net, std::vector<double> weights, WeightScheme scheme,
                    double split = 0.0);

  WeightScheme scheme() const noexcept { return scheme_; }
  double split() const noexcept { return split_; }
  double operator[](std::uint32_t edge) const { return weights_[edge]; }
  std::span<const double> values() const noexcept { return weights_; }
  std::span<const double> row(const TradeNetwork& net, AgentId i) const {
    return {weights_.data() + net.edge_begin(i), weights_.data() + net.edge_end(i)};
  }

 private:
  std::vector<double> weights_;
  WeightScheme scheme_ = WeightScheme::fixed_split;
  double split_ = 0.0;
};

TradeNetwork build_ring(std::size_t n_agents);
TradeNetwork build_corner_lattice(std::int32_t side, Corner corner);
TradeNetwork build_manhattan(std::int32_t side);
TradeNetwork build_f_lattice(std::int32_t side);
TradeNetwork build_er_embedded(std::size_t n_agents, double alpha, Rng& rng);

// Corner type of a Manhattan-lattice site.
Corner manhattan_corner_at(std::int32_t x, std::int32_t y);

// First supplier (canonical order) gets `a`, the second 1 - a.
ExpenditureMatrix assign_weights_fixed(const TradeNetwork& net, double a);
ExpenditureMatrix assign_weights_uniform(const TradeNetwork& net, Rng& rng);

enum class DistanceMode { raw, min_image };
enum class DistanceMetric { norm, component };

std::string_view to_string(DistanceMode mode) noexcept;
std::string_view to_string(DistanceMetric metric) noexcept;
DistanceMode parse_distance_mode(std::string_view text);
DistanceMetric parse_distance_metric(std::string_view text);

// Distance between two embedded positions. `raw` uses plain per-component
// absolute differences (so up to extent - 1); `min_image` wraps each
// component to at most extent / 2 first. `norm` is Euclidean; `component`
// is the first coordinate's difference alone.
double jump_distance(const Coord& a, const Coord& b, const Coord& extents, DistanceMode mode,
                     DistanceMetric metric);

}  // namespace socmarket
