#pragma once

// Plain-text and binary file formats.
//
// Network:
//   soc-market-net v1
//   N <n>
//   KIND <ring|manhattan|f_lattice|corner(RT)|...|er_embedded>
//   EXTENTS <l1> [l2]
//   <i> : <supplier ids in order>
//
// Weights:
//   soc-market-wts v1
//   SCHEME <fixed_split <a>|uniform_random>      (optional)
//   <i> : <weights aligned with supplier order>
//
// Run record (columnar, whitespace separated, '#' lines are metadata):
//   # soc-market-run v1
//   # key value ...
//   t loser_idx pos_x [pos_y] min_profit mean_price renorm_flag log_price_scale [activity]
//
// Checkpoint (little-endian, fixed width):
//   char[8]  magic "SOCMCKPT"
//   u32      version (1)
//   u32      n_agents
//   u64      t
//   f64      log_price_scale
//   f64      renorm_level
//   f64[n]   prices
//   u32      rng state length in bytes, then that many bytes of the
//            engine's textual state

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "socmarket/dynamics.hpp"
#include "socmarket/topology.hpp"

namespace socmarket {

// Shortest text that reads back to the same double.
std::string format_double(double v);

void write_network(std::ostream& out, const TradeNetwork& net);
TradeNetwork read_network(std::istream& in);

void write_weights(std::ostream& out, const TradeNetwork& net, const ExpenditureMatrix& wts);
ExpenditureMatrix read_weights(std::istream& in, const TradeNetwork& net);

using Metadata = std::vector<std::pair<std::string, std::string>>;

// Column header line for a record with the given layout.
std::string run_record_header(std::uint8_t position_dim, bool with_activity);
// One data row; identical to what write_run_record emits.
std::string run_record_row(const StepRecord& step, std::uint8_t position_dim);

void write_run_record(std::ostream& out, const RunRecord& record, const Metadata& meta);

struct LoadedRun {
  RunRecord record;
  std::map<std::string, std::string> meta;
};
LoadedRun read_run_record(std::istream& in);

void write_checkpoint(const std::filesystem::path& path, const SimState& state);
SimState read_checkpoint(const std::filesystem::path& path);

}  // namespace socmarket
