#include "socmarket/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "socmarket/errors.hpp"

namespace socmarket {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

constexpr char kNetHeader[] = "soc-market-net v1";
constexpr char kWtsHeader[] = "soc-market-wts v1";
constexpr char kRunHeader[] = "soc-market-run v1";
constexpr char kCkptMagic[8] = {'S', 'O', 'C', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Next non-empty line, or false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (!line.empty()) return true;
  }
  return false;
}

[[noreturn]] void bad(std::size_t lineno, const std::string& what) {
  throw FormatError("line " + std::to_string(lineno) + ": " + what);
}

template <typename T>
T parse_number(const std::string& tok, std::size_t lineno) {
  T v{};
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) bad(lineno, "bad number '" + tok + "'");
  return v;
}

std::string expect_key(std::istream& in, const char* key, std::size_t& lineno) {
  std::string line;
  if (!next_line(in, line, lineno)) bad(lineno, std::string("missing ") + key);
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key) bad(lineno, std::string("expected ") + key);
  std::string rest;
  std::getline(ss, rest);
  return trim(rest);
}

// "<i> : a b c"
std::pair<std::size_t, std::vector<std::string>> split_row(const std::string& line,
                                                           std::size_t lineno) {
  const auto colon = line.find(':');
  if (colon == std::string::npos) bad(lineno, "missing ':'");
  const auto idx = parse_number<std::size_t>(trim(line.substr(0, colon)), lineno);
  std::istringstream ss(line.substr(colon + 1));
  std::vector<std::string> toks;
  for (std::string t; ss >> t;) toks.push_back(t);
  return {idx, toks};
}

std::string kind_tag(const TradeNetwork& net) {
  std::string tag(to_string(net.kind()));
  if (net.kind() == NetworkKind::corner) tag += "(" + std::string(to_string(net.corner())) + ")";
  return tag;
}

std::vector<Coord> embedding_for(const Coord& extents, std::size_t n) {
  std::vector<Coord> emb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::int32_t>(i);
    emb[i] = extents.dim == 2 ? coord2(k % extents.v[0], k / extents.v[0]) : coord1(k);
  }
  return emb;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated checkpoint");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

void write_network(std::ostream& out, const TradeNetwork& net) {
  out << kNetHeader << '\n';
  out << "N " << net.size() << '\n';
  out << "KIND " << kind_tag(net) << '\n';
  out << "EXTENTS " << net.extents().v[0];
  if (net.extents().dim == 2) out << ' ' << net.extents().v[1];
  out << '\n';
  for (AgentId i = 0; i < net.size(); ++i) {
    out << i << " :";
    for (AgentId j : net.suppliers(i)) out << ' ' << j;
    out << '\n';
  }
}

TradeNetwork read_network(std::istream& in) {
  std::size_t lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno) || line != kNetHeader) bad(lineno, "not a network file");
  const auto n = parse_number<std::size_t>(expect_key(in, "N", lineno), lineno);
  const std::string tag = expect_key(in, "KIND", lineno);
  NetworkKind kind;
  Corner corner = Corner::RT;
  if (const auto paren = tag.find('('); paren != std::string::npos) {
    if (tag.back() != ')') bad(lineno, "bad KIND '" + tag + "'");
    kind = parse_network_kind(tag.substr(0, paren));
    corner = parse_corner(tag.substr(paren + 1, tag.size() - paren - 2));
  } else {
    kind = parse_network_kind(tag);
  }
  std::istringstream ext(expect_key(in, "EXTENTS", lineno));
  std::vector<std::int32_t> dims;
  for (std::string t; ext >> t;) dims.push_back(parse_number<std::int32_t>(t, lineno));
  Coord extents;
  if (dims.size() == 1) {
    extents = coord1(dims[0]);
  } else if (dims.size() == 2) {
    extents = coord2(dims[0], dims[1]);
  } else {
    bad(lineno, "EXTENTS needs one or two values");
  }
  const std::size_t cells =
      static_cast<std::size_t>(extents.v[0]) * (extents.dim == 2 ? static_cast<std::size_t>(extents.v[1]) : 1);
  if (cells != n) bad(lineno, "EXTENTS do not match N");

  std::vector<std::vector<AgentId>> suppliers(n);
  std::vector<bool> seen(n, false);
  while (next_line(in, line, lineno)) {
    auto [i, toks] = split_row(line, lineno);
    if (i >= n) bad(lineno, "agent id out of range");
    if (seen[i]) bad(lineno, "agent listed twice");
    seen[i] = true;
    for (const auto& t : toks) suppliers[i].push_back(parse_number<AgentId>(t, lineno));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw FormatError("agent " + std::to_string(i) + " has no supplier line");
  }
  return TradeNetwork::from_suppliers(kind, corner, extents, embedding_for(extents, n), suppliers);
}

void write_weights(std::ostream& out, const TradeNetwork& net, const ExpenditureMatrix& wts) {
  out << kWtsHeader << '\n';
  out << "SCHEME " << to_string(wts.scheme());
  if (wts.scheme() == WeightScheme::fixed_split) out << ' ' << format_double(wts.split());
  out << '\n';
  for (AgentId i = 0; i < net.size(); ++i) {
    out << i << " :";
    for (double a : wts.row(net, i)) out << ' ' << format_double(a);
    out << '\n';
  }
}

ExpenditureMatrix read_weights(std::istream& in, const TradeNetwork& net) {
  std::size_t lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno) || line != kWtsHeader) bad(lineno, "not a weights file");
  WeightScheme scheme = WeightScheme::uniform_random;
  double split = 0.0;
  std::vector<double> weights(net.edge_count());
  std::vector<bool> seen(net.size(), false);
  while (next_line(in, line, lineno)) {
    if (line.rfind("SCHEME", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::string s;
      ss >> s;
      if (s == "fixed_split") {
        scheme = WeightScheme::fixed_split;
        std::string a;
        if (ss >> a) split = parse_number<double>(a, lineno);
      } else if (s != "uniform_random") {
        bad(lineno, "unknown scheme '" + s + "'");
      }
      continue;
    }
    auto [i, toks] = split_row(line, lineno);
    if (i >= net.size()) bad(lineno, "agent id out of range");
    if (seen[i]) bad(lineno, "agent listed twice");
    seen[i] = true;
    const auto begin = net.edge_begin(static_cast<AgentId>(i));
    const auto degree = net.edge_end(static_cast<AgentId>(i)) - begin;
    if (toks.size() != degree) bad(lineno, "weight count does not match supplier count");
    for (std::size_t k = 0; k < degree; ++k) weights[begin + k] = parse_number<double>(toks[k], lineno);
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!seen[i]) throw FormatError("agent " + std::to_string(i) + " has no weight line");
  }
  return ExpenditureMatrix(net, std::move(weights), scheme, split);
}

std::string run_record_header(std::uint8_t position_dim, bool with_activity) {
  std::string h = "t loser_idx pos_x";
  if (position_dim == 2) h += " pos_y";
  h += " min_profit mean_price renorm_flag log_price_scale";
  if (with_activity) h += " activity";
  return h;
}

std::string run_record_row(const StepRecord& step, std::uint8_t position_dim) {
  std::string row = std::to_string(step.t) + ' ' + std::to_string(step.loser) + ' ' +
                    std::to_string(step.position.v[0]);
  if (position_dim == 2) row += ' ' + std::to_string(step.position.v[1]);
  row += ' ' + format_double(step.min_profit) + ' ' + format_double(step.mean_price) + ' ' +
         (step.renormalized ? '1' : '0') + ' ' + format_double(step.log_price_scale);
  if (step.activity) row += ' ' + std::to_string(*step.activity);
  return row;
}

void write_run_record(std::ostream& out, const RunRecord& record, const Metadata& meta) {
  out << "# " << kRunHeader << '\n';
  bool has_transient = false;
  bool has_threshold = false;
  for (const auto& [k, v] : meta) {
    out << "# " << k << ' ' << v << '\n';
    has_transient = has_transient || k == "transient";
    has_threshold = has_threshold || k == "activity_threshold";
  }
  // The reader needs these two; fill them in from the record itself.
  if (!has_transient) out << "# transient " << record.transient << '\n';
  if (!has_threshold && record.activity_threshold) {
    out << "# activity_threshold " << format_double(*record.activity_threshold) << '\n';
  }
  const bool with_activity = !record.activity.empty();
  out << run_record_header(record.position_dim, with_activity) << '\n';
  for (std::size_t t = 0; t < record.size(); ++t) {
    StepRecord s;
    s.t = t;
    s.loser = record.loser_index[t];
    s.position = record.loser_position[t];
    s.min_profit = record.min_profit[t];
    s.mean_price = record.mean_price[t];
    s.renormalized = record.renorm_flag[t] != 0;
    s.log_price_scale = record.log_price_scale[t];
    if (with_activity) s.activity = record.activity[t];
    out << run_record_row(s, record.position_dim) << '\n';
  }
}

LoadedRun read_run_record(std::istream& in) {
  LoadedRun out;
  std::size_t lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno) || line != std::string("# ") + kRunHeader) {
    bad(lineno, "not a run record");
  }
  while (next_line(in, line, lineno) && line[0] == '#') {
    const std::string body = trim(line.substr(1));
    const auto sp = body.find(' ');
    if (sp == std::string::npos) {
      out.meta[body] = "";
    } else {
      out.meta[body.substr(0, sp)] = trim(body.substr(sp + 1));
    }
  }
  if (line.empty() || line[0] == '#') bad(lineno, "missing column header");
  std::vector<std::string> cols;
  {
    std::istringstream ss(line);
    for (std::string c; ss >> c;) cols.push_back(c);
  }
  RunRecord& rec = out.record;
  const bool two_d = cols.size() > 3 && cols[3] == "pos_y";
  const bool with_activity = !cols.empty() && cols.back() == "activity";
  if (run_record_header(two_d ? 2 : 1, with_activity) != line) bad(lineno, "unrecognized column header");
  rec.position_dim = two_d ? 2 : 1;

  if (auto it = out.meta.find("transient"); it != out.meta.end()) {
    rec.transient = parse_number<std::uint64_t>(it->second, lineno);
  }
  if (auto it = out.meta.find("activity_threshold"); it != out.meta.end()) {
    rec.activity_threshold = parse_number<double>(it->second, lineno);
  }

  std::vector<std::string> toks;
  const std::size_t ncols = cols.size();
  while (next_line(in, line, lineno)) {
    if (line[0] == '#') continue;
    toks.clear();
    std::istringstream ss(line);
    for (std::string t; ss >> t;) toks.push_back(t);
    if (toks.size() != ncols) bad(lineno, "wrong number of columns");
    std::size_t k = 0;
    const auto t = parse_number<std::uint64_t>(toks[k++], lineno);
    if (t != rec.size()) bad(lineno, "non-consecutive step index");
    rec.loser_index.push_back(parse_number<AgentId>(toks[k++], lineno));
    const auto x = parse_number<std::int32_t>(toks[k++], lineno);
    if (two_d) {
      const auto y = parse_number<std::int32_t>(toks[k++], lineno);
      rec.loser_position.push_back(coord2(x, y));
    } else {
      rec.loser_position.push_back(coord1(x));
    }
    rec.min_profit.push_back(parse_number<double>(toks[k++], lineno));
    rec.mean_price.push_back(parse_number<double>(toks[k++], lineno));
    const auto flag = parse_number<int>(toks[k++], lineno);
    if (flag != 0 && flag != 1) bad(lineno, "renorm_flag must be 0 or 1");
    rec.renorm_flag.push_back(static_cast<std::uint8_t>(flag));
    rec.log_price_scale.push_back(parse_number<double>(toks[k++], lineno));
    if (with_activity) rec.activity.push_back(parse_number<std::uint32_t>(toks[k++], lineno));
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const SimState& state) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(kCkptMagic, sizeof kCkptMagic);
    put<std::uint32_t>(out, kCkptVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(state.prices.size()));
    put<std::uint64_t>(out, state.t);
    put<double>(out, state.log_price_scale);
    put<double>(out, state.renorm_level);
    for (double p : state.prices.values()) put<double>(out, p);
    std::ostringstream rs;
    rs << state.rng;
    const std::string rng_text = rs.str();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(rng_text.size()));
    out.write(rng_text.data(), static_cast<std::streamsize>(rng_text.size()));
    if (!out) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SimState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCkptMagic, sizeof magic) != 0) {
    throw FormatError(path.string() + " is not a checkpoint");
  }
  if (get<std::uint32_t>(in) != kCkptVersion) throw FormatError("unsupported checkpoint version");
  SimState s;
  const auto n = get<std::uint32_t>(in);
  s.t = get<std::uint64_t>(in);
  s.log_price_scale = get<double>(in);
  s.renorm_level = get<double>(in);
  std::vector<double> prices(n);
  for (auto& p : prices) p = get<double>(in);
  s.prices = PriceVector(std::move(prices));
  const auto len = get<std::uint32_t>(in);
  std::string rng_text(len, '\0');
  in.read(rng_text.data(), len);
  if (!in) throw FormatError("truncated checkpoint");
  std::istringstream rs(rng_text);
  rs >> s.rng;
  if (!rs) throw FormatError("corrupt generator state in checkpoint");
  return s;
}

}  // namespace socmarket
