#include "socmarket/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "socmarket/errors.hpp"
#include "socmarket/io.hpp"

namespace socmarket {

namespace pt = boost::property_tree;

namespace {

std::string field(const char* section, const char* key) { return std::string(section) + "." + key; }

template <typename T>
T parse_value(const std::string& name, const std::string& text) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) throw ConfigError(name, "cannot parse '" + text + "'");
  return v;
}

bool parse_bool(const std::string& name, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(name, "expected true or false, got '" + text + "'");
}

// Rethrows parser errors from the enum helpers as config errors.
template <typename F>
auto parse_enum(const std::string& name, const std::string& text, F parse) {
  try {
    return parse(text);
  } catch (const InvalidParameter& e) {
    throw ConfigError(name, e.what());
  }
}

DurationFitRange parse_duration_fit(std::string_view t) {
  if (t == "matched") return DurationFitRange::matched;
  if (t == "explicit") return DurationFitRange::explicit_range;
  throw InvalidParameter("expected matched or explicit");
}

DecaySource parse_decay_source(std::string_view t) {
  if (t == "mean_price") return DecaySource::mean_price;
  if (t == "min_profit") return DecaySource::min_profit;
  throw InvalidParameter("expected mean_price or min_profit");
}

WeightScheme parse_scheme(std::string_view t) {
  if (t == "fixed_split") return WeightScheme::fixed_split;
  if (t == "uniform_random") return WeightScheme::uniform_random;
  throw InvalidParameter("expected fixed_split or uniform_random");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& name, const std::string& v)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"topology.kind",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.topology.kind = parse_enum(n, v, parse_network_kind);
       }},
      {"topology.corner",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.topology.corner = parse_enum(n, v, parse_corner);
       }},
      {"topology.n_agents",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.topology.n_agents = parse_value<std::size_t>(n, v);
       }},
      {"topology.side",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.topology.side = parse_value<std::int32_t>(n, v);
       }},
      {"topology.alpha",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.topology.alpha = parse_value<double>(n, v);
       }},
      {"weights.scheme",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.weights.scheme = parse_enum(n, v, parse_scheme);
       }},
      {"weights.split",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.weights.split = parse_value<double>(n, v);
       }},
      {"simulation.price_floor",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.price_floor = parse_value<double>(n, v);
       }},
      {"simulation.eta_max",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.eta_max = parse_value<double>(n, v);
       }},
      {"simulation.total_steps",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.total_steps = parse_value<std::uint64_t>(n, v);
       }},
      {"simulation.transient_steps",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.transient_steps = parse_value<std::uint64_t>(n, v);
       }},
      {"simulation.seed",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.seed = parse_value<std::uint64_t>(n, v);
       }},
      {"simulation.renorm_threshold",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.sim.renorm_threshold = parse_value<double>(n, v);
       }},
      {"simulation.engine",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.engine = parse_enum(n, v, parse_engine_kind);
       }},
      {"simulation.audit_interval",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.audit_interval = parse_value<std::uint64_t>(n, v);
       }},
      {"simulation.checkpoint_interval",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.checkpoint_interval = parse_value<std::uint64_t>(n, v);
       }},
      {"analysis.f0",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.f0 = parse_value<double>(n, v);
       }},
      {"analysis.f0_quantile",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.f0_quantile = parse_value<double>(n, v);
       }},
      {"analysis.f0_mean_active",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.f0_mean_active = parse_value<double>(n, v);
       }},
      {"analysis.f0_fallback",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.f0_fallback = parse_bool(n, v);
       }},
      {"analysis.pilot_steps",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.pilot_steps = parse_value<std::uint64_t>(n, v);
       }},
      {"analysis.pilot_stride",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.pilot_stride = parse_value<std::uint64_t>(n, v);
       }},
      {"analysis.size_fit_min",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.size_fit_min = parse_value<double>(n, v);
       }},
      {"analysis.size_fit_max",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.size_fit_max = parse_value<double>(n, v);
       }},
      {"analysis.duration_fit",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.duration_fit = parse_enum(n, v, parse_duration_fit);
       }},
      {"analysis.duration_fit_min",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.duration_fit_min = parse_value<double>(n, v);
       }},
      {"analysis.duration_fit_max",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.duration_fit_max = parse_value<double>(n, v);
       }},
      {"analysis.min_per_duration",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.min_per_duration = parse_value<std::size_t>(n, v);
       }},
      {"analysis.distance_mode",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.distance_mode = parse_enum(n, v, parse_distance_mode);
       }},
      {"analysis.distance_metric",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.distance_metric = parse_enum(n, v, parse_distance_metric);
       }},
      {"analysis.decay_source",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.decay_source = parse_enum(n, v, parse_decay_source);
       }},
      {"analysis.decay_smoothing",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.analysis.decay_smoothing = parse_value<std::size_t>(n, v);
       }},
      {"ensemble.runs",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.ensemble.runs = parse_value<std::uint32_t>(n, v);
       }},
      {"ensemble.workers",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.ensemble.workers = parse_value<std::uint32_t>(n, v);
       }},
      {"output.dir",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output.dir = v; }},
      {"output.write_records",
       [](ExperimentConfig& c, const std::string& n, const std::string& v) {
         c.output.write_records = parse_bool(n, v);
       }},
  };
  return table;
}

bool is_lattice(NetworkKind k) {
  return k == NetworkKind::corner || k == NetworkKind::manhattan || k == NetworkKind::f_lattice;
}

void check_fit_range(const char* lo_key, double lo, const char* hi_key, double hi) {
  if (!(lo >= 1.0) || !std::isfinite(lo)) throw ConfigError(field("analysis", lo_key), "must be >= 1");
  if (!(hi > lo) || !std::isfinite(hi)) {
    throw ConfigError(field("analysis", hi_key), "must exceed " + std::string(lo_key));
  }
}

}  // namespace

std::string_view to_string(DurationFitRange r) noexcept {
  return r == DurationFitRange::matched ? "matched" : "explicit";
}

std::string_view to_string(DecaySource s) noexcept {
  return s == DecaySource::mean_price ? "mean_price" : "min_profit";
}

std::size_t TopologySpec::agent_count() const {
  if (is_lattice(kind)) return static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
  return n_agents;
}

void ExperimentConfig::validate() const {
  const auto& t = topology;
  switch (t.kind) {
    case NetworkKind::ring:
      if (t.n_agents < 3) throw ConfigError("topology.n_agents", "ring needs at least 3 agents");
      break;
    case NetworkKind::er_embedded:
      if (t.n_agents < 2) throw ConfigError("topology.n_agents", "ER network needs at least 2 agents");
      if (!(t.alpha > 0.0 && t.alpha < 1.0)) throw ConfigError("topology.alpha", "must lie in (0, 1)");
      break;
    case NetworkKind::corner:
      if (t.side < 3) throw ConfigError("topology.side", "corner lattice needs side >= 3");
      break;
    case NetworkKind::manhattan:
    case NetworkKind::f_lattice:
      if (t.side < 4 || t.side % 2 != 0) throw ConfigError("topology.side", "needs an even side >= 4");
      break;
  }
  if (is_lattice(t.kind) && static_cast<double>(t.side) * t.side > std::numeric_limits<std::int32_t>::max()) {
    throw ConfigError("topology.side", "too large");
  }
  if (weights.scheme == WeightScheme::fixed_split) {
    if (t.kind == NetworkKind::er_embedded) {
      throw ConfigError("weights.scheme", "fixed_split needs exactly two suppliers per agent; use uniform_random");
    }
    if (!(weights.split > 0.0 && weights.split < 1.0)) throw ConfigError("weights.split", "must lie in (0, 1)");
  }

  try {
    sim.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("simulation." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
  }
  if (checkpoint_interval == 0) throw ConfigError("simulation.checkpoint_interval", "must be positive");

  const auto& a = analysis;
  if (a.f0 && a.f0_quantile) throw ConfigError("analysis.f0_quantile", "give either f0 or f0_quantile, not both");
  if (a.f0 && !std::isfinite(*a.f0)) throw ConfigError("analysis.f0", "must be finite");
  if (a.f0_quantile && !(*a.f0_quantile > 0.0 && *a.f0_quantile < 1.0)) {
    throw ConfigError("analysis.f0_quantile", "must lie in (0, 1)");
  }
  const double n = static_cast<double>(t.agent_count());
  if (!(a.f0_mean_active > 0.0 && a.f0_mean_active < n)) {
    throw ConfigError("analysis.f0_mean_active", "must lie in (0, N)");
  }
  if (a.pilot_steps == 0) throw ConfigError("analysis.pilot_steps", "must be positive");
  if (a.pilot_stride == 0) throw ConfigError("analysis.pilot_stride", "must be positive");
  if (sim.transient_steps + a.pilot_steps > sim.total_steps) {
    throw ConfigError("analysis.pilot_steps", "pilot must fit inside the run (transient + pilot <= total)");
  }
  check_fit_range("size_fit_min", a.size_fit_min, "size_fit_max", a.size_fit_max);
  if (a.duration_fit == DurationFitRange::explicit_range) {
    check_fit_range("duration_fit_min", a.duration_fit_min, "duration_fit_max", a.duration_fit_max);
  }
  if (a.min_per_duration < 1) throw ConfigError("analysis.min_per_duration", "must be >= 1");
  if (a.decay_smoothing < 1) throw ConfigError("analysis.decay_smoothing", "must be >= 1");

  if (ensemble.runs < 1) throw ConfigError("ensemble.runs", "must be >= 1");
  if (ensemble.workers < 1) throw ConfigError("ensemble.workers", "must be >= 1");
  if (output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
}

namespace {

std::string result_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[topology]\n";
  o << "kind = " << to_string(c.topology.kind) << '\n';
  o << "corner = " << to_string(c.topology.corner) << '\n';
  o << "n_agents = " << c.topology.n_agents << '\n';
  o << "side = " << c.topology.side << '\n';
  o << "alpha = " << format_double(c.topology.alpha) << '\n';
  o << "\n[weights]\n";
  o << "scheme = " << to_string(c.weights.scheme) << '\n';
  o << "split = " << format_double(c.weights.split) << '\n';
  o << "\n[simulation]\n";
  o << "price_floor = " << format_double(c.sim.price_floor) << '\n';
  o << "eta_max = " << format_double(c.sim.eta_max) << '\n';
  o << "total_steps = " << c.sim.total_steps << '\n';
  o << "transient_steps = " << c.sim.transient_steps << '\n';
  o << "seed = " << c.sim.seed << '\n';
  o << "renorm_threshold = " << format_double(c.sim.renorm_threshold) << '\n';
  o << "engine = " << to_string(c.engine) << '\n';
  o << "audit_interval = " << c.audit_interval << '\n';
  o << "checkpoint_interval = " << c.checkpoint_interval << '\n';
  o << "\n[analysis]\n";
  if (c.analysis.f0) o << "f0 = " << format_double(*c.analysis.f0) << '\n';
  if (c.analysis.f0_quantile) o << "f0_quantile = " << format_double(*c.analysis.f0_quantile) << '\n';
  o << "f0_mean_active = " << format_double(c.analysis.f0_mean_active) << '\n';
  o << "f0_fallback = " << (c.analysis.f0_fallback ? "true" : "false") << '\n';
  o << "pilot_steps = " << c.analysis.pilot_steps << '\n';
  o << "pilot_stride = " << c.analysis.pilot_stride << '\n';
  o << "size_fit_min = " << format_double(c.analysis.size_fit_min) << '\n';
  o << "size_fit_max = " << format_double(c.analysis.size_fit_max) << '\n';
  o << "duration_fit = " << to_string(c.analysis.duration_fit) << '\n';
  o << "duration_fit_min = " << format_double(c.analysis.duration_fit_min) << '\n';
  o << "duration_fit_max = " << format_double(c.analysis.duration_fit_max) << '\n';
  o << "min_per_duration = " << c.analysis.min_per_duration << '\n';
  o << "distance_mode = " << to_string(c.analysis.distance_mode) << '\n';
  o << "distance_metric = " << to_string(c.analysis.distance_metric) << '\n';
  o << "decay_source = " << to_string(c.analysis.decay_source) << '\n';
  o << "decay_smoothing = " << c.analysis.decay_smoothing << '\n';
  o << "\n[ensemble]\n";
  o << "runs = " << c.ensemble.runs << '\n';
  return o.str();
}

}  // namespace

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  o << result_text(*this);
  o << "workers = " << ensemble.workers << '\n';
  o << "\n[output]\n";
  o << "dir = " << output.dir.string() << '\n';
  o << "write_records = " << (output.write_records ? "true" : "false") << '\n';
  return o.str();
}

std::string ExperimentConfig::canonical_text() const { return result_text(*this); }

std::string ExperimentConfig::hash() const {
  const std::string text = result_text(*this);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("file", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "key outside of any section");
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      auto it = table.find(name);
      if (it == table.end()) throw ConfigError(name, "unknown key");
      std::string value = node.get_value<std::string>();
      // Allow trailing comments after values.
      if (const auto hash = value.find_first_of(";#"); hash != std::string::npos) {
        value = value.substr(0, hash);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
      }
      it->second(cfg, name, value);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace socmarket
