#include "socmarket/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "socmarket/errors.hpp"
#include "socmarket/io.hpp"
#include "socmarket/kernels.hpp"

namespace socmarket {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kPilotMinEvents = 100;
constexpr std::size_t kMinEvents = 1000;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Marks the output directory as incomplete for the duration of a command.
class PartialMarker {
 public:
  explicit PartialMarker(const fs::path& dir) : path_(dir / "PARTIAL") {
    fs::create_directories(dir);
    std::ofstream(path_) << "incomplete\n";
  }
  void fail(const std::string& what) {
    std::ofstream out(path_, std::ios::trunc);
    out << "failed: " << what << '\n';
  }
  void done() { fs::remove(path_); }

 private:
  fs::path path_;
};

template <typename F>
auto guarded(const fs::path& dir, F body) {
  PartialMarker marker(dir);
  try {
    auto result = body();
    marker.done();
    return result;
  } catch (const std::exception& e) {
    marker.fail(e.what());
    throw;
  }
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(seeds[k]);
  }
  return s;
}

std::vector<std::uint64_t> seeds_of(const std::vector<RunSource>& runs) {
  std::vector<std::uint64_t> s;
  for (const auto& r : runs) s.push_back(r.seed);
  return s;
}

std::string csv_preamble(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  return "# config_hash " + cfg.hash() + "\n# seeds " + seeds_text(seeds) + "\n";
}

Json base_json(const char* format, const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  Json j;
  j["format"] = format;
  j["version"] = kVersion;
  j["config_hash"] = cfg.hash();
  j["seeds"] = seeds;
  j["config"] = cfg.canonical_text();
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json fit_json(const std::optional<PowerLawFit>& fit) {
  if (!fit) return nullptr;
  Json j;
  j["exponent"] = fit->exponent;
  j["std_error"] = fit->std_error;
  j["x_min"] = fit->x_min;
  j["x_max"] = fit->x_max;
  j["points"] = fit->points;
  j["r_squared"] = fit->r_squared;
  return j;
}

Json threshold_json(std::uint64_t seed, const ThresholdChoice& t) {
  Json j;
  j["seed"] = seed;
  j["f0"] = t.f0;
  j["mode"] = std::string(to_string(t.mode));
  j["quantile"] = t.quantile ? Json(*t.quantile) : Json(nullptr);
  j["pilot_mean_activity"] = t.pilot_mean_activity;
  j["pilot_events"] = t.pilot_events;
  return j;
}

std::string binned_csv(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                       const BinnedDistribution& d) {
  std::string s = csv_preamble(cfg, seeds) + "x,density,count,bin_lo,bin_hi\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    s += format_double(d.representative_x[k]) + ',' + format_double(d.density[k]) + ',' +
         std::to_string(d.count[k]) + ',' + std::to_string(d.bin_lo[k]) + ',' +
         std::to_string(d.bin_hi[k]) + '\n';
  }
  return s;
}

// Runs fn(index, seed) for every seed on up to `workers` threads. The first
// failure (by seed order) is rethrown after all workers stop.
template <typename F>
void for_each_seed(const std::vector<std::uint64_t>& seeds, std::uint32_t workers, F fn) {
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < seeds.size();) {
      try {
        fn(k, seeds[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(workers, seeds.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SimConfig sim_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  SimConfig s = cfg.sim;
  s.seed = seed;
  return s;
}

std::string extents_text(const Coord& e) {
  std::string s = std::to_string(e.v[0]);
  if (e.dim == 2) s += ' ' + std::to_string(e.v[1]);
  return s;
}

std::string kind_text(const TradeNetwork& net) {
  std::string tag(to_string(net.kind()));
  if (net.kind() == NetworkKind::corner) tag += "(" + std::string(to_string(net.corner())) + ")";
  return tag;
}

Metadata record_meta(const ExperimentConfig& cfg, std::uint64_t seed, const BuiltSystem& sys,
                     const ThresholdChoice& th) {
  Metadata m;
  m.emplace_back("config_hash", cfg.hash());
  m.emplace_back("seed", std::to_string(seed));
  m.emplace_back("kind", kind_text(sys.net));
  m.emplace_back("extents", extents_text(sys.net.extents()));
  m.emplace_back("n_agents", std::to_string(sys.net.size()));
  m.emplace_back("eta_max", format_double(cfg.sim.eta_max));
  m.emplace_back("transient", std::to_string(cfg.sim.transient_steps));
  m.emplace_back("activity_threshold", format_double(th.f0));
  m.emplace_back("threshold_mode", std::string(to_string(th.mode)));
  if (th.quantile) m.emplace_back("threshold_quantile", format_double(*th.quantile));
  return m;
}

std::string record_name(std::uint64_t seed) { return "run_seed" + std::to_string(seed) + ".txt"; }
std::string checkpoint_name(std::uint64_t seed) { return "run_seed" + std::to_string(seed) + ".ckpt"; }

// Keeps the metadata and header lines and the first `rows` data rows.
void truncate_record(const fs::path& path, std::uint64_t rows) {
  std::ifstream in(path);
  if (!in) throw Error("cannot resume: " + path.string() + " is missing");
  std::string kept;
  std::string line;
  std::uint64_t data = 0;
  bool header_seen = false;
  while (data < rows && std::getline(in, line)) {
    if (!header_seen) {
      if (line.empty() || line[0] != '#') header_seen = true;
    } else {
      ++data;
    }
    kept += line;
    kept += '\n';
  }
  if (data < rows) throw Error("cannot resume: " + path.string() + " holds fewer rows than the checkpoint");
  in.close();
  write_file(path, kept);
}

ThresholdChoice run_one(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, bool resume) {
  const BuiltSystem sys = build_system(cfg, seed);
  const ThresholdChoice th = resolve_threshold(cfg, sys, seed);
  RunOptions ro;
  ro.engine = cfg.engine;
  ro.activity_threshold = th.f0;
  ro.audit_interval = cfg.audit_interval;
  const SimConfig sc = sim_for(cfg, seed);
  const fs::path rec_path = dir / record_name(seed);
  const fs::path ckpt_path = dir / checkpoint_name(seed);
  const std::uint8_t dim = sys.net.extents().dim;

  std::optional<Simulation> sim;
  std::ofstream out;
  if (resume && fs::exists(ckpt_path)) {
    SimState state = read_checkpoint(ckpt_path);
    if (cfg.output.write_records) {
      truncate_record(rec_path, state.t);
      out.open(rec_path, std::ios::app);
    }
    sim.emplace(sys.net, sys.wts, sc, ro, std::move(state));
  } else {
    sim.emplace(sys.net, sys.wts, sc, ro);
    if (cfg.output.write_records) {
      out.open(rec_path, std::ios::trunc);
      out << "# soc-market-run v1\n";
      for (const auto& [k, v] : record_meta(cfg, seed, sys, th)) out << "# " << k << ' ' << v << '\n';
      out << run_record_header(dim, true) << '\n';
    }
  }
  if (cfg.output.write_records && !out) throw Error("cannot write " + rec_path.string());

  while (!sim->done()) {
    const StepRecord step = sim->step();
    if (cfg.output.write_records) out << run_record_row(step, dim) << '\n';
    const auto t = sim->state().t;
    if (t % cfg.checkpoint_interval == 0 && !sim->done()) {
      if (cfg.output.write_records) {
        out.flush();
        if (!out) throw Error("failed writing " + rec_path.string());
      }
      write_checkpoint(ckpt_path, sim->state());
    }
  }
  if (cfg.output.write_records) {
    out.close();
    if (!out) throw Error("failed writing " + rec_path.string());
  }
  fs::remove(ckpt_path);
  return th;
}

}  // namespace

std::string_view to_string(ThresholdMode m) noexcept {
  switch (m) {
    case ThresholdMode::absolute: return "absolute";
    case ThresholdMode::quantile: return "quantile";
    case ThresholdMode::fallback_quantile: return "fallback_quantile";
  }
  return "unknown";
}

void apply_overrides(ExperimentConfig& cfg, const CommandOptions& opts) {
  if (opts.seed) cfg.sim.seed = *opts.seed;
  if (opts.out) cfg.output.dir = *opts.out;
  if (opts.engine) cfg.engine = *opts.engine;
  if (opts.workers) cfg.ensemble.workers = *opts.workers;
  if (opts.f0 && opts.f0_quantile) throw ConfigError("f0", "give either --f0 or --f0-quantile");
  if (opts.f0) {
    cfg.analysis.f0 = *opts.f0;
    cfg.analysis.f0_quantile.reset();
  }
  if (opts.f0_quantile) {
    cfg.analysis.f0_quantile = *opts.f0_quantile;
    cfg.analysis.f0.reset();
  }
  cfg.validate();
}

ExperimentConfig load_config_or_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError("file", e.what());
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw ConfigError("file", std::string("bad JSON: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_string()) {
      throw ConfigError("file", path.string() + " has no embedded config");
    }
    return parse_config(j["config"].get<std::string>());
  }
  return parse_config(text);
}

std::vector<std::uint64_t> ensemble_seeds(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds(cfg.ensemble.runs);
  for (std::uint32_t k = 0; k < cfg.ensemble.runs; ++k) seeds[k] = cfg.sim.seed + k;
  return seeds;
}

BuiltSystem build_system(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& t = cfg.topology;
  auto net = [&]() -> TradeNetwork {
    switch (t.kind) {
      case NetworkKind::ring: return build_ring(t.n_agents);
      case NetworkKind::corner: return build_corner_lattice(t.side, t.corner);
      case NetworkKind::manhattan: return build_manhattan(t.side);
      case NetworkKind::f_lattice: return build_f_lattice(t.side);
      case NetworkKind::er_embedded: {
        Rng rng = make_rng(seed, Stream::topology);
        return build_er_embedded(t.n_agents, t.alpha, rng);
      }
    }
    throw InvalidParameter("unknown topology");
  }();
  ExpenditureMatrix wts;
  if (cfg.weights.scheme == WeightScheme::fixed_split) {
    wts = assign_weights_fixed(net, cfg.weights.split);
  } else {
    Rng rng = make_rng(seed, Stream::weights);
    wts = assign_weights_uniform(net, rng);
  }
  return {std::move(net), std::move(wts)};
}

ThresholdChoice resolve_threshold(const ExperimentConfig& cfg, const BuiltSystem& sys, std::uint64_t seed) {
  const auto& a = cfg.analysis;
  ThresholdChoice choice;
  if (a.f0 && !a.f0_fallback) {
    choice.f0 = *a.f0;
    return choice;
  }

  SimConfig pilot = sim_for(cfg, seed);
  pilot.total_steps = cfg.sim.transient_steps + a.pilot_steps;
  std::vector<double> samples;
  std::vector<std::uint32_t> activity;
  RunOptions ro;
  ro.engine = cfg.engine;
  ro.observer = [&](std::uint64_t t, const MarketSnapshot& snap, double mean) {
    if (t < cfg.sim.transient_steps) return;
    if (a.f0) {
      activity.push_back(static_cast<std::uint32_t>(kernels::count_below_scaled(snap.profit, mean, *a.f0)));
    }
    if ((t - cfg.sim.transient_steps) % a.pilot_stride == 0) {
      for (double s : snap.profit) samples.push_back(s / mean);
    }
  };
  Simulation sim(sys.net, sys.wts, pilot, std::move(ro));
  while (!sim.done()) sim.step();

  if (a.f0) {
    const auto events = extract_avalanches(activity);
    std::size_t populated = 0;
    if (!events.empty()) {
      std::vector<std::uint64_t> sizes;
      for (const auto& e : events) sizes.push_back(e.size);
      const auto dist = log_bin(sizes);
      for (std::size_t k = 0; k < dist.size(); ++k) {
        const double x = dist.representative_x[k];
        if (x >= a.size_fit_min && x <= a.size_fit_max && dist.count[k] > 0) ++populated;
      }
    }
    double total = 0.0;
    for (auto y : activity) total += y;
    choice.pilot_mean_activity = activity.empty() ? 0.0 : total / static_cast<double>(activity.size());
    choice.pilot_events = events.size();
    if (events.size() >= kPilotMinEvents && populated >= 3) {
      choice.f0 = *a.f0;
      return choice;
    }
    choice.mode = ThresholdMode::fallback_quantile;
  } else {
    choice.mode = ThresholdMode::quantile;
  }
  const double q = a.f0_quantile ? *a.f0_quantile : a.f0_mean_active / static_cast<double>(sys.net.size());
  choice.quantile = q;
  choice.f0 = quantile(samples, q);
  std::size_t below = 0;
  for (double v : samples) below += v < choice.f0 ? 1 : 0;
  choice.pilot_mean_activity =
      static_cast<double>(below) / static_cast<double>(samples.size()) * static_cast<double>(sys.net.size());
  return choice;
}

std::vector<RunSource> simulate_ensemble(const ExperimentConfig& cfg, bool with_activity) {
  const auto seeds = ensemble_seeds(cfg);
  std::vector<RunSource> runs(seeds.size());
  for_each_seed(seeds, cfg.ensemble.workers, [&](std::size_t k, std::uint64_t seed) {
    const BuiltSystem sys = build_system(cfg, seed);
    RunSource& r = runs[k];
    r.seed = seed;
    RunOptions ro;
    ro.engine = cfg.engine;
    ro.audit_interval = cfg.audit_interval;
    if (with_activity) {
      r.threshold = resolve_threshold(cfg, sys, seed);
      ro.activity_threshold = r.threshold->f0;
    }
    r.record = run(sys.net, sys.wts, sim_for(cfg, seed), ro);
    r.kind = sys.net.kind();
    r.extents = sys.net.extents();
    r.n_agents = sys.net.size();
    r.eta_max = cfg.sim.eta_max;
    r.source = "live";
  });
  return runs;
}

std::vector<RunSource> load_records(const std::vector<fs::path>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const auto name = e.path().filename().string();
        if (name.rfind("run_seed", 0) == 0 && e.path().extension() == ".txt") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw Error("no run records in " + p.string());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<RunSource> runs;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw Error("cannot open run record " + f.string());
    LoadedRun loaded = read_run_record(in);
    RunSource r;
    r.source = f.string();
    r.record = std::move(loaded.record);
    auto need = [&](const char* key) -> const std::string& {
      auto it = loaded.meta.find(key);
      if (it == loaded.meta.end()) throw FormatError(f.string() + ": missing metadata '" + key + "'");
      return it->second;
    };
    r.seed = std::stoull(need("seed"));
    r.n_agents = std::stoull(need("n_agents"));
    r.eta_max = std::stod(need("eta_max"));
    std::string kind = need("kind");
    if (const auto paren = kind.find('('); paren != std::string::npos) kind = kind.substr(0, paren);
    r.kind = parse_network_kind(kind);
    std::istringstream ext(need("extents"));
    std::int32_t l1 = 0;
    std::int32_t l2 = 0;
    ext >> l1;
    r.extents = (ext >> l2) ? coord2(l1, l2) : coord1(l1);
    if (r.record.activity_threshold) {
      ThresholdChoice th;
      th.f0 = *r.record.activity_threshold;
      if (auto it = loaded.meta.find("threshold_mode"); it != loaded.meta.end()) {
        if (it->second == "quantile") th.mode = ThresholdMode::quantile;
        if (it->second == "fallback_quantile") th.mode = ThresholdMode::fallback_quantile;
      }
      if (auto it = loaded.meta.find("threshold_quantile"); it != loaded.meta.end()) {
        th.quantile = std::stod(it->second);
      }
      r.threshold = th;
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

RunResult cmd_run(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = cfg.output.dir;
  return guarded(dir, [&] {
    RunResult result;
    result.seeds = ensemble_seeds(cfg);
    result.thresholds.resize(result.seeds.size());
    for_each_seed(result.seeds, cfg.ensemble.workers, [&](std::size_t k, std::uint64_t seed) {
      result.thresholds[k] = run_one(cfg, seed, dir, opts.resume);
    });

    Json summary = base_json("soc-market-summary v1", cfg, result.seeds);
    Json runs = Json::array();
    Json files = Json::array();
    for (std::size_t k = 0; k < result.seeds.size(); ++k) {
      Json r;
      r["seed"] = result.seeds[k];
      r["steps"] = cfg.sim.total_steps;
      r["threshold"] = threshold_json(result.seeds[k], result.thresholds[k]);
      if (cfg.output.write_records) {
        r["record"] = record_name(result.seeds[k]);
        files.push_back(record_name(result.seeds[k]));
        result.files.push_back(dir / record_name(result.seeds[k]));
      }
      runs.push_back(r);
    }
    summary["runs"] = runs;
    write_file(dir / "summary.json", dump(summary));
    files.push_back("summary.json");
    result.files.push_back(dir / "summary.json");

    Json manifest = base_json("soc-market-manifest v1", cfg, result.seeds);
    manifest["command"] = "run";
    manifest["files"] = files;
    write_file(dir / "manifest.json", dump(manifest));
    result.files.push_back(dir / "manifest.json");
    return result;
  });
}

WalkResult analyze_walk(const ExperimentConfig& cfg, const std::vector<RunSource>& runs) {
  if (runs.empty()) throw Error("no runs to analyze");
  WalkResult result;
  result.primary_metric = cfg.analysis.distance_metric;
  result.alternate_metric =
      result.primary_metric == DistanceMetric::norm ? DistanceMetric::component : DistanceMetric::norm;
  const Coord extents = runs.front().extents;
  result.fitted = runs.front().kind != NetworkKind::er_embedded;

  // Jumps never cross run boundaries; per-run distance lists are pooled.
  auto pooled = [&](DistanceMetric metric) {
    std::vector<double> all;
    for (const auto& r : runs) {
      if (!(r.extents == extents)) throw TopologyMismatch("runs have different extents");
      const auto d = jump_distances(r.record.post_transient_positions(), extents,
                                    cfg.analysis.distance_mode, metric);
      all.insert(all.end(), d.begin(), d.end());
    }
    return jump_stats_from_distances(std::move(all), extents,
                                     JumpFitOptions{cfg.analysis.distance_mode, metric, result.fitted});
  };
  result.primary = pooled(result.primary_metric);
  result.alternate = pooled(result.alternate_metric);

  if (result.primary.low_statistics) {
    result.warnings.push_back("only " + std::to_string(result.primary.distances.size()) +
                              " loser jumps (want >= 1000)");
  }
  if (!result.fitted) {
    result.warnings.push_back("network has no spatial structure; no power law fitted");
  } else {
    if (!result.primary.near) result.warnings.push_back("near-branch fit failed (too few populated bins)");
    if (!result.primary.far) result.warnings.push_back("far-branch fit failed (too few populated bins)");
  }
  return result;
}

namespace {

Json walk_branch_json(const JumpStats& s, DistanceMetric metric) {
  Json j;
  j["metric"] = std::string(to_string(metric));
  j["jumps"] = s.distances.size();
  j["pi1"] = fit_json(s.near);
  j["pi2"] = fit_json(s.far);
  return j;
}

std::string density_csv(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds,
                        const JumpStats& s) {
  std::string out = csv_preamble(cfg, seeds) + "branch,x,density\n";
  for (const auto& [x, d] : s.near_density) out += "near," + format_double(x) + ',' + format_double(d) + '\n';
  for (const auto& [x, d] : s.far_density) out += "far," + format_double(x) + ',' + format_double(d) + '\n';
  return out;
}

std::vector<RunSource> sources(const ExperimentConfig& cfg, const CommandOptions& opts, bool with_activity) {
  if (!opts.records.empty()) return load_records(opts.records);
  return simulate_ensemble(cfg, with_activity);
}

}  // namespace

WalkResult cmd_walk_stats(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = cfg.output.dir;
  return guarded(dir, [&] {
    const auto runs = sources(cfg, opts, false);
    WalkResult result = analyze_walk(cfg, runs);
    const auto seeds = seeds_of(runs);

    std::string dist = csv_preamble(cfg, seeds) + "distance\n";
    for (double d : result.primary.distances) dist += format_double(d) + '\n';
    write_file(dir / "walk_distances.csv", dist);

    std::string cum = csv_preamble(cfg, seeds) + "xi,F\n";
    for (const auto& [x, f] : result.primary.cumulative) cum += format_double(x) + ',' + format_double(f) + '\n';
    write_file(dir / "walk_cumulative.csv", cum);

    if (result.fitted) write_file(dir / "walk_density.csv", density_csv(cfg, seeds, result.primary));

    Json j = base_json("soc-market-walk v1", cfg, seeds);
    j["extents"] = extents_text(runs.front().extents);
    j["distance_mode"] = std::string(to_string(cfg.analysis.distance_mode));
    j["power_law_fitted"] = result.fitted;
    j["low_statistics"] = result.primary.low_statistics;
    j["primary"] = walk_branch_json(result.primary, result.primary_metric);
    j["alternate"] = walk_branch_json(result.alternate, result.alternate_metric);
    j["warnings"] = result.warnings;
    write_file(dir / "walk_fit.json", dump(j));
    return result;
  });
}

AvalancheResult analyze_avalanches(const ExperimentConfig& cfg, const std::vector<RunSource>& runs) {
  if (runs.empty()) throw Error("no runs to analyze");
  AvalancheResult result;
  for (const auto& r : runs) {
    if (r.record.activity.size() != r.record.size()) {
      throw FormatError(r.source + ": run carries no activity series");
    }
    if (r.threshold) result.thresholds.push_back(*r.threshold);
    const auto ev = extract_avalanches(r.record.post_transient_activity());
    result.events.insert(result.events.end(), ev.begin(), ev.end());
  }
  const auto& a = cfg.analysis;
  if (result.events.size() < kMinEvents) {
    result.warnings.push_back("only " + std::to_string(result.events.size()) + " avalanches (want >= 1000)");
  }
  if (result.events.empty()) return result;

  std::vector<std::uint64_t> sizes;
  std::vector<std::uint64_t> durations;
  for (const auto& e : result.events) {
    sizes.push_back(e.size);
    durations.push_back(e.duration);
  }
  result.size_dist = log_bin(sizes);
  result.duration_dist = log_bin(durations);

  try {
    result.size_fit = fit_power_law(*result.size_dist, a.size_fit_min, a.size_fit_max);
  } catch (const FitDomainError& e) {
    result.warnings.push_back(std::string("size fit: ") + e.what());
  }
  try {
    result.gamma = gamma_st(result.events, a.min_per_duration);
  } catch (const FitDomainError& e) {
    result.warnings.push_back(std::string("gamma_ST: ") + e.what());
  }

  if (a.duration_fit == DurationFitRange::matched && result.gamma && result.gamma->gamma > 0.0) {
    result.duration_fit_min = std::pow(a.size_fit_min, 1.0 / result.gamma->gamma);
    result.duration_fit_max = std::pow(a.size_fit_max, 1.0 / result.gamma->gamma);
  } else {
    if (a.duration_fit == DurationFitRange::matched) {
      result.warnings.push_back("matched duration range unavailable; using duration_fit_min/max");
    }
    result.duration_fit_min = a.duration_fit_min;
    result.duration_fit_max = a.duration_fit_max;
  }
  try {
    result.duration_fit = fit_power_law(*result.duration_dist, result.duration_fit_min, result.duration_fit_max);
  } catch (const FitDomainError& e) {
    result.warnings.push_back(std::string("duration fit: ") + e.what());
  }
  if (result.size_fit && result.duration_fit && result.gamma) {
    result.scaling = scaling_relation(*result.size_fit, *result.duration_fit, *result.gamma);
  }
  return result;
}

AvalancheResult cmd_avalanche_stats(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = cfg.output.dir;
  return guarded(dir, [&] {
    if (!opts.records.empty() && (opts.f0 || opts.f0_quantile)) {
      throw ConfigError("analysis.f0", "recorded runs carry the activity of the threshold they were run with");
    }
    const auto runs = sources(cfg, opts, true);
    AvalancheResult result = analyze_avalanches(cfg, runs);
    const auto seeds = seeds_of(runs);
    if (result.size_dist) write_file(dir / "avalanche_size.csv", binned_csv(cfg, seeds, *result.size_dist));
    if (result.duration_dist) {
      write_file(dir / "avalanche_duration.csv", binned_csv(cfg, seeds, *result.duration_dist));
    }
    Json j = base_json("soc-market-avalanche v1", cfg, seeds);
    j["events"] = result.events.size();
    Json th = Json::array();
    for (std::size_t k = 0; k < runs.size(); ++k) {
      if (runs[k].threshold) th.push_back(threshold_json(runs[k].seed, *runs[k].threshold));
    }
    j["thresholds"] = th;
    j["tau_S"] = fit_json(result.size_fit);
    j["tau_T"] = fit_json(result.duration_fit);
    j["duration_fit_range"] = std::string(to_string(cfg.analysis.duration_fit));
    if (result.gamma) {
      j["gamma_ST"] = {{"gamma", result.gamma->gamma},
                       {"std_error", result.gamma->std_error},
                       {"points", result.gamma->points}};
    } else {
      j["gamma_ST"] = nullptr;
    }
    if (result.scaling) {
      j["scaling_relation"] = {{"residual", result.scaling->residual},
                               {"combined_std_error", result.scaling->combined_stderr}};
    } else {
      j["scaling_relation"] = nullptr;
    }
    j["warnings"] = result.warnings;
    write_file(dir / "avalanche_fit.json", dump(j));
    return result;
  });
}

DecayResult analyze_decay(const ExperimentConfig& cfg, const std::vector<RunSource>& runs) {
  if (runs.empty()) throw Error("no runs to analyze");
  DecayResult result;
  for (const auto& r : runs) {
    result.fitted_k.push_back(fit_decay_rate(r.record, cfg.analysis.decay_source, cfg.analysis.decay_smoothing));
    if (r.n_agents != runs.front().n_agents || r.eta_max != runs.front().eta_max) {
      throw ConsistencyError("decay runs differ in N or eta_max");
    }
  }
  double sum = 0.0;
  for (double k : result.fitted_k) sum += k;
  result.mean_fitted_k = sum / static_cast<double>(result.fitted_k.size());
  // eta is uniform on [0, eta_max), so <eta> = eta_max / 2.
  result.predicted_k = predicted_decay_rate(0.5 * runs.front().eta_max, runs.front().n_agents);
  result.ratio = result.mean_fitted_k / result.predicted_k;
  return result;
}

DecayResult cmd_decay_check(const ExperimentConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = cfg.output.dir;
  return guarded(dir, [&] {
    const auto runs = sources(cfg, opts, false);
    DecayResult result = analyze_decay(cfg, runs);
    Json j = base_json("soc-market-decay v1", cfg, seeds_of(runs));
    j["source"] = std::string(to_string(cfg.analysis.decay_source));
    j["n_agents"] = runs.front().n_agents;
    j["mean_eta"] = 0.5 * runs.front().eta_max;
    j["fitted_k"] = result.fitted_k;
    j["mean_fitted_k"] = result.mean_fitted_k;
    j["predicted_k"] = result.predicted_k;
    j["ratio"] = result.ratio;
    write_file(dir / "decay_check.json", dump(j));
    return result;
  });
}

}  // namespace socmarket
