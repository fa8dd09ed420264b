// socmarket: run the price-cutting market and analyze its records.
//
//   socmarket run             --config cfg.ini [--seed N] [--out DIR] [--resume]
//   socmarket walk-stats      --config cfg.ini | --record DIR_OR_FILE...
//   socmarket avalanche-stats --config cfg.ini [--f0 V | --f0-quantile Q]
//   socmarket decay-check     --config cfg.ini | --record ...
//
// Exit codes: 0 ok, 1 config error, 2 runtime error, 3 statistics warning
// with --strict.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "socmarket/errors.hpp"
#include "socmarket/experiments.hpp"
#include "socmarket/kernels.hpp"

namespace sm = socmarket;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> engine;
  std::optional<double> f0;
  std::optional<double> f0_quantile;
  std::optional<std::uint32_t> workers;
  std::vector<std::string> records;
  bool strict = false;
  bool resume = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI config file, or a JSON output of this tool");
  cmd->add_option("--seed", c.seed, "base seed (ensemble uses seed, seed+1, ...)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--engine", c.engine, "incremental or full")->check(CLI::IsMember({"incremental", "full"}));
  auto* f0 = cmd->add_option("--f0", c.f0, "absolute activity threshold on profit / mean price");
  auto* q = cmd->add_option("--f0-quantile", c.f0_quantile, "threshold as a quantile of rescaled profits");
  f0->excludes(q);
  cmd->add_option("--workers", c.workers, "concurrent ensemble runs");
  cmd->add_flag("--strict", c.strict, "exit with 3 on statistics warnings");
}

int report(const std::vector<std::string>& warnings, bool strict) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return (strict && !warnings.empty()) ? 3 : 0;
}

void print_fit(const char* name, const std::optional<sm::PowerLawFit>& fit) {
  std::cout << name << ' ';
  if (fit) {
    std::cout << fit->exponent << " +- " << fit->std_error << " on [" << fit->x_min << ", " << fit->x_max
              << "], " << fit->points << " bins\n";
  } else {
    std::cout << "n/a\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Price-cutting market with extremal dynamics"};
  app.require_subcommand(1);
  Common c;
  auto* run = app.add_subcommand("run", "simulate an ensemble and write run records");
  auto* walk = app.add_subcommand("walk-stats", "loser jump distances and two-branch fits");
  auto* aval = app.add_subcommand("avalanche-stats", "avalanche size/duration distributions and exponents");
  auto* decay = app.add_subcommand("decay-check", "fitted profit decay rate against the prediction");
  for (auto* cmd : {run, walk, aval, decay}) add_common(cmd, c);
  run->add_flag("--resume", c.resume, "continue from checkpoints in the output directory");
  for (auto* cmd : {walk, aval, decay}) {
    cmd->add_option("--record", c.records, "recorded run files or directories instead of simulating");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  sm::ExperimentConfig cfg;
  sm::CommandOptions opts;
  try {
    if (!c.config.empty()) cfg = sm::load_config_or_manifest(c.config);
    opts.seed = c.seed;
    if (c.out) opts.out = *c.out;
    if (c.engine) opts.engine = sm::parse_engine_kind(*c.engine);
    opts.f0 = c.f0;
    opts.f0_quantile = c.f0_quantile;
    opts.workers = c.workers;
    for (const auto& r : c.records) opts.records.emplace_back(r);
    opts.resume = c.resume;
    sm::apply_overrides(cfg, opts);
  } catch (const sm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const sm::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  std::cerr << "kernels: " << sm::kernels::to_string(sm::kernels::active().isa) << ", config "
            << cfg.hash().substr(0, 12) << '\n';
  try {
    if (run->parsed()) {
      const auto r = sm::cmd_run(cfg, opts);
      for (std::size_t k = 0; k < r.seeds.size(); ++k) {
        std::cout << "seed " << r.seeds[k] << ": f0 " << r.thresholds[k].f0 << " ("
                  << sm::to_string(r.thresholds[k].mode) << ")\n";
      }
      std::cout << "wrote " << r.files.size() << " files to " << cfg.output.dir.string() << '\n';
      return 0;
    }
    if (walk->parsed()) {
      const auto r = sm::cmd_walk_stats(cfg, opts);
      std::cout << "jumps " << r.primary.distances.size() << '\n';
      if (r.fitted) {
        std::cout << "[" << sm::to_string(r.primary_metric) << "]\n";
        print_fit("pi1", r.primary.near);
        print_fit("pi2", r.primary.far);
        std::cout << "[" << sm::to_string(r.alternate_metric) << "]\n";
        print_fit("pi1", r.alternate.near);
        print_fit("pi2", r.alternate.far);
      }
      return report(r.warnings, c.strict);
    }
    if (aval->parsed()) {
      const auto r = sm::cmd_avalanche_stats(cfg, opts);
      std::cout << "events " << r.events.size() << '\n';
      print_fit("tau_S", r.size_fit);
      print_fit("tau_T", r.duration_fit);
      if (r.gamma) std::cout << "gamma_ST " << r.gamma->gamma << " +- " << r.gamma->std_error << '\n';
      if (r.scaling) {
        std::cout << "scaling residual " << r.scaling->residual << " (combined stderr "
                  << r.scaling->combined_stderr << ")\n";
      }
      return report(r.warnings, c.strict);
    }
    if (decay->parsed()) {
      const auto r = sm::cmd_decay_check(cfg, opts);
      std::cout << "fitted k " << r.mean_fitted_k << ", predicted k " << r.predicted_k << ", ratio " << r.ratio
                << '\n';
      return report(r.warnings, c.strict);
    }
  } catch (const sm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
