#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "socmarket/errors.hpp"
#include "socmarket/experiments.hpp"

using namespace socmarket;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("socmarket_exp_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_ring() {
  return parse_config(
      "[topology]\nkind = ring\nn_agents = 30\n"
      "[simulation]\ntotal_steps = 20000\ntransient_steps = 2000\nseed = 11\n"
      "[analysis]\npilot_steps = 5000\npilot_stride = 10\n"
      "[ensemble]\nruns = 4\nworkers = 2\n");
}

}  // namespace

TEST_CASE("ensemble run writes one record per seed and a manifest") {
  auto cfg = small_ring();
  CommandOptions opts;
  opts.out = scratch("run_a");
  apply_overrides(cfg, opts);
  const auto res = cmd_run(cfg, opts);
  CHECK(res.seeds == std::vector<std::uint64_t>{11, 12, 13, 14});
  std::size_t records = 0;
  std::size_t manifests = 0;
  for (const auto& e : fs::directory_iterator(*opts.out)) {
    const auto name = e.path().filename().string();
    if (name.rfind("run_seed", 0) == 0 && e.path().extension() == ".txt") ++records;
    if (name == "manifest.json") ++manifests;
    CHECK(name != "PARTIAL");
    CHECK(e.path().extension() != ".ckpt");
  }
  CHECK(records == 4);
  CHECK(manifests == 1);

  const auto manifest = nlohmann::json::parse(slurp(*opts.out / "manifest.json"));
  CHECK(manifest["config_hash"] == cfg.hash());
  CHECK(manifest["seeds"].size() == 4);

  // Same config and seeds from the manifest, different directory and worker
  // count: identical bytes.
  auto again = load_config_or_manifest(*opts.out / "manifest.json");
  CommandOptions opts2;
  opts2.out = scratch("run_b");
  opts2.workers = 1;
  apply_overrides(again, opts2);
  cmd_run(again, opts2);
  for (std::uint64_t s : res.seeds) {
    const auto name = "run_seed" + std::to_string(s) + ".txt";
    CHECK(slurp(*opts.out / name) == slurp(*opts2.out / name));
  }
  CHECK(slurp(*opts.out / "manifest.json") == slurp(*opts2.out / "manifest.json"));

  // Analysis from records equals analysis from live simulation.
  CommandOptions from_records;
  from_records.out = scratch("decay_rec");
  from_records.records = {*opts.out};
  CommandOptions live;
  live.out = scratch("decay_live");
  auto cfg_rec = cfg;
  apply_overrides(cfg_rec, from_records);
  auto cfg_live = cfg;
  apply_overrides(cfg_live, live);
  const auto a = cmd_decay_check(cfg_rec, from_records);
  const auto b = cmd_decay_check(cfg_live, live);
  CHECK(a.fitted_k == b.fitted_k);
  CHECK(fs::exists(*live.out / "decay_check.json"));
  for (const auto& d : {*opts.out, *opts2.out, *from_records.out, *live.out}) fs::remove_all(d);
}

TEST_CASE("ER walk statistics are flagged as not fitted") {
  auto cfg = parse_config(
      "[topology]\nkind = er_embedded\nn_agents = 60\nalpha = 0.08\n"
      "[weights]\nscheme = uniform_random\n"
      "[simulation]\ntotal_steps = 6000\ntransient_steps = 1000\n"
      "[analysis]\npilot_steps = 1000\n");
  CommandOptions opts;
  opts.out = scratch("walk_er");
  apply_overrides(cfg, opts);
  const auto w = cmd_walk_stats(cfg, opts);
  CHECK(!w.fitted);
  CHECK(!w.primary.near.has_value());
  const auto fit = nlohmann::json::parse(slurp(*opts.out / "walk_fit.json"));
  CHECK(fit["power_law_fitted"] == false);
  fs::remove_all(*opts.out);
}

TEST_CASE("failed commands leave a PARTIAL marker") {
  auto cfg = small_ring();
  CommandOptions opts;
  opts.out = scratch("partial");
  opts.records = {fs::temp_directory_path() / "socmarket_no_such_record.txt"};
  apply_overrides(cfg, opts);
  CHECK_THROWS(cmd_walk_stats(cfg, opts));
  REQUIRE(fs::exists(*opts.out / "PARTIAL"));
  CHECK(slurp(*opts.out / "PARTIAL").rfind("failed:", 0) == 0);
  fs::remove_all(*opts.out);
}

TEST_CASE("overrides are validated") {
  auto cfg = small_ring();
  CommandOptions opts;
  opts.f0 = -0.05;
  opts.f0_quantile = 0.1;
  CHECK_THROWS_AS(apply_overrides(cfg, opts), ConfigError);
  cfg = small_ring();
  CommandOptions seed;
  seed.seed = 99;
  apply_overrides(cfg, seed);
  CHECK(ensemble_seeds(cfg) == std::vector<std::uint64_t>{99, 100, 101, 102});
}

TEST_CASE("threshold resolution") {
  auto cfg = small_ring();
  const auto sys = build_system(cfg, 11);
  cfg.analysis.f0 = -1e9;  // nothing ever falls below this
  const auto fb = resolve_threshold(cfg, sys, 11);
  CHECK(fb.mode == ThresholdMode::fallback_quantile);
  REQUIRE(fb.quantile.has_value());
  CHECK(*fb.quantile == doctest::Approx(3.5 / 30.0));

  cfg.analysis.f0_fallback = false;
  const auto kept = resolve_threshold(cfg, sys, 11);
  CHECK(kept.mode == ThresholdMode::absolute);
  CHECK(kept.f0 == -1e9);

  cfg.analysis.f0.reset();
  cfg.analysis.f0_quantile = 0.05;
  const auto q5 = resolve_threshold(cfg, sys, 11);
  cfg.analysis.f0_quantile = 0.2;
  const auto q20 = resolve_threshold(cfg, sys, 11);
  CHECK(q5.mode == ThresholdMode::quantile);
  CHECK(q5.f0 < q20.f0);
  CHECK(q5.pilot_mean_activity < q20.pilot_mean_activity);
}
