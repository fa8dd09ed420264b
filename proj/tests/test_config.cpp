#include <doctest.h>

#include <string>

#include "socmarket/config.hpp"
#include "socmarket/errors.hpp"

using namespace socmarket;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults follow the reference protocol") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.sim.total_steps == 1'000'000);
  CHECK(c.sim.transient_steps == 100'000);
  CHECK(c.sim.price_floor == 10.0);
  CHECK(c.sim.eta_max == 0.01);
  CHECK(c.analysis.size_fit_min == 10.0);
  CHECK(c.analysis.size_fit_max == 1000.0);
  CHECK(c.checkpoint_interval == 100'000);
  CHECK(c.sim.renorm_threshold == 1e-6);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing sections and keys") {
  const auto c = parse_config(
      "[topology]\nkind = corner\ncorner = LB\nside = 50 ; comment\n"
      "[weights]\nscheme = fixed_split\nsplit = 0.25\n"
      "[simulation]\neta_max = 0.02\nseed = 77\nengine = full\n"
      "[analysis]\nf0 = -0.048\nduration_fit = explicit\ndistance_metric = component\n"
      "[ensemble]\nruns = 4\nworkers = 2\n");
  CHECK(c.topology.kind == NetworkKind::corner);
  CHECK(c.topology.corner == Corner::LB);
  CHECK(c.topology.side == 50);
  CHECK(c.topology.agent_count() == 2500);
  CHECK(c.weights.split == 0.25);
  CHECK(c.sim.eta_max == 0.02);
  CHECK(c.sim.seed == 77);
  CHECK(c.engine == EngineKind::full);
  CHECK(c.analysis.f0 == -0.048);
  CHECK(c.analysis.duration_fit == DurationFitRange::explicit_range);
  CHECK(c.analysis.distance_metric == DistanceMetric::component);
  CHECK(c.ensemble.runs == 4);

  const auto back = parse_config(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.hash() == c.hash());
}

TEST_CASE("validation names the offending field") {
  CHECK(field_of("[simulation]\neta_max = 1.5\n") == "simulation.eta_max");
  CHECK(field_of("[simulation]\ntotal_steps = 10\ntransient_steps = 10\n") == "simulation.transient_steps");
  CHECK(field_of("[topology]\nkind = ring\nn_agents = 2\n") == "topology.n_agents");
  CHECK(field_of("[topology]\nkind = manhattan\nside = 5\n") == "topology.side");
  CHECK(field_of("[topology]\nkind = er_embedded\nalpha = 0\n[weights]\nscheme = uniform_random\n") ==
        "topology.alpha");
  CHECK(field_of("[topology]\nkind = er_embedded\n") == "weights.scheme");
  CHECK(field_of("[weights]\nsplit = 1\n") == "weights.split");
  CHECK(field_of("[analysis]\nf0 = -0.1\nf0_quantile = 0.02\n") == "analysis.f0_quantile");
  CHECK(field_of("[analysis]\nsize_fit_min = 100\nsize_fit_max = 10\n") == "analysis.size_fit_max");
  CHECK(field_of("[ensemble]\nruns = 0\n") == "ensemble.runs");
  CHECK(field_of("[simulation]\nbogus = 1\n") == "simulation.bogus");
  CHECK(field_of("[simulation]\neta_max = abc\n") == "simulation.eta_max");
  CHECK(field_of("[topology]\nkind = torus\n") == "topology.kind");
  CHECK(field_of("[simulation]\neta_max = 0.02\n") == "");
}

TEST_CASE("hash covers results, not where they go") {
  auto a = parse_config("[simulation]\nseed = 5\n");
  auto b = parse_config("[simulation]\nseed = 5\n[output]\ndir = elsewhere\n[ensemble]\nworkers = 8\n");
  auto c = parse_config("[simulation]\nseed = 6\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 64);
  CHECK(a.hash() == parse_config(a.canonical_text()).hash());
}
