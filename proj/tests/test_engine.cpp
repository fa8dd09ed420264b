#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "socmarket/dynamics.hpp"
#include "socmarket/engine.hpp"
#include "socmarket/errors.hpp"
#include "socmarket/loser_queue.hpp"

using namespace socmarket;

TEST_CASE("incremental update equals full evaluation bit for bit") {
  for (auto fam : fixture::all_families()) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto inst = fixture::random_instance(fam, seed);
      CAPTURE(inst.label);
      Rng rng(seed * 31);
      MarketSnapshot snap = evaluate_market(inst.prices, inst.net, inst.wts);
      IncrementalUpdater up(inst.net);
      bool all_equal = true;
      for (int k = 0; k < 300; ++k) {
        const auto c = static_cast<AgentId>(uniform_index(rng, inst.net.size()));
        inst.prices.set(c, inst.prices[c] * (0.9 + 0.2 * uniform01(rng)));
        up.apply(snap, c, inst.prices, inst.wts);
        all_equal = all_equal && snap == evaluate_market(inst.prices, inst.net, inst.wts);
      }
      CHECK(all_equal);
    }
  }
}

TEST_CASE("single cut on a 32x32 RT lattice") {
  const auto net = build_corner_lattice(32, Corner::RT);
  const auto wts = assign_weights_fixed(net, 0.5);
  Rng rng(5);
  auto prices = fixture::random_prices(net.size(), rng);
  const auto prev = evaluate_market(prices, net, wts);
  prices.set(517, prices[517] * 0.99);
  const auto inc = incremental_evaluate(prev, 517, prices, net, wts);
  const auto full = evaluate_market(prices, net, wts);
  for (std::size_t i = 0; i < full.profit.size(); ++i) {
    CHECK(std::abs(inc.profit[i] - full.profit[i]) <= 1e-10);
    CHECK(std::abs(inc.production[i] - full.production[i]) <= 1e-10);
    CHECK(std::abs(inc.demand[i] - full.demand[i]) <= 1e-10);
    CHECK(std::abs(inc.traded[i] - full.traded[i]) <= 1e-10);
  }
  CHECK(inc == full);
}

TEST_CASE("affected profit set on the ring has seven agents") {
  const auto net = build_ring(100);
  IncrementalUpdater up(net);
  for (AgentId c : {0u, 1u, 50u, 99u}) {
    const auto& s = up.collect(c);
    CHECK(s.profit.size() <= 7);
    CHECK(s.profit.size() == 7);
    std::set<AgentId> got(s.profit.begin(), s.profit.end());
    for (int d = -3; d <= 3; ++d) CHECK(got.count(static_cast<AgentId>((c + 100 + d) % 100)) == 1);
  }
}

TEST_CASE("affected set matches the dependency closure on ER graphs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = fixture::random_instance(fixture::Family::er, seed);
    const auto sup = fixture::supplier_lists(inst.net);
    IncrementalUpdater up(inst.net);
    for (AgentId c = 0; c < inst.net.size(); c += 3) {
      const auto& s = up.collect(c);
      const std::set<AgentId> got(s.profit.begin(), s.profit.end());
      std::set<AgentId> want;
      for (int i : oracle::profit_dependents(static_cast<int>(c), sup)) want.insert(static_cast<AgentId>(i));
      CHECK(got == want);
      CHECK(got.size() == s.profit.size());
    }
  }
}

TEST_CASE("profits outside the affected set never move") {
  for (auto fam : fixture::all_families()) {
    auto inst = fixture::random_instance(fam, 9);
    IncrementalUpdater up(inst.net);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
      const auto before = evaluate_market(inst.prices, inst.net, inst.wts);
      const auto c = static_cast<AgentId>(uniform_index(rng, inst.net.size()));
      inst.prices.set(c, inst.prices[c] * 0.95);
      const auto after = evaluate_market(inst.prices, inst.net, inst.wts);
      const auto& s = up.collect(c);
      const std::set<AgentId> affected(s.profit.begin(), s.profit.end());
      for (AgentId i = 0; i < inst.net.size(); ++i) {
        if (after.profit[i] != before.profit[i]) CHECK(affected.count(i) == 1);
      }
    }
  }
}

TEST_CASE("loser queue tracks a linear argmin") {
  Rng rng(17);
  std::vector<double> keys(200);
  for (auto& k : keys) k = uniform01(rng);
  LoserQueue q(keys);
  for (int step = 0; step < 20000; ++step) {
    const auto i = static_cast<AgentId>(uniform_index(rng, keys.size()));
    // Coarse values force frequent ties.
    keys[i] = std::floor(uniform01(rng) * 20.0) / 20.0;
    q.update(i, keys[i]);
    REQUIRE(q.top() == find_loser(keys));
  }
}

TEST_CASE("full and incremental engines pick the same losers") {
  for (auto fam : fixture::all_families()) {
    const auto inst = fixture::random_instance(fam, 21);
    CAPTURE(inst.label);
    SimConfig cfg;
    cfg.total_steps = 10000;
    cfg.transient_steps = 0;
    cfg.seed = 4;
    RunOptions full;
    full.engine = EngineKind::full;
    RunOptions inc;
    inc.engine = EngineKind::incremental;
    inc.audit_interval = 1000;
    const auto a = run(inst.net, inst.wts, cfg, full);
    const auto b = run(inst.net, inst.wts, cfg, inc);
    CHECK(a.loser_index == b.loser_index);
    CHECK(a.min_profit == b.min_profit);
  }
}

TEST_CASE("audit passes on a consistent engine and catches stale state") {
  const auto net = build_ring(20);
  const auto wts = assign_weights_fixed(net, 0.5);
  Rng rng(2);
  auto prices = fixture::random_prices(20, rng);
  IncrementalEngine eng(net, wts, 1);
  eng.reset(prices);
  for (int k = 0; k < 100; ++k) {
    const AgentId c = eng.loser();
    prices.set(c, prices[c] * 0.99);
    CHECK_NOTHROW(eng.price_changed(c, prices));
  }
  // Two prices change but only one is reported.
  prices.set(3, prices[3] * 0.5);
  prices.set(11, prices[11] * 0.5);
  CHECK_THROWS_AS(eng.price_changed(3, prices), ConsistencyError);
}

TEST_CASE("engine kind parsing") {
  CHECK(parse_engine_kind("full") == EngineKind::full);
  CHECK(parse_engine_kind("incremental") == EngineKind::incremental);
  CHECK(to_string(EngineKind::full) == "full");
  CHECK_THROWS(parse_engine_kind("fast"));
}
