#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "socmarket/analysis.hpp"
#include "socmarket/errors.hpp"

using namespace socmarket;

TEST_CASE("rescaling divides by the mean price") {
  const std::vector<double> s{-2.0, 4.0, 1.0};
  const std::vector<double> m{2.0, 2.0, 2.0};
  const auto r = rescale_profits(s, m);
  CHECK(r == std::vector<double>{-1.0, 2.0, 0.5});
  CHECK_THROWS_AS(rescale_profits(s, std::vector<double>{1.0}), InvalidSize);
  CHECK_THROWS_AS(rescale_profits(s, std::vector<double>{1.0, 0.0, 1.0}), DomainError);

  // Scaling a snapshot's prices leaves rescaled profits alone.
  const auto inst = fixture::random_instance(fixture::Family::rt, 3);
  PriceVector big = inst.prices;
  big.scale(1e3);
  const auto a = evaluate_market(inst.prices, inst.net, inst.wts);
  const auto b = evaluate_market(big, inst.net, inst.wts);
  const double ma = std::accumulate(inst.prices.values().begin(), inst.prices.values().end(), 0.0) / inst.net.size();
  const double mb = std::accumulate(big.values().begin(), big.values().end(), 0.0) / inst.net.size();
  for (std::size_t i = 0; i < a.profit.size(); ++i) {
    CHECK(b.profit[i] / mb == doctest::Approx(a.profit[i] / ma).epsilon(1e-10).scale(1e-3));
  }
}

TEST_CASE("rescaled min profit has no trend, raw min profit does") {
  const auto net = build_ring(100);
  const auto wts = assign_weights_fixed(net, 0.5);
  SimConfig cfg;
  cfg.total_steps = 60000;
  cfg.transient_steps = 10000;
  cfg.eta_max = 0.05;
  const auto rec = run(net, wts, cfg);
  const auto stored = rec.post_transient_min_profit();
  std::vector<double> mean(rec.mean_price.begin() + cfg.transient_steps, rec.mean_price.end());
  // Undo any renormalization to get the raw series.
  std::vector<double> raw(mean.size());
  std::vector<double> true_mean(mean.size());
  for (std::size_t t = 0; t < mean.size(); ++t) {
    const double f = std::exp(rec.log_price_scale[t + cfg.transient_steps]);
    true_mean[t] = mean[t] * f;
    raw[t] = stored[t] * f;
  }
  const auto rescaled = rescale_profits(stored, mean);
  auto block_mean = [](const std::vector<double>& x, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t t = b; t < e; ++t) s += x[t];
    return s / static_cast<double>(e - b);
  };
  const std::size_t n = raw.size();
  const double raw_first = block_mean(raw, 0, n / 5);
  const double raw_last = block_mean(raw, n - n / 5, n);
  const double res_first = block_mean(rescaled, 0, n / 5);
  const double res_last = block_mean(rescaled, n - n / 5, n);
  // Raw shrinks with the price level; rescaled stays put.
  CHECK(std::abs(raw_last) < 0.5 * std::abs(raw_first));
  CHECK(res_last == doctest::Approx(res_first).epsilon(0.25));
  CHECK(true_mean.back() < 0.5 * true_mean.front());
}

TEST_CASE("decay rate of a synthetic exponential") {
  std::vector<double> x(200000);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 3.0 * std::exp(-1e-4 * static_cast<double>(t));
  CHECK(std::abs(fit_decay_rate(x, 0, x.size(), 1) - 1e-4) < 1e-6);
  CHECK(std::abs(fit_decay_rate(x, 1000, 150000, 1000) - 1e-4) < 1e-6);
  std::vector<double> neg(x);
  for (auto& v : neg) v = -v;
  CHECK(std::abs(fit_decay_rate(neg, 0, neg.size(), 100) - 1e-4) < 1e-6);
  std::vector<double> flip(x);
  for (std::size_t t = flip.size() / 2; t < flip.size(); ++t) flip[t] = -flip[t];
  CHECK_THROWS_AS(fit_decay_rate(flip, 0, flip.size(), 1000), FitDomainError);
  CHECK(predicted_decay_rate(0.005, 100) == doctest::Approx(0.005 / (100 * 0.995)));
  CHECK(predicted_decay_rate(0.005, 100) == doctest::Approx(5.025e-5).epsilon(1e-3));
}

TEST_CASE("doubling N roughly halves the decay rate") {
  auto rate = [](std::size_t n) {
    const auto net = build_ring(n);
    const auto wts = assign_weights_fixed(net, 0.5);
    SimConfig cfg;
    cfg.total_steps = 300000;
    cfg.transient_steps = 50000;
    const auto rec = run(net, wts, cfg);
    return fit_decay_rate(rec, DecaySource::mean_price);
  };
  const double k50 = rate(50);
  const double k100 = rate(100);
  CHECK(k100 / k50 == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("activity signal") {
  CHECK(activity_signal({{-0.05, 0.01}}, -0.042) == std::vector<std::uint32_t>{1});
  CHECK(activity_signal({{0.1, 0.2}, {0.3, 0.0}}, -0.01) == std::vector<std::uint32_t>{0, 0});

  const auto inst = fixture::random_instance(fixture::Family::lb, 7);
  SimConfig cfg;
  cfg.total_steps = 5000;
  cfg.transient_steps = 0;
  RunOptions opts;
  opts.record_profits = true;
  const auto rec = run(inst.net, inst.wts, cfg, opts);
  const auto rescaled = rescale_profits(rec.profits_stream, rec.mean_price);

  // Powers of two scale exactly, so the counts must agree exactly.
  auto scaled = rec.profits_stream;
  for (auto& row : scaled) {
    for (auto& v : row) v *= 1024.0;
  }
  std::vector<double> scaled_mean(rec.mean_price);
  for (auto& m : scaled_mean) m *= 1024.0;
  const auto rescaled2 = rescale_profits(scaled, scaled_mean);

  const std::vector<double> thresholds{-0.1, -0.05, -0.02, -0.01, -0.005, 0.0, 0.01};
  std::vector<std::uint32_t> previous;
  for (double f0 : thresholds) {
    const auto y = activity_signal(rescaled, f0);
    CHECK(y == activity_signal(rescaled2, f0));
    for (auto v : y) CHECK(v <= inst.net.size());
    if (!previous.empty()) {
      bool monotone = true;
      for (std::size_t t = 0; t < y.size(); ++t) monotone = monotone && previous[t] <= y[t];
      CHECK(monotone);
    }
    previous = y;
  }
}

TEST_CASE("avalanche extraction") {
  const std::vector<std::uint32_t> y{0, 2, 3, 1, 0, 0, 1, 0};
  const auto ev = extract_avalanches(y);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == AvalancheEvent{6, 3});
  CHECK(ev[1] == AvalancheEvent{1, 1});
  CHECK(extract_avalanches(std::vector<std::uint32_t>(10, 0)).empty());
  CHECK(extract_avalanches(std::vector<std::uint32_t>{}).empty());
  CHECK(extract_avalanches(std::vector<std::uint32_t>{3, 3, 0, 1}).empty());
  CHECK(boundary_activity(std::vector<std::uint32_t>{3, 3, 0, 2, 0, 1}) == 7);

  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint32_t> s(1 + gen() % 500);
    for (auto& v : s) v = (gen() % 3 == 0) ? 0 : static_cast<std::uint32_t>(gen() % 5);
    std::uint64_t total = 0;
    for (auto v : s) total += v;
    std::uint64_t in_events = 0;
    for (const auto& e : extract_avalanches(s)) {
      CHECK(e.duration >= 1);
      CHECK(e.size >= e.duration);
      in_events += e.size;
    }
    CHECK(in_events + boundary_activity(s) == total);
  }
}

TEST_CASE("log binning") {
  const std::vector<std::uint64_t> v{1, 2, 2, 3, 5};
  const auto d = log_bin(v);
  REQUIRE(d.size() == 3);
  CHECK(d.bin_lo == std::vector<std::uint64_t>{1, 2, 4});
  CHECK(d.bin_hi == std::vector<std::uint64_t>{1, 3, 7});
  CHECK(d.count == std::vector<std::uint64_t>{1, 3, 1});
  CHECK(d.density[0] == doctest::Approx(0.2));
  CHECK(d.density[1] == doctest::Approx(0.3));
  CHECK(d.density[2] == doctest::Approx(0.05));
  CHECK(d.representative_x == std::vector<double>{1.0, 2.5, 5.5});

  const auto one = log_bin(std::vector<std::uint64_t>{6, 6, 6});
  CHECK(one.density.back() == doctest::Approx(0.25));

  CHECK_THROWS_AS(log_bin(std::vector<std::uint64_t>{}), InvalidSize);
  CHECK_THROWS_AS(log_bin(std::vector<std::uint64_t>{0, 1}), DomainError);

  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> s(1 + gen() % 2000);
    for (auto& x : s) x = 1 + gen() % (1 + gen() % 100000);
    const auto b = log_bin(s);
    double mass = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      mass += b.density[k] * b.width(k);
      if (k > 0) CHECK(b.bin_lo[k] == b.bin_hi[k - 1] + 1);
      CHECK(b.width(k) == std::ldexp(1.0, static_cast<int>(k)));
    }
    CHECK(std::abs(mass - 1.0) < 1e-9);
  }
}

TEST_CASE("power-law fit recovers synthetic exponents") {
  for (double tau : {1.3, 1.5, 2.0}) {
    CAPTURE(tau);
    const oracle::PowerLawSampler sampler(tau, 1'000'000);
    std::mt19937_64 gen(static_cast<std::uint64_t>(tau * 1000));
    std::vector<std::uint64_t> s(200000);
    for (auto& x : s) x = sampler(gen);
    const auto fit = fit_power_law(log_bin(s), 10, 1000);
    CHECK(std::abs(fit.exponent - tau) <= 0.05);
    CHECK(fit.x_min == 10);
    CHECK(fit.x_max == 1000);
    CHECK(fit.points >= 3);
    const auto mle = fit_power_law_mle(s, 10);
    CHECK(std::abs(mle.exponent - tau) <= 0.05);
  }
}

TEST_CASE("power-law fit edge cases") {
  const std::vector<double> x{1.0, 10.0};
  const std::vector<double> y{1.0, 0.1};
  CHECK(fit_power_law_points(x, y, 1.0, 10.0, 2).exponent == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(fit_power_law_points(x, y, 1.0, 10.0), FitDomainError);
  const auto d = log_bin(std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(fit_power_law(d, 1, 1000), FitDomainError);

  // The range travels with the result.
  const oracle::PowerLawSampler sampler(1.5, 100000);
  std::mt19937_64 gen(9);
  std::vector<std::uint64_t> s(100000);
  for (auto& v : s) v = sampler(gen);
  const auto b = log_bin(s);
  const auto wide = fit_power_law(b, 1, 1000);
  const auto narrow = fit_power_law(b, 10, 1000);
  CHECK(wide.x_min == 1);
  CHECK(narrow.x_min == 10);
  CHECK(wide.points > narrow.points);
}

TEST_CASE("gamma_ST on constructed events") {
  std::vector<AvalancheEvent> sq;
  std::vector<AvalancheEvent> lin;
  for (std::uint64_t t = 1; t <= 50; ++t) {
    for (int k = 0; k < 25; ++k) {
      sq.push_back({t * t, t});
      lin.push_back({t, t});
    }
  }
  const auto g2 = gamma_st(sq);
  const auto g1 = gamma_st(lin);
  CHECK(g2.gamma == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g1.gamma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g1.points == 50);

  PowerLawFit ts;
  ts.exponent = 1.4;
  ts.std_error = 0.01;
  PowerLawFit tt = ts;
  const auto check = scaling_relation(ts, tt, g1);
  CHECK(check.residual == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(gamma_st(std::vector<AvalancheEvent>(999, AvalancheEvent{1, 1})), FitDomainError);
}

TEST_CASE("loser jump statistics") {
  const Coord ext = coord2(16, 16);
  std::vector<Coord> still(3000, coord2(4, 5));
  const auto fixed = loser_jump_stats(still, ext);
  CHECK(fixed.distances.size() == 2999);
  for (double d : fixed.distances) CHECK(d == 0.0);
  CHECK(!fixed.near.has_value());
  CHECK(!fixed.far.has_value());
  for (const auto& [x, dens] : fixed.near_density) CHECK(dens == 0.0);

  std::vector<Coord> few{coord2(0, 0), coord2(3, 4)};
  const auto tiny = loser_jump_stats(few, ext);
  CHECK(tiny.low_statistics);
  CHECK(tiny.distances == std::vector<double>{5.0});
  REQUIRE(tiny.cumulative.size() == 1);
  CHECK(tiny.cumulative[0] == std::pair<double, double>{5.0, 1.0});

  // Cumulative is a proper distribution function.
  std::mt19937_64 gen(2);
  std::vector<Coord> walk;
  for (int k = 0; k < 5000; ++k) {
    walk.push_back(coord2(static_cast<int>(gen() % 16), static_cast<int>(gen() % 16)));
  }
  JumpFitOptions off;
  off.fit = false;
  const auto st = loser_jump_stats(walk, ext, off);
  CHECK(!st.near.has_value());
  CHECK(!st.low_statistics);
  double prev = 0.0;
  for (const auto& [xi, f] : st.cumulative) {
    CHECK(f >= prev);
    prev = f;
  }
  CHECK(prev == doctest::Approx(1.0));
  const auto pooled = jump_stats_from_distances(st.distances, ext, off);
  CHECK(pooled.cumulative == st.cumulative);
}

TEST_CASE("quantile") {
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  CHECK_THROWS_AS(quantile({}, 0.5), InvalidSize);
  CHECK_THROWS_AS(quantile({1.0}, 1.5), InvalidParameter);
}
