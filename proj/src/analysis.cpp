#include "socmarket/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "socmarket/errors.hpp"
#include "socmarket/kernels.hpp"

namespace socmarket {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw FitDomainError("regression needs at least two distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ssr += r * r;
  }
  fit.slope_stderr = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

}  // namespace

std::vector<double> rescale_profits(std::span<const double> profits,
                                    std::span<const double> mean_price) {
  if (profits.size() != mean_price.size()) throw InvalidSize("profit and price series differ in length");
  std::vector<double> out(profits.size());
  for (std::size_t t = 0; t < profits.size(); ++t) {
    if (!(mean_price[t] > 0.0)) throw DomainError("mean price must be positive");
    out[t] = profits[t] / mean_price[t];
  }
  return out;
}

std::vector<std::vector<double>> rescale_profits(const std::vector<std::vector<double>>& profits,
                                                 std::span<const double> mean_price) {
  if (profits.size() != mean_price.size()) throw InvalidSize("profit and price series differ in length");
  std::vector<std::vector<double>> out(profits.size());
  for (std::size_t t = 0; t < profits.size(); ++t) {
    if (!(mean_price[t] > 0.0)) throw DomainError("mean price must be positive");
    out[t].resize(profits[t].size());
    kernels::divide(out[t], profits[t], mean_price[t]);
  }
  return out;
}

std::vector<double> detrend_exponential(std::span<const double> series, double k, double scale) {
  if (!(scale > 0.0)) throw DomainError("detrend scale must be positive");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = series[t] * std::exp(k * static_cast<double>(t)) / scale;
  }
  return out;
}

double fit_decay_rate(std::span<const double> series, std::size_t begin, std::size_t end,
                      std::size_t smoothing) {
  end = std::min(end, series.size());
  if (smoothing == 0) smoothing = 1;
  if (begin >= end || (end - begin) / smoothing < 2) {
    throw FitDomainError("decay window holds fewer than two smoothed points");
  }
  std::vector<double> times;
  std::vector<double> logs;
  int sign = 0;
  for (std::size_t b = begin; b + smoothing <= end; b += smoothing) {
    double avg = 0.0;
    for (std::size_t t = b; t < b + smoothing; ++t) avg += series[t];
    avg /= static_cast<double>(smoothing);
    const int s = avg > 0.0 ? 1 : (avg < 0.0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw FitDomainError("smoothed series changes sign at t = " + std::to_string(b));
    }
    sign = s;
    times.push_back(static_cast<double>(b) + 0.5 * static_cast<double>(smoothing - 1));
    logs.push_back(std::log(std::abs(avg)));
  }
  return -least_squares(times, logs).slope;
}

double fit_decay_rate(const RunRecord& record, DecaySource source, std::size_t smoothing) {
  const std::size_t begin = record.transient;
  const std::size_t end = record.size();
  if (source == DecaySource::min_profit) {
    return fit_decay_rate(record.min_profit, begin, end, smoothing);
  }
  if (end <= begin + 1) throw FitDomainError("decay window holds fewer than two points");
  std::vector<double> times;
  std::vector<double> logs;
  times.reserve(end - begin);
  logs.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    if (!(record.mean_price[t] > 0.0)) throw FitDomainError("nonpositive mean price");
    times.push_back(static_cast<double>(t));
    logs.push_back(std::log(record.mean_price[t]) + record.log_price_scale[t]);
  }
  return -least_squares(times, logs).slope;
}

double predicted_decay_rate(double mean_eta, std::size_t n_agents) {
  if (n_agents == 0 || !(mean_eta > 0.0 && mean_eta < 1.0)) {
    throw InvalidParameter("need N > 0 and 0 < <eta> < 1");
  }
  return mean_eta / (static_cast<double>(n_agents) * (1.0 - mean_eta));
}

std::vector<std::uint32_t> activity_signal(const std::vector<std::vector<double>>& rescaled,
                                           double f0) {
  std::vector<std::uint32_t> y(rescaled.size());
  for (std::size_t t = 0; t < rescaled.size(); ++t) {
    y[t] = static_cast<std::uint32_t>(kernels::count_below_scaled(rescaled[t], 1.0, f0));
  }
  return y;
}

std::vector<AvalancheEvent> extract_avalanches(std::span<const std::uint32_t> y) {
  std::vector<AvalancheEvent> events;
  std::size_t t = 0;
  // Skip a leading run that started before the signal did.
  while (t < y.size() && y[t] != 0) ++t;
  while (t < y.size()) {
    while (t < y.size() && y[t] == 0) ++t;
    AvalancheEvent ev;
    while (t < y.size() && y[t] != 0) {
      ev.size += y[t];
      ++ev.duration;
      ++t;
    }
    if (ev.duration > 0 && t < y.size()) events.push_back(ev);
  }
  return events;
}

std::uint64_t boundary_activity(std::span<const std::uint32_t> y) {
  std::uint64_t total = 0;
  std::size_t t = 0;
  while (t < y.size() && y[t] != 0) total += y[t++];
  if (t == y.size()) return total;
  std::size_t u = y.size();
  while (u > 0 && y[u - 1] != 0) total += y[--u];
  return total;
}

BinnedDistribution log_bin(std::span<const std::uint64_t> values) {
  if (values.empty()) throw InvalidSize("cannot bin an empty sample");
  std::uint64_t largest = 0;
  for (auto v : values) {
    if (v == 0) throw DomainError("log binning needs values >= 1");
    largest = std::max(largest, v);
  }
  const auto bins = static_cast<std::size_t>(std::bit_width(largest));
  BinnedDistribution d;
  d.count.assign(bins, 0);
  for (auto v : values) ++d.count[static_cast<std::size_t>(std::bit_width(v)) - 1];
  d.total = values.size();
  for (std::size_t r = 0; r < bins; ++r) {
    const std::uint64_t lo = std::uint64_t{1} << r;
    const std::uint64_t hi = (lo << 1) - 1;
    d.bin_lo.push_back(lo);
    d.bin_hi.push_back(hi);
    d.representative_x.push_back(0.5 * (static_cast<double>(lo) + static_cast<double>(hi)));
    d.density.push_back(static_cast<double>(d.count[r]) /
                        (static_cast<double>(d.total) * static_cast<double>(lo)));
  }
  return d;
}

PowerLawFit fit_power_law_points(std::span<const double> x, std::span<const double> y,
                                 double x_min, double x_max, std::size_t min_points) {
  if (x.size() != y.size()) throw InvalidSize("x and y differ in length");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] >= x_min && x[k] <= x_max && x[k] > 0.0 && y[k] > 0.0) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  }
  if (lx.size() < std::max<std::size_t>(min_points, 2)) {
    throw FitDomainError("power-law fit needs " + std::to_string(std::max<std::size_t>(min_points, 2)) +
                         " points in range, found " + std::to_string(lx.size()));
  }
  const LineFit line = least_squares(lx, ly);
  PowerLawFit fit;
  fit.exponent = -line.slope;
  fit.std_error = line.slope_stderr;
  fit.x_min = x_min;
  fit.x_max = x_max;
  fit.points = lx.size();
  fit.r_squared = line.r_squared;
  return fit;
}

PowerLawFit fit_power_law(const BinnedDistribution& dist, double x_min, double x_max,
                          std::size_t min_bins) {
  return fit_power_law_points(dist.representative_x, dist.density, x_min, x_max, min_bins);
}

PowerLawFit fit_power_law_mle(std::span<const std::uint64_t> values, std::uint64_t x_min) {
  if (x_min == 0) throw InvalidParameter("x_min must be >= 1");
  double log_sum = 0.0;
  std::size_t n = 0;
  const double shift = static_cast<double>(x_min) - 0.5;
  for (auto v : values) {
    if (v >= x_min) {
      log_sum += std::log(static_cast<double>(v) / shift);
      ++n;
    }
  }
  if (n < 2 || !(log_sum > 0.0)) throw FitDomainError("MLE needs at least two values above x_min");
  PowerLawFit fit;
  fit.exponent = 1.0 + static_cast<double>(n) / log_sum;
  fit.std_error = (fit.exponent - 1.0) / std::sqrt(static_cast<double>(n));
  fit.x_min = static_cast<double>(x_min);
  fit.x_max = std::numeric_limits<double>::infinity();
  fit.points = n;
  return fit;
}

namespace {

// Density of `values` on bins [2^r, 2^(r+1)) lying fully inside [1, upper],
// normalized by `total`.
std::vector<std::pair<double, double>> real_log_density(const std::vector<double>& values,
                                                        double upper, std::size_t total) {
  std::vector<std::pair<double, double>> out;
  if (total == 0) return out;
  std::vector<std::uint64_t> count;
  for (double lo = 1.0; 2.0 * lo <= upper; lo *= 2.0) count.push_back(0);
  for (double v : values) {
    if (v < 1.0) continue;
    const auto r = static_cast<std::size_t>(std::floor(std::log2(v)));
    if (r < count.size()) ++count[r];
  }
  for (std::size_t r = 0; r < count.size(); ++r) {
    const double lo = std::ldexp(1.0, static_cast<int>(r));
    out.emplace_back(1.5 * lo, static_cast<double>(count[r]) / (static_cast<double>(total) * lo));
  }
  return out;
}

std::optional<PowerLawFit> fit_density(const std::vector<std::pair<double, double>>& density, double upper) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [xv, yv] : density) {
    x.push_back(xv);
    y.push_back(yv);
  }
  try {
    return fit_power_law_points(x, y, 1.0, upper, 3);
  } catch (const FitDomainError&) {
    return std::nullopt;
  }
}

}  // namespace

JumpStats jump_stats_from_distances(std::vector<double> distances, const Coord& extents,
                                   const JumpFitOptions& options) {
  JumpStats stats;
  stats.distances = std::move(distances);
  const std::size_t n = stats.distances.size();
  stats.low_statistics = n < 1000;
  if (n == 0) return stats;

  std::vector<double> sorted = stats.distances;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (k + 1 == n || sorted[k + 1] != sorted[k]) {
      stats.cumulative.emplace_back(sorted[k], static_cast<double>(k + 1) / static_cast<double>(n));
    }
  }

  const double side = static_cast<double>(extents.v[0]);
  const double half = 0.5 * side;
  std::vector<double> near;
  std::vector<double> far;
  for (double xi : stats.distances) {
    if (xi <= half) {
      near.push_back(xi);
    } else {
      far.push_back(std::abs(side - xi));
    }
  }
  stats.near_density = real_log_density(near, half, n);
  stats.far_density = real_log_density(far, half, n);
  if (options.fit) {
    stats.near = fit_density(stats.near_density, half);
    stats.far = fit_density(stats.far_density, half);
  }
  return stats;
}

std::vector<double> jump_distances(std::span<const Coord> positions, const Coord& extents,
                                   DistanceMode mode, DistanceMetric metric) {
  std::vector<double> d;
  if (positions.size() < 2) return d;
  d.reserve(positions.size() - 1);
  for (std::size_t t = 1; t < positions.size(); ++t) {
    d.push_back(jump_distance(positions[t - 1], positions[t], extents, mode, metric));
  }
  return d;
}

JumpStats loser_jump_stats(std::span<const Coord> positions, const Coord& extents,
                           const JumpFitOptions& options) {
  return jump_stats_from_distances(jump_distances(positions, extents, options.mode, options.metric),
                                   extents, options);
}

GammaFit gamma_st(std::span<const AvalancheEvent> events, std::size_t min_per_duration) {
  if (events.size() < 1000) {
    throw FitDomainError("gamma_ST needs at least 1000 events, got " + std::to_string(events.size()));
  }
  std::map<std::uint64_t, std::pair<double, std::size_t>> by_duration;
  for (const auto& ev : events) {
    auto& [sum, count] = by_duration[ev.duration];
    sum += static_cast<double>(ev.size);
    ++count;
  }
  std::vector<double> lt;
  std::vector<double> ls;
  for (const auto& [duration, acc] : by_duration) {
    if (acc.second < min_per_duration) continue;
    lt.push_back(std::log(static_cast<double>(duration)));
    ls.push_back(std::log(acc.first / static_cast<double>(acc.second)));
  }
  if (lt.size() < 2) throw FitDomainError("too few populated durations for gamma_ST");
  const LineFit line = least_squares(lt, ls);
  return GammaFit{line.slope, line.slope_stderr, lt.size()};
}

ScalingCheck scaling_relation(const PowerLawFit& size_fit, const PowerLawFit& duration_fit,
                              const GammaFit& gamma) {
  if (gamma.gamma == 0.0) throw FitDomainError("gamma_ST is zero");
  const double g = gamma.gamma;
  const double tt = duration_fit.exponent - 1.0;
  ScalingCheck check;
  check.residual = std::abs(size_fit.exponent - 1.0 - tt / g);
  const double ds = size_fit.std_error;
  const double dt = duration_fit.std_error / g;
  const double dg = tt * gamma.std_error / (g * g);
  check.combined_stderr = std::sqrt(ds * ds + dt * dt + dg * dg);
  return check;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidSize("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace socmarket
