#include "eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "error.hpp"

namespace orthoprobe::eval {

std::vector<double> average_ranks(std::span<const double> values, double tolerance) {
  const std::size_t n = values.size();
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double gap = tolerance * scale;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] - values[order[j]] <= gap) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("correlation inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y, double tolerance) {
  if (x.size() != y.size()) throw ContractError("correlation inputs differ in length");
  const auto rx = average_ranks(x, tolerance);
  const auto ry = average_ranks(y, tolerance);
  return pearson(rx, ry);
}

MeanSpread mean_spread(std::span<const double> values) {
  MeanSpread r;
  if (values.empty()) return r;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    r.mean = values.front();
    return r;
  }
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  WelchTest r;
  if (a.size() < 2 || b.size() < 2) return r;
  r.applicable = true;
  const auto sa = mean_spread(a);
  const auto sb = mean_spread(b);
  const double va = sa.stddev * sa.stddev / static_cast<double>(a.size());
  const double vb = sb.stddev * sb.stddev / static_cast<double>(b.size());
  const double se2 = va + vb;
  const double diff = sa.mean - sb.mean;
  if (se2 <= 0.0) {
    // Both samples constant: the difference is either exactly zero or certain.
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
  } else {
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  }
  r.significant = r.p_value < alpha;
  return r;
}

}  // namespace orthoprobe::eval
