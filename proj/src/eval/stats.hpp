#pragma once

#include <optional>
#include <span>
#include <vector>

namespace orthoprobe::eval {

/// 1-based ranks; tied values share the average of their positions. With a
/// positive `tolerance`, sorted neighbours closer than tolerance * max|v|
/// are chained into one tie group.
std::vector<double> average_ranks(std::span<const double> values, double tolerance = 0.0);

/// Pearson coefficient; nullopt for fewer than 2 points or a constant series.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Rank correlation with average-rank ties; nullopt under the same
/// conditions as pearson. `tolerance` applies to the ranks of both series.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y, double tolerance = 0.0);

struct MeanSpread {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};

MeanSpread mean_spread(std::span<const double> values);

/// Two-sided unequal-variance (Welch) t-test.
struct WelchTest {
  bool applicable = false;  // false with fewer than 2 samples on either side
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

}  // namespace orthoprobe::eval
