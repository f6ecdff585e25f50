#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace brwre {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

struct MeanEstimate {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_error = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> xs);
double normal_quantile(double p);
double student_quantile(double p, double dof);
// Exact binomial confidence interval.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence);
double empirical_quantile(std::vector<double> xs, double q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace brwre
