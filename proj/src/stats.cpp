#include "brwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "brwre/rng.hpp"

namespace brwre {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_cell(std::uint64_t seed, std::uint64_t stream, std::int64_t t,
                        std::span<const int> site) {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ stream);
  h = mix64(h ^ static_cast<std::uint64_t>(t));
  for (int c : site) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t RandomStream::binomial(std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  // libstdc++'s sampler stalls for n >= 2^58; sums of independent chunks are
  // still binomial.
  constexpr std::uint64_t chunk = std::uint64_t{1} << 50;
  std::uint64_t k = 0;
  while (n > 0) {
    const std::uint64_t part = std::min(n, chunk);
    std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(part), p);
    k += static_cast<std::uint64_t>(dist(engine_));
    n -= part;
  }
  return k;
}

std::uint64_t RandomStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return static_cast<std::uint64_t>(dist(engine_));
}

// ---------------------------------------------------------------------------

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.variance = ss / static_cast<double>(xs.size() - 1);
    e.std_error = std::sqrt(e.variance / static_cast<double>(xs.size()));
  }
  return e;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<>(), p);
}

double student_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t_distribution<>(dof), p);
}

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("clopper_pearson: no trials");
  using boost::math::binomial_distribution;
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval ci;
  ci.lower = successes == 0 ? 0.0
                            : binomial_distribution<>::find_lower_bound_on_p(
                                  n, k, alpha / 2, binomial_distribution<>::clopper_pearson_exact_interval);
  ci.upper = successes == trials
                 ? 1.0
                 : binomial_distribution<>::find_upper_bound_on_p(
                       n, k, alpha / 2, binomial_distribution<>::clopper_pearson_exact_interval);
  return ci;
}

double empirical_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  // Type-7 (linear interpolation between order statistics).
  const double h = (static_cast<double>(xs.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("least_squares: need >= 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_std_error = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

}  // namespace brwre
