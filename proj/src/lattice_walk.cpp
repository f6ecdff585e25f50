#include "brwre/lattice_walk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "brwre/errors.hpp"
#include "brwre/renewal.hpp"
#include "brwre/rng.hpp"

namespace brwre {

double step_prob(std::span<const int> x, std::span<const int> y, int d) {
  if (d < 1) throw PreconditionError("step_prob: d must be >= 1");
  long sq = 0;
  for (int i = 0; i < d; ++i) {
    const long diff = static_cast<long>(x[static_cast<std::size_t>(i)]) - y[static_cast<std::size_t>(i)];
    sq += diff * diff;
  }
  return sq == 1 ? 1.0 / (2.0 * d) : 0.0;
}

LatticeField t_step_distribution(int d, int t, const DpBudget& budget) {
  if (t < 0) throw PreconditionError("t_step_distribution: t must be >= 0");
  const LatticeBox box = LatticeBox::checked(d, t, budget);
  const Kernel kernel = simple_random_walk_kernel(d);
  LatticeField field(box);
  const Site origin(static_cast<std::size_t>(d), 0);
  field.values[box.index(origin)] = 1.0;
  std::vector<double> next(box.size());
  for (int s = 0; s < t; ++s) {
    push_forward(kernel, box, field.values, next, s);
    field.values.swap(next);
  }
  return field;
}

namespace {

// Local-CLT constant: p_{2n}(0,0) ~ 2 (d / (4 pi n))^{d/2}.
double lclt_constant(int d) {
  return 2.0 * std::pow(d / (4.0 * std::numbers::pi), d / 2.0);
}

ReturnProbEstimate series_estimate(int d, std::int64_t t_max) {
  ReturnProbEstimate est;
  est.method = ReturnProbMethod::series;
  const int n_max = static_cast<int>(t_max / 2);
  est.samples = static_cast<std::uint64_t>(n_max + 1);
  if (d <= 2) {
    // sum n^{-d/2} diverges: the walk is recurrent.
    est.point = est.lower = est.upper = 1.0;
    return est;
  }
  const auto u = return_probabilities(d, n_max);
  double partial = 0.0;
  for (double v : u) partial += v;

  const double s = d / 2.0;
  // n^{d/2} u_n rises towards the local-CLT constant; use the last computed
  // value as the lower calibration and the constant as the upper one, unless
  // the window says otherwise.
  const int window_start = std::max(1, n_max / 2);
  double c_last = std::pow(static_cast<double>(n_max), s) * u[static_cast<std::size_t>(n_max)];
  double c_min = c_last, c_max = c_last;
  bool increasing = true;
  double prev = 0.0;
  for (int n = window_start; n <= n_max; ++n) {
    const double c = std::pow(static_cast<double>(n), s) * u[static_cast<std::size_t>(n)];
    c_min = std::min(c_min, c);
    c_max = std::max(c_max, c);
    if (n > window_start && c < prev) increasing = false;
    prev = c;
  }
  const double c_lo = increasing ? c_last : c_min;
  const double c_hi = std::max(lclt_constant(d), c_max);
  // sum_{n > N} n^{-s} lies between the integrals from N+1 and from N.
  const double N = static_cast<double>(n_max);
  const double tail_lo = c_lo * std::pow(N + 1.0, 1.0 - s) / (s - 1.0);
  const double tail_hi = c_hi * std::pow(N, 1.0 - s) / (s - 1.0);
  const double g_lo = partial + tail_lo;
  const double g_hi = partial + tail_hi;
  est.lower = 1.0 - 1.0 / g_lo;
  est.upper = 1.0 - 1.0 / g_hi;
  est.point = 0.5 * (est.lower + est.upper);
  return est;
}

ReturnProbEstimate monte_carlo_estimate(int d, std::int64_t horizon, const MonteCarloWalkOptions& opt) {
  if (d > 8) throw PreconditionError("return_probability: Monte Carlo supports d <= 8");
  ReturnProbEstimate est;
  est.method = ReturnProbMethod::monte_carlo;
  est.samples = opt.walks;
  RandomStream rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(d), 0x5157ULL}));
  const unsigned directions = 2u * static_cast<unsigned>(d);
  std::uint64_t returned = 0;
  for (std::uint64_t w = 0; w < opt.walks; ++w) {
    std::array<int, 8> pos{};
    std::uint64_t bits = 0;
    int digits_left = 0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
      if (digits_left == 0) {
        bits = rng.bits();
        digits_left = 16;
      }
      const unsigned __int128 prod = static_cast<unsigned __int128>(bits) * directions;
      const auto dir = static_cast<unsigned>(prod >> 64);
      bits = static_cast<std::uint64_t>(prod);
      --digits_left;
      pos[dir >> 1] += (dir & 1u) ? 1 : -1;
      bool at_origin = true;
      for (int i = 0; i < d && at_origin; ++i) at_origin = pos[static_cast<std::size_t>(i)] == 0;
      if (at_origin) {
        ++returned;
        break;
      }
    }
  }
  est.point = static_cast<double>(returned) / static_cast<double>(opt.walks);
  const Interval ci = clopper_pearson(returned, opt.walks, opt.confidence);
  est.lower = ci.lower;
  if (d >= 3) {
    // Returns after the horizon are never observed. They are bounded by the
    // expected number of visits after it, sum_{n > H/2} p_{2n}(0,0).
    const double s = d / 2.0;
    const double n0 = std::floor(static_cast<double>(horizon) / 2.0);
    est.horizon_bias_bound = lclt_constant(d) * std::pow(std::max(n0, 1.0), 1.0 - s) / (s - 1.0);
    est.upper = std::min(1.0, ci.upper + est.horizon_bias_bound);
  } else {
    est.horizon_bias_bound = 1.0 - ci.upper;
    est.upper = 1.0;
  }
  return est;
}

}  // namespace

ReturnProbEstimate return_probability(int d, std::int64_t t_max, ReturnProbMethod method,
                                      const MonteCarloWalkOptions& mc) {
  if (d < 1) throw PreconditionError("return_probability: d must be >= 1");
  if (t_max < 2) throw PreconditionError("return_probability: t_max must be >= 2");
  return method == ReturnProbMethod::series ? series_estimate(d, t_max) : monte_carlo_estimate(d, t_max, mc);
}

const ReturnProbEstimate& return_probability_interval(int d) {
  static std::mutex mu;
  static std::map<int, ReturnProbEstimate> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, return_probability(d, 10'000, ReturnProbMethod::series)).first;
  return it->second;
}


LatticeField fk_solve(const Kernel& kernel, const SiteFunction& phi0, const TimeSiteFunction& a,
                      const TimeSiteFunction& b, int T, int out_radius, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("fk_solve: T must be >= 1");
  if (out_radius < 0) throw PreconditionError("fk_solve: out_radius must be >= 0");
  const int range = kernel.range();
  const int R0 = out_radius + T * range;
  const LatticeBox box = LatticeBox::checked(kernel.dimension(), R0, budget);

  std::vector<double> phi(box.size(), 0.0);
  for_each_cell(box, R0, [&](std::size_t i, std::span<const int> x) { phi[i] = phi0(x); });
  double log_scale = 0.0;

  std::vector<std::ptrdiff_t> strides;
  std::vector<double> probs;
  for (const auto& s : kernel.steps()) {
    strides.push_back(box.stride_offset(s.offset));
    probs.push_back(s.prob);
  }
  std::vector<double> weighted(box.size(), 0.0);
  std::vector<double> next(box.size(), 0.0);
  for (int t = 1; t <= T; ++t) {
    const int r_prev = R0 - (t - 1) * range;
    const int r_next = R0 - t * range;
    for_each_cell(box, r_prev, [&](std::size_t i, std::span<const int> x) {
      weighted[i] = phi[i] == 0.0 ? 0.0 : a(t, x) * phi[i];
    });
    const double b_factor = std::exp(-log_scale);
    double peak = 0.0;
    for_each_cell(box, r_next, [&](std::size_t i, std::span<const int> x) {
      double v = 0.0;
      for (std::size_t s = 0; s < strides.size(); ++s)
        v += probs[s] * weighted[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + strides[s])];
      const double bt = b(t, x);
      if (bt != 0.0) v += bt * b_factor;
      if (!std::isfinite(v)) throw NumericOverflowError("fk_solve: value left the double range");
      next[i] = v;
      peak = std::max(peak, std::abs(v));
    });
    phi.swap(next);
    if (peak > 1e150 || (peak > 0.0 && peak < 1e-150)) {
      const double inv = 1.0 / peak;
      for_each_cell(box, r_next, [&](std::size_t i, std::span<const int>) { phi[i] *= inv; });
      log_scale += std::log(peak);
    }
  }

  LatticeField out(LatticeBox(kernel.dimension(), out_radius));
  out.log_scale = log_scale;
  for_each_cell(out.box, out_radius, [&](std::size_t i, std::span<const int> x) {
    out.values[i] = phi[box.index(x)];
  });
  return out;
}

namespace {

double collision_weight_dp(int d, int t, double alpha, bool conditioned, CollisionOrigin origin,
                           const DpBudget& budget) {
  const Kernel kernel = difference_walk_kernel(d);
  const LatticeBox box = LatticeBox::checked(d, 2 * t, budget);
  const std::size_t zero = box.index(Site(static_cast<std::size_t>(d), 0));
  std::vector<double> w(box.size(), 0.0), next(box.size(), 0.0);
  w[zero] = 1.0;
  for (int u = 0; u < t; ++u) {
    if (origin == CollisionOrigin::from_zero) w[zero] *= alpha;
    push_forward(kernel, box, w, next, 2 * u);
    w.swap(next);
    if (origin == CollisionOrigin::from_one) w[zero] *= alpha;
  }
  if (conditioned) return w[zero];
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace

std::vector<double> collision_weights(int d, int t_max, double alpha, bool conditioned, CollisionOrigin origin) {
  if (t_max < 0) throw PreconditionError("collision_weights: t_max must be >= 0");
  const auto visit = return_probabilities(d, t_max);
  const std::vector<double> total(visit.size(), 1.0);
  const RenewalSeries series(visit, total);
  // Pinned at Y_t = 0, the coincidence at u = t replaces the one at u = 0,
  // so both origins give the same weight.
  if (conditioned) return series.pinned(alpha);
  return origin == CollisionOrigin::from_one ? series.free_from_one(alpha) : series.free_from_zero(alpha);
}

double collision_weight(int d, int t, double alpha, bool conditioned, CollisionOrigin origin, CollisionMethod method,
                        const DpBudget& budget) {
  if (d < 1) throw PreconditionError("collision_weight: d must be >= 1");
  if (t < 0) throw PreconditionError("collision_weight: t must be >= 0");
  if (method == CollisionMethod::lattice_dp) return collision_weight_dp(d, t, alpha, conditioned, origin, budget);
  return collision_weights(d, t, alpha, conditioned, origin)[static_cast<std::size_t>(t)];
}

Interval collision_weight_limit(int d, double alpha) {
  if (d < 3) throw PreconditionError("collision_weight_limit: the walk must be transient (d >= 3)");
  const auto& pi = return_probability_interval(d);
  if (alpha * pi.upper >= 1.0) throw PreconditionError("collision_weight_limit: alpha * pi_d must be < 1");
  auto g = [&](double p) { return (1.0 - p) / (1.0 - alpha * p); };
  const double a = g(pi.lower), b = g(pi.upper);
  return {std::min(a, b), std::max(a, b)};
}

std::string to_string(ReturnProbMethod m) {
  return m == ReturnProbMethod::series ? "series-with-tail-bound" : "monte-carlo";
}

}  // namespace brwre
