#include "brwre/moments.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "brwre/errors.hpp"
#include "brwre/renewal.hpp"

namespace brwre {

LatticeField quenched_mean_field(const EnvironmentField& env, int T, int d, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("quenched_mean_field: T must be >= 1");
  // Reversed path from x: S_u sits at forward time T - u, so the factor
  // applied at step k = T - u + 1 is m_{k-1, .}.
  const Site origin(static_cast<std::size_t>(d), 0);
  auto phi0 = [&](std::span<const int> x) {
    return std::equal(x.begin(), x.end(), origin.begin()) ? 1.0 : 0.0;
  };
  auto a = [&](int k, std::span<const int> y) { return env.mean_at(k - 1, y); };
  auto b = [](int, std::span<const int>) { return 0.0; };
  return fk_solve(simple_random_walk_kernel(d), phi0, a, b, T, T, budget);
}

double log_quenched_total(const EnvironmentField& env, int T, int d, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("log_quenched_total: T must be >= 1");
  // E^0[prod_{u=1}^{T-1} m_{u,S_u}] with the S_T factor set to 1, times m_{0,0}.
  auto phi0 = [](std::span<const int>) { return 1.0; };
  auto a = [&](int k, std::span<const int> y) { return k == 1 ? 1.0 : env.mean_at(T - k + 1, y); };
  auto b = [](int, std::span<const int>) { return 0.0; };
  const LatticeField phi = fk_solve(simple_random_walk_kernel(d), phi0, a, b, T, 0, budget);
  const Site origin(static_cast<std::size_t>(d), 0);
  return std::log(phi.values[0]) + phi.log_scale + std::log(env.mean_at(0, origin));
}

std::vector<double> log_quenched_totals(const EnvironmentField& env, int T, int d, const DpBudget& budget) {
  if (T < 0) throw PreconditionError("log_quenched_totals: T must be >= 0");
  const LatticeBox box = LatticeBox::checked(d, T, budget);
  const Kernel kernel = simple_random_walk_kernel(d);
  std::vector<double> w(box.size(), 0.0), next(box.size(), 0.0);
  w[box.index(Site(static_cast<std::size_t>(d), 0))] = 1.0;
  double log_scale = 0.0;
  std::vector<double> out{0.0};
  for (int t = 0; t < T; ++t) {
    for_each_cell(box, t, [&](std::size_t i, std::span<const int> x) {
      if (w[i] != 0.0) w[i] *= env.mean_at(t, x);
    });
    push_forward(kernel, box, w, next, t);
    w.swap(next);
    double total = 0.0;
    for_each_cell(box, t + 1, [&](std::size_t i, std::span<const int>) { total += w[i]; });
    if (!(total > 0.0) || !std::isfinite(total)) {
      if (total == 0.0) {
        out.resize(static_cast<std::size_t>(T) + 1, -std::numeric_limits<double>::infinity());
        return out;
      }
      throw NumericOverflowError("log_quenched_totals: non-finite mass");
    }
    const double inv = 1.0 / total;
    for_each_cell(box, t + 1, [&](std::size_t i, std::span<const int>) { w[i] *= inv; });
    log_scale += std::log(total);
    out.push_back(log_scale);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair field

double PairMomentField::normalized(std::span<const int> x, std::span<const int> xt) const {
  Site joint(x.begin(), x.end());
  joint.insert(joint.end(), xt.begin(), xt.end());
  return field.at(joint);
}

PairMomentField annealed_pair_field(const EnvMoments& mom, int d, int T, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("annealed_pair_field: T must be >= 1");
  const LatticeBox single(d, T);
  const LatticeBox pair = LatticeBox::checked(2 * d, T, budget);
  const std::size_t S = single.size();
  const Kernel pair_kernel = pair_walk_kernel(d);
  const Kernel walk = simple_random_walk_kernel(d);
  const double log_m = std::log(mom.m);

  std::vector<double> p(S, 0.0), p_next(S, 0.0);
  p[single.index(Site(static_cast<std::size_t>(d), 0))] = 1.0;
  std::vector<double> M(pair.size(), 0.0), next(pair.size(), 0.0);
  for (int t = 1; t <= T; ++t) {
    if (t > 1) {
      for (std::size_t i = 0; i < S; ++i) M[i * S + i] *= mom.alpha;
      push_forward(pair_kernel, pair, M, next, t - 1);
      M.swap(next);
    }
    push_forward(walk, single, p, p_next, t - 1);
    p.swap(p_next);
    const double src = mom.c * std::exp(-t * log_m);
    for (std::size_t i = 0; i < S; ++i) M[i * S + i] += src * p[i];
  }
  const double diag = std::exp(-T * log_m);
  for (std::size_t i = 0; i < S; ++i) M[i * S + i] += diag * p[i];

  PairMomentField out;
  out.d = d;
  out.T = T;
  out.log_m = log_m;
  out.field.box = pair;
  out.field.values = std::move(M);
  return out;
}

double annealed_second_moment(const EnvironmentModel& model, int d, int T, std::span<const int> x,
                              std::span<const int> xt, const DpBudget& budget) {
  const EnvMoments mom = env_moments(model);
  const auto pf = annealed_pair_field(mom, d, T, budget);
  const double v = pf.normalized(x, xt);
  if (v == 0.0) return 0.0;
  return std::exp(std::log(v) + 2.0 * T * pf.log_m);
}

double normalized_second_moment_functional(const EnvMoments& mom, int d, int T, const SiteFunction& f,
                                           const SiteFunction& ft, const DpBudget& budget) {
  const auto pf = annealed_pair_field(mom, d, T, budget);
  const LatticeBox single(d, T);
  const std::size_t S = single.size();
  std::vector<double> fv(S), ftv(S);
  for_each_cell(single, T, [&](std::size_t i, std::span<const int> x) {
    fv[i] = f(x);
    ftv[i] = ft(x);
  });
  long double s = 0.0L;
  for (std::size_t i = 0; i < S; ++i) {
    if (fv[i] == 0.0) continue;
    long double row = 0.0L;
    const double* m = pf.field.values.data() + i * S;
    for (std::size_t j = 0; j < S; ++j) row += static_cast<long double>(m[j]) * ftv[j];
    s += row * fv[i];
  }
  return static_cast<double>(s);
}

double second_moment_functional(const EnvironmentModel& model, int d, int T, const SiteFunction& f,
                                const SiteFunction& ft, const DpBudget& budget) {
  const EnvMoments mom = env_moments(model);
  const double v = normalized_second_moment_functional(mom, d, T, f, ft, budget);
  if (v == 0.0) return 0.0;
  const double mag = std::exp(std::log(std::abs(v)) + 2.0 * T * std::log(mom.m));
  return v < 0 ? -mag : mag;
}

// ---------------------------------------------------------------------------
// Renewal route

double AxisCosineSeries::operator()(std::span<const int> x) const {
  double s = 0.0;
  for (const auto& [freq, w] : terms) s += w * std::cos(freq * x[static_cast<std::size_t>(axis)]);
  return s;
}

namespace {

// Characteristic function of one walk step along an axis.
double step_char(int d, double omega) { return (std::cos(omega) + d - 1.0) / d; }

struct Exponential {
  double freq;
  double weight;
};

std::vector<Exponential> expand(const AxisCosineSeries& f) {
  std::vector<Exponential> out;
  for (const auto& [freq, w] : f.terms) {
    if (freq == 0.0) {
      out.push_back({0.0, w});
    } else {
      out.push_back({freq, 0.5 * w});
      out.push_back({-freq, 0.5 * w});
    }
  }
  return out;
}

bool constant_only(const AxisCosineSeries& f) {
  for (const auto& term : f.terms)
    if (term.first != 0.0) return false;
  return true;
}

// Twisted pair-walk renewal series E[alpha^{#collisions} e^{i a A_n + i b B_n}],
// cached by (|a|, |b|, |a+b|) since the walk is symmetric.
class TwistedPairCache {
 public:
  TwistedPairCache(int d, int horizon) : d_(d), n_(horizon) {}

  const RenewalSeries& series(double a, double b) {
    const auto key = std::make_tuple(std::abs(a), std::abs(b), std::abs(a + b));
    auto it = series_.find(key);
    if (it != series_.end()) return it->second;
    const auto& visit = overlap(std::abs(a + b));
    const double step = step_char(d_, a) * step_char(d_, b);
    std::vector<double> total(visit.size());
    for (std::size_t n = 0; n < total.size(); ++n) total[n] = std::pow(step, static_cast<double>(n));
    return series_.emplace(key, RenewalSeries(visit, total)).first->second;
  }

 private:
  const std::vector<double>& overlap(double omega) {
    auto it = overlap_.find(omega);
    if (it != overlap_.end()) return it->second;
    return overlap_.emplace(omega, meeting_overlap(d_, n_, omega)).first->second;
  }

  int d_;
  int n_;
  std::map<double, std::vector<double>> overlap_;
  std::map<std::tuple<double, double, double>, RenewalSeries> series_;
};

int common_axis(const AxisCosineSeries& f, const AxisCosineSeries& ft) {
  if (constant_only(f)) return ft.axis;
  if (constant_only(ft)) return f.axis;
  if (f.axis != ft.axis) throw PreconditionError("renewal route: both cosine series must use the same axis");
  return f.axis;
}

}  // namespace

double normalized_second_moment_functional(const EnvMoments& mom, int d, int T, const AxisCosineSeries& f,
                                           const AxisCosineSeries& ft) {
  if (T < 1) throw PreconditionError("normalized_second_moment_functional: T must be >= 1");
  common_axis(f, ft);
  const auto ef = expand(f);
  const auto eft = expand(ft);
  TwistedPairCache cache(d, T - 1);
  const double log_m = std::log(mom.m);
  long double total = 0.0L;
  for (const auto& a : ef) {
    for (const auto& b : eft) {
      const double w = a.weight * b.weight;
      if (w == 0.0) continue;
      const double phi = step_char(d, a.freq + b.freq);
      long double s = std::exp(-T * log_m) * std::pow(phi, T);
      const auto H = cache.series(a.freq, b.freq).free_from_zero(mom.alpha);
      long double acc = 0.0L;
      for (int t = 0; t < T; ++t)
        acc += std::exp((t - T) * log_m) * std::pow(phi, T - t) * H[static_cast<std::size_t>(t)];
      s += mom.c * acc;
      total += w * s;
    }
  }
  return static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Series

namespace {

// a_T = m^{-T} + c sum_{t<T} m^{t-T} w_t for T = 0..T_max.
std::vector<double> geometric_series(const EnvMoments& mom, const std::vector<double>& w, int T_max) {
  std::vector<double> out(static_cast<std::size_t>(T_max) + 1);
  const double log_m = std::log(mom.m);
  long double acc = 0.0L;  // sum_{t<T} m^{t-T} w_t
  out[0] = 1.0;
  for (int T = 1; T <= T_max; ++T) {
    acc = (acc + w[static_cast<std::size_t>(T - 1)]) / mom.m;
    out[static_cast<std::size_t>(T)] = static_cast<double>(std::exp(-T * log_m) + mom.c * acc);
  }
  return out;
}

RenewalSeries plain_series(int d, int n) {
  const auto visit = return_probabilities(d, n);
  const std::vector<double> total(visit.size(), 1.0);
  return RenewalSeries(visit, total);
}

}  // namespace

std::vector<double> normalized_second_moments(const EnvMoments& mom, int d, int T_max) {
  if (T_max < 0) throw PreconditionError("normalized_second_moments: T must be >= 0");
  const auto w = plain_series(d, std::max(T_max, 1)).free_from_zero(mom.alpha);
  return geometric_series(mom, w, T_max);
}

double normalized_second_moment(const EnvMoments& mom, int d, int T) {
  return normalized_second_moments(mom, d, T)[static_cast<std::size_t>(T)];
}

double normalized_second_moment(const EnvironmentModel& model, int d, int T) {
  return normalized_second_moment(env_moments(model), d, T);
}

double normalized_second_moment_shifted(const EnvMoments& mom, int d, int T) {
  const auto w = plain_series(d, std::max(T, 1)).free_from_one(mom.alpha);
  return geometric_series(mom, w, T)[static_cast<std::size_t>(T)];
}

double normalized_second_moment_envelope(const EnvMoments& mom, int d, int T) {
  if (d < 3) throw PreconditionError("envelope: needs d >= 3");
  if (!(mom.m > 1.0)) throw PreconditionError("envelope: needs m > 1");
  const auto& pi = return_probability_interval(d);
  if (mom.alpha * pi.upper >= 1.0) throw PreconditionError("envelope: needs alpha * pi_d < 1");
  // alpha (1 - pi)/(1 - alpha pi) is nondecreasing in pi for alpha >= 1.
  const double p = mom.alpha >= 1.0 ? pi.upper : pi.lower;
  const double w_sup = mom.alpha * (1.0 - p) / (1.0 - mom.alpha * p);
  const double mT = std::exp(-T * std::log(mom.m));
  return mT + mom.c * (1.0 - mT) / (mom.m - 1.0) * w_sup;
}

std::vector<double> overlap_bound_series_all(const EnvMoments& mom, int d, int T_max, bool with_c) {
  if (T_max < 0) throw PreconditionError("overlap_bound_series: T must be >= 0");
  const auto B = plain_series(d, std::max(T_max, 1)).pinned(mom.alpha);
  EnvMoments used = mom;
  if (!with_c) used.c = 1.0;
  return geometric_series(used, B, T_max);
}

double overlap_bound_series(const EnvMoments& mom, int d, int T, bool with_c) {
  return overlap_bound_series_all(mom, d, T, with_c)[static_cast<std::size_t>(T)];
}

double overlap_bound_series(const EnvironmentModel& model, int d, int T, bool with_c) {
  return overlap_bound_series(env_moments(model), d, T, with_c);
}

// ---------------------------------------------------------------------------
// Factorization diagnostic and CLT error

namespace {

std::optional<AxisCosineSeries> as_axis_series(const TestFunction& f, double scale) {
  if (f.kind() == TestFunction::Kind::constant) return AxisCosineSeries{0, {{0.0, f.param()}}};
  if (auto axis = f.cosine_axis()) {
    const double th = f.theta().empty() ? 0.0 : f.theta()[static_cast<std::size_t>(*axis)];
    return AxisCosineSeries{*axis, {{th * scale, 1.0}}};
  }
  return std::nullopt;
}

Interval collision_limit(int d, double alpha, CollisionOrigin origin) {
  Interval lim;
  if (d <= 2) {
    if (alpha != 1.0) throw PreconditionError("sclt: the collision limit is infinite for d <= 2 and alpha > 1");
    lim = {1.0, 1.0};
  } else {
    lim = collision_weight_limit(d, alpha);
  }
  if (origin == CollisionOrigin::from_zero) lim = {alpha * lim.lower, alpha * lim.upper};
  return lim;
}

}  // namespace

ScltCheck sclt_factorization_check(int d, double alpha, const TestFunction& f, const TestFunction& ft, int t,
                                   CollisionOrigin origin, const DpBudget& budget) {
  if (t < 1) throw PreconditionError("sclt_factorization_check: t must be >= 1");
  if (alpha < 1.0) throw PreconditionError("sclt_factorization_check: alpha must be >= 1");
  ScltCheck out;
  const Interval lim = collision_limit(d, alpha, origin);
  const double k = integral_fg1(f, d) * integral_fg1(ft, d);
  out.rhs = {std::min(lim.lower * k, lim.upper * k), std::max(lim.lower * k, lim.upper * k)};

  const double scale = 1.0 / std::sqrt(static_cast<double>(t));
  const auto sf = as_axis_series(f, scale);
  const auto sft = as_axis_series(ft, scale);
  if (sf && sft && (constant_only(*sf) || constant_only(*sft) || sf->axis == sft->axis)) {
    out.method = "renewal";
    TwistedPairCache cache(d, t);
    long double s = 0.0L;
    for (const auto& a : expand(*sf)) {
      for (const auto& b : expand(*sft)) {
        const auto& series = cache.series(a.freq, b.freq);
        const auto H = origin == CollisionOrigin::from_zero ? series.free_from_zero(alpha) : series.free_from_one(alpha);
        s += a.weight * b.weight * H[static_cast<std::size_t>(t)];
      }
    }
    out.lhs = static_cast<double>(s);
    return out;
  }

  out.method = "pair-dp";
  const LatticeBox single(d, t);
  const LatticeBox pair = LatticeBox::checked(2 * d, t, budget);
  const std::size_t S = single.size();
  const Kernel kernel = pair_walk_kernel(d);
  std::vector<double> P(pair.size(), 0.0), next(pair.size(), 0.0);
  const std::size_t o = single.index(Site(static_cast<std::size_t>(d), 0));
  P[o * S + o] = 1.0;
  for (int u = 0; u < t; ++u) {
    if (origin == CollisionOrigin::from_zero)
      for (std::size_t i = 0; i < S; ++i) P[i * S + i] *= alpha;
    push_forward(kernel, pair, P, next, u);
    P.swap(next);
    if (origin == CollisionOrigin::from_one)
      for (std::size_t i = 0; i < S; ++i) P[i * S + i] *= alpha;
  }
  std::vector<double> fv(S), ftv(S), u(static_cast<std::size_t>(d));
  for_each_cell(single, t, [&](std::size_t i, std::span<const int> x) {
    for (int j = 0; j < d; ++j) u[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] * scale;
    fv[i] = f(u);
    ftv[i] = ft(u);
  });
  long double s = 0.0L;
  for (std::size_t i = 0; i < S; ++i) {
    long double row = 0.0L;
    for (std::size_t j = 0; j < S; ++j) row += static_cast<long double>(P[i * S + j]) * ftv[j];
    s += row * fv[i];
  }
  out.lhs = static_cast<double>(s);
  return out;
}

double exact_clt_error(const EnvMoments& mom, int d, int T, const TestFunction& f, const DpBudget& budget) {
  if (T < 1) throw PreconditionError("exact_clt_error: T must be >= 1");
  if (f.kind() == TestFunction::Kind::constant) return 0.0;
  const double k = integral_fg1(f, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(T));
  if (const auto sf = as_axis_series(f, scale)) {
    const AxisCosineSeries one{sf->axis, {{0.0, 1.0}}};
    const double ff = normalized_second_moment_functional(mom, d, T, *sf, *sf);
    const double f1 = normalized_second_moment_functional(mom, d, T, *sf, one);
    const double oo = normalized_second_moment(mom, d, T);
    return ff - 2.0 * k * f1 + k * k * oo;
  }
  auto fl = [&](std::span<const int> x) {
    std::vector<double> u(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) u[j] = x[j] * scale;
    return f(u);
  };
  const auto pf = annealed_pair_field(mom, d, T, budget);
  const LatticeBox single(d, T);
  const std::size_t S = single.size();
  std::vector<double> fv(S);
  for_each_cell(single, T, [&](std::size_t i, std::span<const int> x) { fv[i] = fl(x); });
  long double ff = 0.0L, f1 = 0.0L, oo = 0.0L;
  for (std::size_t i = 0; i < S; ++i) {
    const double* row = pf.field.values.data() + i * S;
    for (std::size_t j = 0; j < S; ++j) {
      const long double v = row[j];
      ff += v * fv[i] * fv[j];
      f1 += v * fv[i];
      oo += v;
    }
  }
  return static_cast<double>(ff - 2.0L * k * f1 + static_cast<long double>(k) * k * oo);
}

}  // namespace brwre
