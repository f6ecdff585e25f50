#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/lattice.hpp"
#include "brwre/lattice_walk.hpp"
#include "brwre/test_function.hpp"

namespace brwre {

// x -> P^q[N_{T,x}] = E_S[prod_{u<T} m_{u,S_u} : S_T = x], by the backward
// Feynman-Kac recursion started from delta_0 (log-scaled when large).
LatticeField quenched_mean_field(const EnvironmentField& env, int T, int d, const DpBudget& budget = {});

// ln P^q[N_T] by the other order: one backward recursion from phi_0 = 1
// evaluated at the origin.
double log_quenched_total(const EnvironmentField& env, int T, int d, const DpBudget& budget = {});

// ln P^q[N_t] for t = 0..T by a single forward transfer pass.
std::vector<double> log_quenched_totals(const EnvironmentField& env, int T, int d, const DpBudget& budget = {});

// E[Nbar_{T,x} Nbar_{T,x~}] for all pairs, on the Z^{2d} box of radius T
// (first d coordinates x). Built by the forward pair recursion
//   M_t(x,x~) = sum M_{t-1}(y,y~) alpha^{1{y=y~}} p(y,x) p(y~,x~) + c m^{-t} delta p_t(0,x)
// plus the diagonal term m^{-T} p_T(0,x).
struct PairMomentField {
  int d = 1;
  int T = 0;
  double log_m = 0.0;
  LatticeField field;

  double normalized(std::span<const int> x, std::span<const int> xt) const;
};
PairMomentField annealed_pair_field(const EnvMoments& mom, int d, int T, const DpBudget& budget = {});

// P[N_{T,x} N_{T,x~}].
double annealed_second_moment(const EnvironmentModel& model, int d, int T, std::span<const int> x,
                              std::span<const int> xt, const DpBudget& budget = {});

// sum_{x,x~} P[N_{T,x} N_{T,x~}] f(x) f~(x~).
double second_moment_functional(const EnvironmentModel& model, int d, int T, const SiteFunction& f,
                                const SiteFunction& ft, const DpBudget& budget = {});
// The same divided by m^{2T}, from the pair field.
double normalized_second_moment_functional(const EnvMoments& mom, int d, int T, const SiteFunction& f,
                                           const SiteFunction& ft, const DpBudget& budget = {});

// f(x) = sum_k weight_k cos(freq_k x_axis) on Z^d.
struct AxisCosineSeries {
  int axis = 0;
  std::vector<std::pair<double, double>> terms;  // (freq, weight)

  double operator()(std::span<const int> x) const;
};

// normalized_second_moment_functional for axis cosine series without any
// lattice: characters of the walk plus a renewal decomposition of the twisted
// pair walk. Cost O(T^3) independent of d.
double normalized_second_moment_functional(const EnvMoments& mom, int d, int T, const AxisCosineSeries& f,
                                           const AxisCosineSeries& ft);

// P[Nbar_T^2] = m^{-T} + c sum_{t<T} m^{t-T} E^{0,0}[alpha^{#{0<=u<t : S_u = S~_u}}].
double normalized_second_moment(const EnvMoments& mom, int d, int T);
double normalized_second_moment(const EnvironmentModel& model, int d, int T);
// Values for T = 0..T_max in one pass.
std::vector<double> normalized_second_moments(const EnvMoments& mom, int d, int T_max);
// Same series with collisions counted over 1 <= u <= t instead. Differs from
// the exact second moment from T = 2 on; kept as a labelled diagnostic.
double normalized_second_moment_shifted(const EnvMoments& mom, int d, int T);

// Upper envelope m^{-T} + c (1 - m^{-T})/(m - 1) sup_t w_t with
// sup_t w_t = alpha (1 - pi)/(1 - alpha pi) (upper end over the pi_d
// interval). Requires d >= 3, m > 1, alpha >= 1, alpha pi_d < 1.
double normalized_second_moment_envelope(const EnvMoments& mom, int d, int T);

// sum_x P[Nbar_{T,x}^2] = m^{-T} + c sum_{t<T} m^{t-T} E[alpha^{#collisions}; S_t = S~_t].
// with_c = false drops the factor c; kept only as a comparison variant.
double overlap_bound_series(const EnvMoments& mom, int d, int T, bool with_c = true);
double overlap_bound_series(const EnvironmentModel& model, int d, int T, bool with_c = true);
std::vector<double> overlap_bound_series_all(const EnvMoments& mom, int d, int T_max, bool with_c = true);

struct ScltCheck {
  double lhs = 0.0;
  Interval rhs;  // over the pi_d enclosure
  std::string method;  // "pair-dp" or "renewal"
};

// lhs = E^{0,0}[alpha^{#collisions} f(S_t/sqrt t) f~(S~_t/sqrt t)],
// rhs = E[alpha^{#collisions up to infinity}] (int f g_1)(int f~ g_1).
// Collisions are counted over 0 <= u < t (from_zero) or 1 <= u <= t.
// Axis cosines and constants use the renewal route; other functions the
// joint pair lattice (small t only).
ScltCheck sclt_factorization_check(int d, double alpha, const TestFunction& f, const TestFunction& ft, int t,
                                   CollisionOrigin origin = CollisionOrigin::from_zero,
                                   const DpBudget& budget = {});

// E[D_T^2] with D_T = sum_x Nbar_{T,x} f(x/sqrt T) - Nbar_T int f g_1,
// expanded as F(f,f) - 2 k F(f,1) + k^2 F(1,1) with k = int f g_1 and F the
// normalized second-moment functional. Axis cosines use the renewal route;
// other functions need the pair lattice.
double exact_clt_error(const EnvMoments& mom, int d, int T, const TestFunction& f, const DpBudget& budget = {});

}  // namespace brwre
