#include "brwre/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brwre/errors.hpp"

namespace brwre {
namespace {

// c[n] = log sum_k exp(x[k] + y[n-k])
std::vector<double> log_convolve(const std::vector<double>& x, const std::vector<double>& y, int n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max + 1));
  for (int n = 0; n <= n_max; ++n) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) hi = std::max(hi, x[static_cast<std::size_t>(k)] + y[static_cast<std::size_t>(n - k)]);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) s += std::exp(x[static_cast<std::size_t>(k)] + y[static_cast<std::size_t>(n - k)] - hi);
    out[static_cast<std::size_t>(n)] = hi + std::log(s);
  }
  return out;
}

}  // namespace

std::vector<double> log_return_probabilities(int d, int n_max) {
  if (d < 1) throw PreconditionError("log_return_probabilities: d must be >= 1");
  if (n_max < 0) throw PreconditionError("log_return_probabilities: n_max must be >= 0");
  std::vector<double> a(static_cast<std::size_t>(n_max + 1));
  for (int k = 0; k <= n_max; ++k) a[static_cast<std::size_t>(k)] = -2.0 * std::lgamma(k + 1.0) - k * std::log(4.0);
  std::vector<double> c = a;
  for (int i = 1; i < d; ++i) c = log_convolve(c, a, n_max);
  std::vector<double> out(c.size());
  for (int n = 0; n <= n_max; ++n)
    out[static_cast<std::size_t>(n)] = std::lgamma(2.0 * n + 1.0) - 2.0 * n * std::log(static_cast<double>(d)) + c[static_cast<std::size_t>(n)];
  out[0] = 0.0;
  return out;
}

std::vector<double> return_probabilities(int d, int n_max) {
  auto out = log_return_probabilities(d, n_max);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::vector<double> meeting_overlap(int d, int n_max, double omega) {
  if (d < 1) throw PreconditionError("meeting_overlap: d must be >= 1");
  const auto N = static_cast<std::size_t>(n_max);
  // One-dimensional k-step laws q_k(y), y = -k..k, stored with offset k.
  std::vector<std::vector<double>> q(N + 1);
  q[0] = {1.0};
  for (std::size_t k = 1; k <= N; ++k) {
    q[k].assign(2 * k + 1, 0.0);
    for (std::size_t j = 0; j < q[k - 1].size(); ++j) {
      q[k][j] += 0.5 * q[k - 1][j];
      q[k][j + 2] += 0.5 * q[k - 1][j];
    }
  }
  // Q[k][k'] = sum_y q_k(y) q_k'(y) cos(omega y), nonzero only for k = k' mod 2.
  std::vector<std::vector<double>> Q(N + 1, std::vector<double>(N + 1, 0.0));
  for (std::size_t k = 0; k <= N; ++k) {
    for (std::size_t kk = k; kk <= N; kk += 2) {
      double s = 0.0;
      const auto ik = static_cast<long>(k);
      const auto ikk = static_cast<long>(kk);
      for (long y = -ik; y <= ik; y += 2) {
        s += q[k][static_cast<std::size_t>(y + ik)] * q[kk][static_cast<std::size_t>(y + ikk)] *
             std::cos(omega * static_cast<double>(y));
      }
      Q[k][kk] = s;
      Q[kk][k] = s;
    }
  }
  std::vector<double> W(N + 1, 0.0);
  if (d == 1) {
    for (std::size_t n = 0; n <= N; ++n) W[n] = Q[n][n];
    return W;
  }
  // Return probabilities of the transverse (d-1)-dimensional walk at even times.
  const auto rest = return_probabilities(d - 1, n_max);
  const double share = 1.0 / d;
  for (std::size_t n = 0; n <= N; ++n) {
    // Binomial(n, 1/d) weights for the number of first-coordinate steps.
    std::vector<double> bin(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      bin[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) +
                        static_cast<double>(k) * std::log(share) +
                        static_cast<double>(n - k) * std::log1p(-share));
    }
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t kk = k % 2; kk <= n; kk += 2) {
        const std::size_t transverse = 2 * n - k - kk;  // even
        s += bin[k] * bin[kk] * Q[k][kk] * rest[transverse / 2];
      }
    }
    W[n] = s;
  }
  return W;
}

RenewalSeries::RenewalSeries(std::span<const double> visit, std::span<const double> total)
    : total_(total.begin(), total.end()) {
  if (visit.size() != total.size() || visit.empty()) throw PreconditionError("RenewalSeries: size mismatch");
  const std::size_t N = visit.size() - 1;
  first_.assign(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n) {
    double s = visit[n];
    for (std::size_t j = 1; j < n; ++j) s -= first_[j] * visit[n - j];
    first_[n] = s;
  }
  avoid_.assign(N + 1, 0.0);
  for (std::size_t n = 0; n <= N; ++n) {
    double s = total_[n];
    for (std::size_t j = 1; j <= n; ++j) s -= first_[j] * total_[n - j];
    avoid_[n] = s;
  }
}

std::vector<double> RenewalSeries::pinned(double alpha) const {
  const std::size_t N = horizon();
  std::vector<double> b(N + 1, 0.0);
  b[0] = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    double s = 0.0;
    for (std::size_t j = 1; j <= n; ++j) s += first_[j] * b[n - j];
    b[n] = alpha * s;
  }
  return b;
}

std::vector<double> RenewalSeries::free_from_one(double alpha) const {
  const auto b = pinned(alpha);
  const std::size_t N = horizon();
  std::vector<double> out(N + 1, 0.0);
  for (std::size_t n = 0; n <= N; ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k <= n; ++k) s += b[k] * avoid_[n - k];
    out[n] = s;
  }
  return out;
}

std::vector<double> RenewalSeries::free_from_zero(double alpha) const {
  const auto b = pinned(alpha);
  const std::size_t N = horizon();
  std::vector<double> out(N + 1, 0.0);
  out[0] = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    double s = 0.0;
    // last coincidence at k <= n-1; none strictly between k and n
    for (std::size_t k = 0; k < n; ++k) s += b[k] * (avoid_[n - k] + first_[n - k]);
    out[n] = alpha * s;
  }
  return out;
}

}  // namespace brwre
