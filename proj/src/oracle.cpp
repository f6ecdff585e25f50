#include "brwre/oracle.hpp"

#include <cmath>
#include <map>

#include "brwre/errors.hpp"

namespace brwre {

namespace {

constexpr double kTail = 1e-16;

using Pmf = std::vector<double>;

Pmf poisson_pmf(double lambda) {
  if (lambda == 0.0) return {1.0};
  Pmf out;
  for (std::uint64_t k = 0;; ++k) {
    const double p = std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
    out.push_back(p);
    // P(K > k) <= p r / (1 - r) with r = lambda / (k + 1) < 1.
    const double r = lambda / (k + 1.0);
    if (r < 0.5 && p * r / (1.0 - r) < kTail) break;
  }
  return out;
}

Pmf convolve(const Pmf& a, const Pmf& b) {
  Pmf out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Law of the sum of j independent draws, j = 0..n.
std::vector<Pmf> sum_laws(const OffspringLaw& law, std::uint64_t n) {
  std::vector<Pmf> out;
  out.reserve(n + 1);
  if (law.is_poisson()) {
    for (std::uint64_t j = 0; j <= n; ++j) out.push_back(poisson_pmf(j * law.poisson_mean()));
    return out;
  }
  const Pmf one(law.probs().begin(), law.probs().end());
  out.push_back({1.0});
  for (std::uint64_t j = 1; j <= n; ++j) out.push_back(convolve(out.back(), one));
  return out;
}

struct Split {
  std::uint64_t left;
  std::uint64_t right;
  double p;
};

// Joint law of the children sent left and right by n parents at one cell,
// the cell's law drawn from the model.
class SplitLaws {
 public:
  explicit SplitLaws(const EnvironmentModel& model) : model_(model) {}

  const std::vector<Split>& operator()(std::uint64_t n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> acc;
    for (const auto& comp : model_.components()) {
      const auto sums = sum_laws(comp.law, n);
      double binom = std::exp(-static_cast<double>(n) * std::log(2.0));  // C(n,0) 2^-n
      for (std::uint64_t j = 0; j <= n; ++j) {
        const double w = comp.weight * binom;
        const Pmf& l = sums[j];
        const Pmf& r = sums[n - j];
        for (std::size_t a = 0; a < l.size(); ++a) {
          if (l[a] == 0.0) continue;
          for (std::size_t b = 0; b < r.size(); ++b)
            if (r[b] != 0.0) acc[{a, b}] += w * l[a] * r[b];
        }
        binom *= static_cast<double>(n - j) / static_cast<double>(j + 1);
      }
    }
    std::vector<Split> v;
    v.reserve(acc.size());
    for (const auto& [k, p] : acc) v.push_back({k.first, k.second, p});
    return cache_.emplace(n, std::move(v)).first->second;
  }

 private:
  const EnvironmentModel& model_;
  std::map<std::uint64_t, std::vector<Split>> cache_;
};

// Counts at sites -t..t.
using Config = std::vector<std::uint64_t>;

std::uint64_t config_total(const Config& c) {
  std::uint64_t s = 0;
  for (auto v : c) s += v;
  return s;
}

}  // namespace

double ExactLawTable::mean_at(int x) const {
  if (x < -T || x > T) return 0.0;
  return mean[static_cast<std::size_t>(x + T)];
}

double ExactLawTable::pair_at(int x, int xt) const {
  if (x < -T || x > T || xt < -T || xt > T) return 0.0;
  const std::size_t W = 2 * static_cast<std::size_t>(T) + 1;
  return pair[static_cast<std::size_t>(x + T) * W + static_cast<std::size_t>(xt + T)];
}

double ExactLawTable::normalized_second_moment() const {
  long double s = 0.0L;
  for (double v : pair) s += v;
  return static_cast<double>(s / std::pow(static_cast<long double>(m), 2 * T));
}

double ExactLawTable::normalized_overlap_sum() const {
  long double s = 0.0L;
  for (int x = -T; x <= T; ++x) s += pair_at(x, x);
  return static_cast<double>(s / std::pow(static_cast<long double>(m), 2 * T));
}

ExactLawTable brute_force_oracle(const EnvironmentModel& model, int T, std::uint64_t atom_budget) {
  if (!model.enumerable()) throw PreconditionError("brute_force_oracle: model has no finite list of laws");
  if (T < 1 || T > 3) throw PreconditionError("brute_force_oracle: T must be in 1..3");
  ExactLawTable out;
  out.T = T;
  out.m = env_moments(model).m;
  SplitLaws splits(model);

  std::map<Config, double> level{{Config{1}, 1.0}};
  out.atoms = 1;
  for (int t = 0; t < T - 1; ++t) {
    std::map<Config, double> next;
    double worst = 0.0;
    for (const auto& [cfg, prob] : level) {
      std::vector<std::size_t> occupied;
      for (std::size_t i = 0; i < cfg.size(); ++i)
        if (cfg[i] > 0) occupied.push_back(i);
      // Conditional mean from the enumerated per-cell laws.
      long double cond = 0.0L;
      for (auto i : occupied)
        for (const auto& s : splits(cfg[i])) cond += s.p * static_cast<long double>(s.left + s.right);
      const double nbar = static_cast<double>(config_total(cfg)) / std::pow(out.m, t);
      worst = std::max(worst, std::abs(static_cast<double>(cond / std::pow(out.m, t + 1)) - nbar));
      // Product over occupied cells.
      Config work(cfg.size() + 2, 0);
      auto rec = [&](auto&& self, std::size_t k, double p) -> void {
        if (k == occupied.size()) {
          if (++out.atoms > atom_budget) throw ResourceLimitError("brute_force_oracle: atom budget exceeded");
          next[work] += p;
          return;
        }
        const std::size_t i = occupied[k];  // site i - t lands on index i (left) or i + 2 (right)
        for (const auto& s : splits(cfg[i])) {
          work[i] += s.left;
          work[i + 2] += s.right;
          self(self, k + 1, p * s.p);
          work[i] -= s.left;
          work[i + 2] -= s.right;
        }
      };
      if (occupied.empty()) {
        next[work] += prob;
        ++out.atoms;
      } else {
        rec(rec, 0, prob);
      }
    }
    out.martingale_residual.push_back(worst);
    level = std::move(next);
  }

  // Last step: moments and the law of N_T from the per-cell split laws.
  const std::size_t W = 2 * static_cast<std::size_t>(T) + 1;
  std::vector<long double> mean(W, 0.0L), pair(W * W, 0.0L);
  Pmf total_law{0.0};
  double worst = 0.0;
  for (const auto& [cfg, prob] : level) {
    out.total_probability += prob;
    // Per-cell moments: contributions c_i to index i (left) and i + 2 (right).
    std::vector<long double> el(cfg.size(), 0), er(cfg.size(), 0), ell(cfg.size(), 0), err(cfg.size(), 0),
        elr(cfg.size(), 0);
    Pmf law{1.0};
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if (cfg[i] == 0) continue;
      Pmf cell;
      for (const auto& s : splits(cfg[i])) {
        const long double a = s.left, b = s.right;
        el[i] += s.p * a;
        er[i] += s.p * b;
        ell[i] += s.p * a * a;
        err[i] += s.p * b * b;
        elr[i] += s.p * a * b;
        const std::size_t k = s.left + s.right;
        if (cell.size() <= k) cell.resize(k + 1, 0.0);
        cell[k] += s.p;
      }
      law = convolve(law, cell);
    }
    if (total_law.size() < law.size()) total_law.resize(law.size(), 0.0);
    long double cond = 0.0L;
    for (std::size_t k = 0; k < law.size(); ++k) {
      total_law[k] += prob * law[k];
      cond += law[k] * static_cast<long double>(k);
    }
    const double nbar = static_cast<double>(config_total(cfg)) / std::pow(out.m, T - 1);
    worst = std::max(worst, std::abs(static_cast<double>(cond / std::pow(out.m, T)) - nbar));

    // N_x = sum_i c_{i,x}; cells independent.
    std::vector<long double> mx(W, 0.0L);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      mx[i] += el[i];
      mx[i + 2] += er[i];
    }
    for (std::size_t x = 0; x < W; ++x) {
      mean[x] += prob * mx[x];
      for (std::size_t y = 0; y < W; ++y) pair[x * W + y] += prob * mx[x] * mx[y];
    }
    // Replace the product of means by the joint moments within each cell.
    for (std::size_t i = 0; i < cfg.size(); ++i) {
      if (cfg[i] == 0) continue;
      const std::size_t l = i, r = i + 2;
      pair[l * W + l] += prob * (ell[i] - el[i] * el[i]);
      pair[r * W + r] += prob * (err[i] - er[i] * er[i]);
      pair[l * W + r] += prob * (elr[i] - el[i] * er[i]);
      pair[r * W + l] += prob * (elr[i] - el[i] * er[i]);
    }
  }
  out.martingale_residual.push_back(worst);
  out.mean.assign(mean.begin(), mean.end());
  out.pair.assign(pair.begin(), pair.end());
  out.total_law = std::move(total_law);
  return out;
}

}  // namespace brwre
