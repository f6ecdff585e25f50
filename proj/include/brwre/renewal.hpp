#pragma once

#include <span>
#include <vector>

namespace brwre {

// Large-horizon pair-walk quantities that avoid (2t+1)^d lattices.

// log p_{2n}(0,0) for the d-dimensional walk, n = 0..n_max. Uses the
// coordinate-split identity p_{2n} = (2n)!/d^{2n} sum_{k_1+..+k_d=n}
// prod_j 1/((k_j!)^2 4^{k_j}) evaluated as a log-domain convolution.
std::vector<double> log_return_probabilities(int d, int n_max);
std::vector<double> return_probabilities(int d, int n_max);

// W[n] = sum_y p_n(0,y)^2 cos(omega * y_1), n = 0..n_max. For omega = 0 this
// is p_{2n}(0,0). Splits the walk into its first coordinate and the
// remaining (d-1)-dimensional walk.
std::vector<double> meeting_overlap(int d, int n_max, double omega);

// Renewal decomposition of a multiplicatively twisted pair walk at the
// difference origin. Inputs: visit[n] = E[w_n; Y_n = 0], total[n] = E[w_n]
// with visit[0] = total[0] = 1.
class RenewalSeries {
 public:
  RenewalSeries(std::span<const double> visit, std::span<const double> total);

  std::size_t horizon() const { return first_.size() - 1; }
  // E[w_n; first return at n]
  const std::vector<double>& first_visit() const { return first_; }
  // E[w_n; Y_k != 0 for 1 <= k <= n]
  const std::vector<double>& avoid() const { return avoid_; }

  // E[alpha^{#{1<=k<=n : Y_k=0}} w_n; Y_n = 0], n = 0..N
  std::vector<double> pinned(double alpha) const;
  // E[alpha^{#{1<=k<=n : Y_k=0}} w_n], n = 0..N
  std::vector<double> free_from_one(double alpha) const;
  // E[alpha^{#{0<=k<=n-1 : Y_k=0}} w_n], n = 0..N
  std::vector<double> free_from_zero(double alpha) const;

 private:
  std::vector<double> total_;
  std::vector<double> first_;
  std::vector<double> avoid_;
};

}  // namespace brwre
