#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace brwre {

// Bounded test functions on R^d with known integrals against g_1.
class TestFunction {
 public:
  enum class Kind { constant, cosine, gaussian_bump, clipped_polynomial };

  static TestFunction constant(double value);
  // cos(theta . u)
  static TestFunction cosine(std::vector<double> theta);
  // exp(-a |u|^2), a > 0
  static TestFunction gaussian_bump(double a);
  // min(|u|^2, cap), cap > 0
  static TestFunction clipped_polynomial(double cap);

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  const std::vector<double>& theta() const { return theta_; }
  double operator()(std::span<const double> u) const;
  double sup() const;
  // For cosines whose theta has a single nonzero coordinate: that axis.
  std::optional<int> cosine_axis() const;
  double theta_norm() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double param_ = 0.0;
  std::vector<double> theta_;
};

// (d / (2 pi t))^{d/2} exp(-d |x|^2 / (2t)).
double gaussian_density(double t, std::span<const double> x, int d);

// Closed-form integral of f against g_1 on R^d.
double integral_fg1(const TestFunction& f, int d);
// The same integral by adaptive quadrature (radial or coordinatewise).
double integral_fg1_quadrature(const TestFunction& f, int d);

}  // namespace brwre
