#include "brwre/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "brwre/errors.hpp"
#include "brwre/format.hpp"

namespace brwre {

TestFunction TestFunction::constant(double value) {
  TestFunction f;
  f.kind_ = Kind::constant;
  f.param_ = value;
  return f;
}

TestFunction TestFunction::cosine(std::vector<double> theta) {
  if (theta.empty()) throw PreconditionError("TestFunction: cosine needs a frequency vector");
  TestFunction f;
  f.kind_ = Kind::cosine;
  f.theta_ = std::move(theta);
  return f;
}

TestFunction TestFunction::gaussian_bump(double a) {
  if (!(a > 0.0)) throw PreconditionError("TestFunction: gaussian bump needs a > 0");
  TestFunction f;
  f.kind_ = Kind::gaussian_bump;
  f.param_ = a;
  return f;
}

TestFunction TestFunction::clipped_polynomial(double cap) {
  if (!(cap > 0.0)) throw PreconditionError("TestFunction: clipped polynomial needs cap > 0");
  TestFunction f;
  f.kind_ = Kind::clipped_polynomial;
  f.param_ = cap;
  return f;
}

double TestFunction::operator()(std::span<const double> u) const {
  switch (kind_) {
    case Kind::constant: return param_;
    case Kind::cosine: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.size() && i < theta_.size(); ++i) s += theta_[i] * u[i];
      return std::cos(s);
    }
    case Kind::gaussian_bump:
    case Kind::clipped_polynomial: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      return kind_ == Kind::gaussian_bump ? std::exp(-param_ * r2) : std::min(r2, param_);
    }
  }
  return 0.0;
}

double TestFunction::sup() const {
  switch (kind_) {
    case Kind::constant: return std::abs(param_);
    case Kind::cosine:
    case Kind::gaussian_bump: return 1.0;
    case Kind::clipped_polynomial: return param_;
  }
  return 0.0;
}

std::optional<int> TestFunction::cosine_axis() const {
  if (kind_ != Kind::cosine) return std::nullopt;
  int axis = -1;
  for (std::size_t i = 0; i < theta_.size(); ++i) {
    if (theta_[i] == 0.0) continue;
    if (axis >= 0) return std::nullopt;
    axis = static_cast<int>(i);
  }
  return axis < 0 ? 0 : axis;
}

double TestFunction::theta_norm() const {
  double s = 0.0;
  for (double v : theta_) s += v * v;
  return std::sqrt(s);
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant: os << "constant(" << format_real(param_) << ")"; break;
    case Kind::cosine:
      os << "cosine(";
      for (std::size_t i = 0; i < theta_.size(); ++i) os << (i ? "," : "") << format_real(theta_[i]);
      os << ")";
      break;
    case Kind::gaussian_bump: os << "gaussian_bump(" << format_real(param_) << ")"; break;
    case Kind::clipped_polynomial: os << "clipped_polynomial(" << format_real(param_) << ")"; break;
  }
  return os.str();
}

double gaussian_density(double t, std::span<const double> x, int d) {
  if (!(t > 0.0)) throw PreconditionError("gaussian_density: t must be > 0");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::pow(d / (2.0 * std::numbers::pi * t), d / 2.0) * std::exp(-d * r2 / (2.0 * t));
}

double integral_fg1(const TestFunction& f, int d) {
  if (d < 1) throw PreconditionError("integral_fg1: d must be >= 1");
  switch (f.kind()) {
    case TestFunction::Kind::constant: return f.param();
    case TestFunction::Kind::cosine: {
      // frequencies beyond the first d coordinates never see an argument
      double n2 = 0.0;
      for (std::size_t i = 0; i < f.theta().size() && i < static_cast<std::size_t>(d); ++i) n2 += f.theta()[i] * f.theta()[i];
      return std::exp(-n2 / (2.0 * d));
    }
    case TestFunction::Kind::gaussian_bump: return std::pow(d / (d + 2.0 * f.param()), d / 2.0);
    case TestFunction::Kind::clipped_polynomial: {
      // |U|^2 = G/d with G chi-square(d): E[min(G/d, c)]
      //   = P(chi2_{d+2} < dc) + c P(chi2_d >= dc).
      const double x = d * f.param();
      return boost::math::gamma_p((d + 2) / 2.0, x / 2.0) + f.param() * boost::math::gamma_q(d / 2.0, x / 2.0);
    }
  }
  return 0.0;
}

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;

// Density of |U| for U ~ g_1 on R^d.
double radius_density(double r, int d) {
  const double surface = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  return surface * std::pow(r, d - 1) * std::pow(d / (2.0 * std::numbers::pi), d / 2.0) * std::exp(-d * r * r / 2.0);
}

double radial_integral(const std::function<double(double)>& F, int d, double kink) {
  auto g = [&](double r) { return F(r) * radius_density(r, d); };
  const double end = 40.0 / std::sqrt(static_cast<double>(d));
  if (kink > 0.0 && kink < end)
    return Quad::integrate(g, 0.0, kink, 15, 1e-13) + Quad::integrate(g, kink, end, 15, 1e-13);
  return Quad::integrate(g, 0.0, end, 15, 1e-13);
}

}  // namespace

double integral_fg1_quadrature(const TestFunction& f, int d) {
  if (d < 1) throw PreconditionError("integral_fg1_quadrature: d must be >= 1");
  switch (f.kind()) {
    case TestFunction::Kind::constant: return f.param() * radial_integral([](double) { return 1.0; }, d, 0.0);
    case TestFunction::Kind::cosine: {
      // E[cos(theta . U)] = prod_i E[cos(theta_i U_i)], U_i ~ N(0, 1/d).
      const double sd = 1.0 / std::sqrt(static_cast<double>(d));
      double prod = 1.0;
      for (int i = 0; i < d; ++i) {
        const double th = i < static_cast<int>(f.theta().size()) ? f.theta()[static_cast<std::size_t>(i)] : 0.0;
        auto g = [&](double u) {
          return std::cos(th * u) * std::exp(-0.5 * u * u / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
        };
        prod *= Quad::integrate(g, -40.0 * sd, 40.0 * sd, 20, 1e-15);
      }
      return prod;
    }
    case TestFunction::Kind::gaussian_bump: {
      const double a = f.param();
      return radial_integral([a](double r) { return std::exp(-a * r * r); }, d, 0.0);
    }
    case TestFunction::Kind::clipped_polynomial: {
      const double cap = f.param();
      return radial_integral([cap](double r) { return std::min(r * r, cap); }, d, std::sqrt(cap));
    }
  }
  return 0.0;
}

}  // namespace brwre
