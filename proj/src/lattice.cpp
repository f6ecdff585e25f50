#include "brwre/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "brwre/errors.hpp"

namespace brwre {

LatticeBox::LatticeBox(int dimension, int radius) : dimension_(dimension), radius_(radius) {
  if (dimension < 1) throw PreconditionError("LatticeBox: dimension must be >= 1");
  if (radius < 0) throw PreconditionError("LatticeBox: radius must be >= 0");
  size_ = 1;
  const auto s = static_cast<std::size_t>(side());
  for (int i = 0; i < dimension; ++i) {
    if (size_ > std::numeric_limits<std::size_t>::max() / s)
      throw ResourceLimitError("LatticeBox: cell count overflows size_t");
    size_ *= s;
  }
}

LatticeBox LatticeBox::checked(int dimension, int radius, const DpBudget& budget) {
  double cells = std::pow(2.0 * radius + 1.0, dimension);
  if (cells > static_cast<double>(budget.max_cells)) {
    throw ResourceLimitError("lattice box d=" + std::to_string(dimension) + " R=" + std::to_string(radius) +
                             " needs " + std::to_string(cells) + " cells, budget is " +
                             std::to_string(budget.max_cells));
  }
  return LatticeBox(dimension, radius);
}

bool LatticeBox::contains(std::span<const int> x) const {
  if (static_cast<int>(x.size()) != dimension_) return false;
  return std::all_of(x.begin(), x.end(), [&](int c) { return c >= -radius_ && c <= radius_; });
}

std::size_t LatticeBox::index(std::span<const int> x) const {
  std::size_t idx = 0;
  const auto s = static_cast<std::size_t>(side());
  for (int c : x) idx = idx * s + static_cast<std::size_t>(c + radius_);
  return idx;
}

void LatticeBox::coords(std::size_t index, std::span<int> out) const {
  const auto s = static_cast<std::size_t>(side());
  for (int i = dimension_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(index % s) - radius_;
    index /= s;
  }
}

Site LatticeBox::coords(std::size_t index) const {
  Site x(static_cast<std::size_t>(dimension_));
  coords(index, x);
  return x;
}

std::ptrdiff_t LatticeBox::stride_offset(std::span<const int> offset) const {
  std::ptrdiff_t off = 0;
  const auto s = static_cast<std::ptrdiff_t>(side());
  for (int c : offset) off = off * s + c;
  return off;
}

std::vector<int> LatticeBox::linf_norms() const {
  std::vector<int> out(size_);
  Site x(static_cast<std::size_t>(dimension_));
  for (std::size_t i = 0; i < size_; ++i) {
    coords(i, x);
    int n = 0;
    for (int c : x) n = std::max(n, std::abs(c));
    out[i] = n;
  }
  return out;
}

std::vector<int> LatticeBox::l1_norms() const {
  std::vector<int> out(size_);
  Site x(static_cast<std::size_t>(dimension_));
  for (std::size_t i = 0; i < size_; ++i) {
    coords(i, x);
    int n = 0;
    for (int c : x) n += std::abs(c);
    out[i] = n;
  }
  return out;
}

double LatticeField::at(std::span<const int> x) const {
  if (!box.contains(x)) return 0.0;
  const double v = values[box.index(x)];
  return log_scale == 0.0 ? v : v * std::exp(log_scale);
}

double LatticeField::total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return log_scale == 0.0 ? s : s * std::exp(log_scale);
}

double LatticeField::log_total() const {
  double s = 0.0;
  for (double v : values) s += v;
  return std::log(s) + log_scale;
}

void LatticeField::rescale() {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0 || !std::isfinite(peak)) return;
  const double inv = 1.0 / peak;
  for (double& v : values) v *= inv;
  log_scale += std::log(peak);
}

void LatticeField::materialize() {
  if (log_scale == 0.0) return;
  const double f = std::exp(log_scale);
  for (double& v : values) {
    v *= f;
    if (!std::isfinite(v)) throw NumericOverflowError("LatticeField::materialize: value out of double range");
  }
  log_scale = 0.0;
}

Kernel::Kernel(int dimension, std::vector<KernelStep> steps) : dimension_(dimension), steps_(std::move(steps)) {
  for (const auto& s : steps_) {
    if (static_cast<int>(s.offset.size()) != dimension_) throw PreconditionError("Kernel: offset dimension mismatch");
    for (int c : s.offset) range_ = std::max(range_, std::abs(c));
  }
}

double Kernel::transition(std::span<const int> x, std::span<const int> y) const {
  double p = 0.0;
  for (const auto& s : steps_) {
    bool match = true;
    for (int i = 0; i < dimension_ && match; ++i) match = (y[i] - x[i] == s.offset[static_cast<std::size_t>(i)]);
    if (match) p += s.prob;
  }
  return p;
}

Kernel simple_random_walk_kernel(int d) {
  if (d < 1) throw PreconditionError("simple_random_walk_kernel: d must be >= 1");
  std::vector<KernelStep> steps;
  const double p = 1.0 / (2.0 * d);
  for (int i = 0; i < d; ++i) {
    for (int sign : {-1, 1}) {
      Site off(static_cast<std::size_t>(d), 0);
      off[static_cast<std::size_t>(i)] = sign;
      steps.push_back({off, p});
    }
  }
  return Kernel(d, std::move(steps));
}

Kernel pair_walk_kernel(int d) {
  const Kernel single = simple_random_walk_kernel(d);
  std::vector<KernelStep> steps;
  for (const auto& a : single.steps()) {
    for (const auto& b : single.steps()) {
      Site off = a.offset;
      off.insert(off.end(), b.offset.begin(), b.offset.end());
      steps.push_back({off, a.prob * b.prob});
    }
  }
  return Kernel(2 * d, std::move(steps));
}

Kernel difference_walk_kernel(int d) {
  const Kernel single = simple_random_walk_kernel(d);
  std::vector<KernelStep> steps;
  for (const auto& a : single.steps()) {
    for (const auto& b : single.steps()) {
      Site off(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) off[static_cast<std::size_t>(i)] = a.offset[static_cast<std::size_t>(i)] - b.offset[static_cast<std::size_t>(i)];
      auto it = std::find_if(steps.begin(), steps.end(), [&](const KernelStep& s) { return s.offset == off; });
      if (it == steps.end()) {
        steps.push_back({off, a.prob * b.prob});
      } else {
        it->prob += a.prob * b.prob;
      }
    }
  }
  return Kernel(d, std::move(steps));
}

void push_forward(const Kernel& kernel, const LatticeBox& box, std::span<const double> in, std::span<double> out,
                  int support_radius) {
  if (support_radius + kernel.range() > box.radius())
    throw PreconditionError("push_forward: support plus kernel range exceeds the box");
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<std::ptrdiff_t> strides;
  std::vector<double> probs;
  for (const auto& s : kernel.steps()) {
    strides.push_back(box.stride_offset(s.offset));
    probs.push_back(s.prob);
  }
  const int d = box.dimension();
  const int R = box.radius();
  const auto side = static_cast<std::size_t>(box.side());
  // Walk only the sub-box |x|_inf <= support_radius: iterate the last
  // coordinate as a contiguous run.
  Site x(static_cast<std::size_t>(d), -support_radius);
  const std::size_t run = static_cast<std::size_t>(2 * support_radius + 1);
  while (true) {
    std::size_t base = 0;
    for (int i = 0; i < d; ++i) base = base * side + static_cast<std::size_t>(x[static_cast<std::size_t>(i)] + R);
    for (std::size_t k = 0; k < run; ++k) {
      const double v = in[base + k];
      if (v == 0.0) continue;
      for (std::size_t s = 0; s < strides.size(); ++s) {
        out[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base + k) + strides[s])] += v * probs[s];
      }
    }
    // advance the leading d-1 coordinates
    int i = d - 2;
    while (i >= 0) {
      auto& c = x[static_cast<std::size_t>(i)];
      if (c < support_radius) {
        ++c;
        break;
      }
      c = -support_radius;
      --i;
    }
    if (i < 0) break;
  }
}

}  // namespace brwre
