#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace brwre {

using Site = std::vector<int>;

// Cell budget shared by every dense DP. The default (2^26 cells, 512 MiB of
// doubles) keeps two working buffers within a few GiB.
struct DpBudget {
  std::size_t max_cells = std::size_t{1} << 26;
};

// The centered box {x in Z^d : |x|_inf <= R} with row-major linear indexing
// (first coordinate varies slowest).
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(int dimension, int radius);

  // Throws ResourceLimitError if the box would exceed the budget.
  static LatticeBox checked(int dimension, int radius, const DpBudget& budget);

  int dimension() const { return dimension_; }
  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }
  std::size_t size() const { return size_; }

  bool contains(std::span<const int> x) const;
  std::size_t index(std::span<const int> x) const;
  void coords(std::size_t index, std::span<int> out) const;
  Site coords(std::size_t index) const;
  // Linear-index displacement of a coordinate offset.
  std::ptrdiff_t stride_offset(std::span<const int> offset) const;
  // |x|_inf of every cell, indexed linearly.
  std::vector<int> linf_norms() const;
  // |x|_1 of every cell, indexed linearly.
  std::vector<int> l1_norms() const;

  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;

 private:
  int dimension_ = 1;
  int radius_ = 0;
  std::size_t size_ = 1;
};

// Dense real field over a LatticeBox. The represented value at a cell is
// values[i] * exp(log_scale); log_scale stays 0 unless a DP rescaled to avoid
// overflow.
struct LatticeField {
  LatticeBox box;
  std::vector<double> values;
  double log_scale = 0.0;

  LatticeField() = default;
  explicit LatticeField(LatticeBox b) : box(b), values(b.size(), 0.0) {}

  // Represented value; 0 outside the box.
  double at(std::span<const int> x) const;
  double at(std::initializer_list<int> x) const { return at(std::span<const int>(x.begin(), x.size())); }
  double total() const;
  // log of the represented total (-inf for an all-zero field).
  double log_total() const;
  // Divide values by their largest magnitude and fold the factor into
  // log_scale. No-op on an all-zero field.
  void rescale();
  // Move log_scale into the values (may overflow; throws NumericOverflowError).
  void materialize();
};

// Translation-invariant transition kernel on Z^D given as a finite list of
// steps. All DP routines work with these.
struct KernelStep {
  Site offset;
  double prob = 0.0;
};

class Kernel {
 public:
  Kernel(int dimension, std::vector<KernelStep> steps);
  int dimension() const { return dimension_; }
  // max |offset|_inf over the steps
  int range() const { return range_; }
  const std::vector<KernelStep>& steps() const { return steps_; }
  double transition(std::span<const int> x, std::span<const int> y) const;

 private:
  int dimension_;
  int range_ = 0;
  std::vector<KernelStep> steps_;
};

// Nearest-neighbour uniform walk on Z^d.
Kernel simple_random_walk_kernel(int d);
// Two independent walks (S, S~) as one chain on Z^{2d}; the first d
// coordinates are S.
Kernel pair_walk_kernel(int d);
// Difference walk S - S~ on Z^d (law of two walk steps).
Kernel difference_walk_kernel(int d);

using SiteFunction = std::function<double(std::span<const int>)>;
using TimeSiteFunction = std::function<double(int, std::span<const int>)>;

// out(y) = sum_x in(x) k(x, y), both on `box`. The support of `in` must lie
// within |x|_inf <= support_radius with support_radius + range <= R.
void push_forward(const Kernel& kernel, const LatticeBox& box, std::span<const double> in,
                  std::span<double> out, int support_radius);

// Calls fn(index, coords) for every cell of `box` with |x|_inf <= r, in
// index order.
template <class Fn>
void for_each_cell(const LatticeBox& box, int r, Fn&& fn) {
  const int d = box.dimension();
  Site x(static_cast<std::size_t>(d), -r);
  while (true) {
    fn(box.index(x), std::span<const int>(x));
    int i = d - 1;
    while (i >= 0) {
      auto& c = x[static_cast<std::size_t>(i)];
      if (c < r) {
        ++c;
        break;
      }
      c = -r;
      --i;
    }
    if (i < 0) return;
  }
}

}  // namespace brwre
