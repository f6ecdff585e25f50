#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "brwre/lattice.hpp"

namespace brwre {

// Sites are packed into one 64-bit key, 16 bits per coordinate with the
// first coordinate most significant, so key order is lexicographic site
// order. Supports d <= 4 and |x_i| < 2^15.
inline constexpr int kMaxSimDimension = 4;
std::uint64_t encode_site(std::span<const int> x);
Site decode_site(std::uint64_t key, int d);
// Key displacement for a unit step along axis i (add for +, subtract for -).
std::uint64_t axis_key_step(int d, int axis);

struct PopulationCell {
  std::uint64_t key = 0;
  std::uint64_t count = 0;
  friend bool operator==(const PopulationCell&, const PopulationCell&) = default;
};

// N_{t, .}: occupied sites with their counts, sorted by key.
class PopulationField {
 public:
  // N_{0,x} = delta_{0,x}.
  explicit PopulationField(int d);
  // Build from arbitrary cells (merged and sorted). Zero counts are dropped.
  PopulationField(int d, int time, std::vector<PopulationCell> cells);

  int dimension() const { return d_; }
  int time() const { return time_; }
  const std::vector<PopulationCell>& cells() const { return cells_; }
  std::uint64_t total() const { return total_; }
  bool extinct() const { return total_ == 0; }
  std::uint64_t count_at(std::span<const int> x) const;

  friend bool operator==(const PopulationField&, const PopulationField&) = default;

 private:
  int d_;
  int time_ = 0;
  std::vector<PopulationCell> cells_;
  std::uint64_t total_ = 0;
};

}  // namespace brwre
