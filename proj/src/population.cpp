#include "brwre/population.hpp"

#include <algorithm>
#include <cstdlib>

#include "brwre/errors.hpp"
#include "brwre/offspring.hpp"

namespace brwre {

namespace {
constexpr int kBits = 16;
constexpr int kOffset = 1 << (kBits - 1);

void check_dimension(int d) {
  if (d < 1 || d > kMaxSimDimension) throw PreconditionError("population: dimension must be in 1..4");
}
}  // namespace

std::uint64_t encode_site(std::span<const int> x) {
  check_dimension(static_cast<int>(x.size()));
  std::uint64_t key = 0;
  for (int c : x) {
    if (std::abs(c) >= kOffset) throw ResourceLimitError("population: coordinate outside the 16-bit site range");
    key = (key << kBits) | static_cast<std::uint64_t>(c + kOffset);
  }
  return key;
}

Site decode_site(std::uint64_t key, int d) {
  check_dimension(d);
  Site x(static_cast<std::size_t>(d));
  for (int i = d - 1; i >= 0; --i) {
    x[static_cast<std::size_t>(i)] = static_cast<int>(key & ((1u << kBits) - 1)) - kOffset;
    key >>= kBits;
  }
  return x;
}

std::uint64_t axis_key_step(int d, int axis) {
  return std::uint64_t{1} << (kBits * (d - 1 - axis));
}

PopulationField::PopulationField(int d) : d_(d) {
  check_dimension(d);
  cells_.push_back({encode_site(Site(static_cast<std::size_t>(d), 0)), 1});
  total_ = 1;
}

PopulationField::PopulationField(int d, int time, std::vector<PopulationCell> cells) : d_(d), time_(time) {
  check_dimension(d);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  for (const auto& c : cells) {
    if (c.count == 0) continue;
    if (!cells_.empty() && cells_.back().key == c.key) {
      if (c.count > kCountLimit - cells_.back().count) throw PopulationOverflowError("site count exceeds 2^63 - 1");
      cells_.back().count += c.count;
    } else {
      cells_.push_back(c);
    }
    if (c.count > kCountLimit - total_) throw PopulationOverflowError("total population exceeds 2^63 - 1");
    total_ += c.count;
  }
}

std::uint64_t PopulationField::count_at(std::span<const int> x) const {
  const auto key = encode_site(x);
  auto it = std::lower_bound(cells_.begin(), cells_.end(), key, [](const auto& c, std::uint64_t k) { return c.key < k; });
  return it != cells_.end() && it->key == key ? it->count : 0;
}

}  // namespace brwre
