#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace brwre {

// Counter-based hashing: every random quantity attached to a time-space cell
// is a pure function of (seed, stream, t, x). Streams separate independent
// uses of the same cell (component choice, gaussian halves, ...).
std::uint64_t mix64(std::uint64_t z);
std::uint64_t hash_cell(std::uint64_t seed, std::uint64_t stream, std::int64_t t,
                        std::span<const int> site);
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// Uniform in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}
// Uniform in (0, 1).
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential random stream for branching and motion. Replicas get
// independent streams through derive_seed(master, {replica, tag}).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return to_unit(engine_()); }
  std::uint64_t bits() { return engine_(); }
  std::uint64_t binomial(std::uint64_t n, double p);
  std::uint64_t poisson(double mean);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace brwre
