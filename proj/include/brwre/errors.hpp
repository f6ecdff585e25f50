#pragma once

#include <stdexcept>
#include <string>

namespace brwre {

// A computation would exceed a configured cell, atom or time budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A DP value left the double range; rerun with log-scale inputs.
class NumericOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A site count or the total population would exceed 2^63 - 1.
class PopulationOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedMomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InfiniteMomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace brwre
