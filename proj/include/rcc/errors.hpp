#pragma once

#include <stdexcept>
#include <string>

namespace rcc {

/// Malformed or out-of-range configuration (bad keys, invalid values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument shapes that do not agree with each other.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function was evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The radar SINR floor cannot be met even with every comm power at zero.
class Infeasible : public std::runtime_error {
 public:
  Infeasible(const std::string& what, double max_sinr)
      : std::runtime_error(what), max_sinr_(max_sinr) {}

  /// Best linear radar SINR that is attainable.
  double max_sinr() const noexcept { return max_sinr_; }

 private:
  double max_sinr_;
};

/// Dykstra sweeps ran out before reaching the requested tolerance.
class ProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The brute-force search would exceed its evaluation budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcc
