#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evospec {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPi = std::numbers::pi;

/// Thrown on invalid configuration or inputs (bad manifests, dimension
/// mismatches, out-of-range knobs). CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on numerical failure (non-convergence, singular systems,
/// degenerate data). CLI maps this to exit code 1.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Kahan compensated sum; keeps cross-location accumulations
/// order-independent to ~1e-12.
class CompensatedSum {
 public:
  void add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline void require_finite(std::span<const double> v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ConfigError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

}  // namespace evospec
