#pragma once

// Rotations s_{x1} for the shifted code. With f(r) = -log2 P(F^{-1}(r) | x1)
// and G(s) = integral over [0, s) of (f - mean f), the rotation for the
// first symbol maximizes G and the one for the last symbol minimizes it.
// G is piecewise linear, so the extremum sits on a region boundary.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dvfh/model.hpp"
#include "dvfh/shift_table.hpp"

namespace dvfh {

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 20;

/// f as a step function: piece i covers [breakpoints[i], breakpoints[i+1])
/// and takes values[i]. Zero-probability continuations contribute no piece.
struct StepFunction {
  std::vector<Rational> breakpoints;  // ascending, first 0, last 1
  std::vector<double> values;         // one per piece

  std::size_t pieces() const { return values.size(); }
  /// Integral of f over [0,1); equals H(X_2^n | X1 = x1).
  double mean() const;
  /// G at every breakpoint (size pieces() + 1).
  std::vector<double> cumulative() const;
};

StepFunction build_step_function(const BlockModel& model, int x1,
                                 std::uint64_t cap = kDefaultEnumerationCap);

enum class Extremum { ArgMax, ArgMin };

/// Breakpoint in [0,1) extremizing G; ties go to the smallest s.
Rational optimize_shift(const StepFunction& step, Extremum mode);

/// Monte Carlo variant for models too large to enumerate: samples
/// continuations, estimates G at the sampled region starts and returns the
/// best one. Deterministic in `seed`.
Rational optimize_shift_approx(const BlockModel& model, int x1, Extremum mode,
                               std::uint64_t samples, std::uint64_t seed);

/// s_0 by ArgMax, s_{m-1} by ArgMin, zero elsewhere. Exact mode enumerates
/// and throws EnumerationCapExceeded past `cap`.
ShiftTable compute_shift_table(const BlockModel& model, ShiftMode mode,
                               std::uint64_t cap = kDefaultEnumerationCap,
                               std::uint64_t samples = 100'000, std::uint64_t seed = 1);

}  // namespace dvfh
