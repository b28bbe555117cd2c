#include "dvfh/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "dvfh/bits.hpp"

namespace dvfh {

namespace {

// Relative slack when comparing G values that are equal in exact arithmetic.
constexpr double kTieTolerance = 1e-12;

bool better(double candidate, double best, Extremum mode) {
  const double slack = kTieTolerance * std::max(1.0, std::abs(best));
  return mode == Extremum::ArgMax ? candidate > best + slack : candidate < best - slack;
}

}  // namespace

double StepFunction::mean() const {
  long double acc = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += static_cast<long double>(to_double(breakpoints[i + 1] - breakpoints[i])) * values[i];
  }
  return static_cast<double>(acc);
}

std::vector<double> StepFunction::cumulative() const {
  const long double fbar = mean();
  std::vector<double> g(values.size() + 1, 0.0);
  long double acc = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += static_cast<long double>(to_double(breakpoints[i + 1] - breakpoints[i])) *
           (static_cast<long double>(values[i]) - fbar);
    g[i + 1] = static_cast<double>(acc);
  }
  return g;
}

StepFunction build_step_function(const BlockModel& model, int x1, std::uint64_t cap) {
  if (continuation_count(model) > cap) {
    throw EnumerationCapExceeded("m^(n-1) exceeds the enumeration cap of " + std::to_string(cap));
  }
  StepFunction step;
  step.breakpoints.emplace_back(0);
  for_each_continuation(model, x1, [&](const Sequence&, const Region& region) {
    step.breakpoints.push_back(region.upper);
    step.values.push_back(-log2_of(region.width()));
  });
  return step;
}

Rational optimize_shift(const StepFunction& step, Extremum mode) {
  const auto g = step.cumulative();
  std::size_t best = 0;
  // The last breakpoint is 1, which coincides with 0 on the circle.
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    if (better(g[i], g[best], mode)) best = i;
  }
  return step.breakpoints[best];
}

Rational optimize_shift_approx(const BlockModel& model, int x1, Extremum mode,
                               std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("need at least one sample");
  std::mt19937_64 engine(seed);
  struct Sample {
    Rational lower;
    double f;
  };
  std::vector<Sample> drawn;
  drawn.reserve(samples);
  const Rational scale = pow2(-64);
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Rational r = Rational(Integer(std::to_string(engine()))) * scale;
    RegionDecision d = locate(model, x1, r);
    drawn.push_back({d.region.lower, -log2_of(d.region.width())});
  }
  long double fbar = 0;
  for (const auto& s : drawn) fbar += s.f;
  fbar /= static_cast<long double>(samples);
  std::stable_sort(drawn.begin(), drawn.end(),
                   [](const Sample& a, const Sample& b) { return a.lower < b.lower; });

  // G_hat(c) sums (f - fbar) / N over samples whose region ends at or before
  // c, i.e. whose region starts strictly before c.
  long double acc = 0;
  std::size_t i = 0;
  std::optional<std::pair<Rational, double>> best;
  while (i < drawn.size()) {
    const Rational candidate = drawn[i].lower;
    const double g = static_cast<double>(acc / static_cast<long double>(samples));
    if (!best || better(g, best->second, mode)) best.emplace(candidate, g);
    while (i < drawn.size() && drawn[i].lower == candidate) {
      acc += drawn[i].f - fbar;
      ++i;
    }
  }
  return best->first;
}

ShiftTable compute_shift_table(const BlockModel& model, ShiftMode mode, std::uint64_t cap,
                               std::uint64_t samples, std::uint64_t seed) {
  const int m = model.alphabet_size();
  ShiftTable table;
  table.mode = mode;
  table.s.assign(static_cast<std::size_t>(m), Rational(0));
  auto solve = [&](int x1, Extremum ext) {
    if (mode == ShiftMode::Exact) return optimize_shift(build_step_function(model, x1, cap), ext);
    return optimize_shift_approx(model, x1, ext, samples, split_seed(seed, static_cast<std::uint64_t>(x1)));
  };
  table.s.front() = solve(0, Extremum::ArgMax);
  table.s.back() = solve(m - 1, Extremum::ArgMin);
  return table;
}

}  // namespace dvfh
