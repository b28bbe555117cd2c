#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dvfh/shift.hpp"
#include "support.hpp"

using namespace dvfh;
using test::q;

namespace {

// G(s) evaluated directly from the definition at an arbitrary point.
double g_at(const StepFunction& f, const Rational& s) {
  const double mean = f.mean();
  double g = 0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const Rational& a = f.breakpoints[i];
    if (a >= s) break;
    const Rational b = std::min(f.breakpoints[i + 1], s);
    g += to_double(b - a) * (f.values[i] - mean);
  }
  return g;
}

}  // namespace

TEST_CASE("step function of the two-symbol example") {
  auto model = test::iid({"3/4", "1/4"}, 2);
  const StepFunction f = build_step_function(*model, 0);
  CHECK(f.breakpoints == test::qs({"0", "3/4", "1"}));
  REQUIRE(f.values.size() == 2);
  CHECK(f.values[0] == doctest::Approx(std::log2(4.0 / 3.0)));
  CHECK(f.values[1] == doctest::Approx(2.0));
  CHECK(optimize_shift(f, Extremum::ArgMax) == 0);
  CHECK(optimize_shift(f, Extremum::ArgMin) == q("3/4"));
}

TEST_CASE("uniform models give a constant step function") {
  auto model = test::iid({"1/2", "1/2"}, 5);
  const StepFunction f = build_step_function(*model, 1);
  CHECK(f.pieces() == 16);
  for (double v : f.values) CHECK(v == doctest::Approx(4.0));
  CHECK(optimize_shift(f, Extremum::ArgMax) == 0);
  CHECK(optimize_shift(f, Extremum::ArgMin) == 0);
  CHECK(compute_shift_table(*model, ShiftMode::Exact).s == test::qs({"0", "0"}));
}

TEST_CASE("zero-probability continuations leave no piece") {
  TableConfig t;
  t.n = 3;
  t.alphabet_size = 2;
  t.probs = {{"000", q("1/8")}, {"001", q("1/8")}, {"011", q("1/4")}, {"100", q("1/2")}};
  auto model = make_model(t, 3);
  const StepFunction f = build_step_function(*model, 0);
  CHECK(f.pieces() == 3);  // "010" is missing
  CHECK(f.breakpoints.front() == 0);
  CHECK(f.breakpoints.back() == 1);
  const auto g = f.cumulative();
  CHECK(std::abs(g.back()) < 1e-12);
}

TEST_CASE("two equal pieces with values v and 2*mean - v") {
  StepFunction f;
  f.breakpoints = test::qs({"0", "1/2", "1"});
  f.values = {1.0, 3.0};  // mean 2, v = 1 < mean
  CHECK(optimize_shift(f, Extremum::ArgMin) == q("1/2"));
  CHECK(optimize_shift(f, Extremum::ArgMax) == 0);
}

TEST_CASE("optimize_shift is the extremum over every breakpoint") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 60; ++i) {
    const int m = 2 + i % 3;
    auto model = make_model(test::random_markov(rng, m), 2 + i % 5);
    for (int x1 = 0; x1 < m; ++x1) {
      const StepFunction f = build_step_function(*model, x1);
      Rational width = 0;
      for (std::size_t k = 0; k < f.pieces(); ++k) width += f.breakpoints[k + 1] - f.breakpoints[k];
      CHECK(width == 1);
      CHECK(f.mean() == doctest::Approx(model->cond_entropy(x1)).epsilon(1e-12));
      const auto g = f.cumulative();
      CHECK(std::abs(g.front()) < 1e-12);
      CHECK(std::abs(g.back()) < 1e-12);
      const Rational smax = optimize_shift(f, Extremum::ArgMax);
      const Rational smin = optimize_shift(f, Extremum::ArgMin);
      CHECK(smax < 1);
      CHECK(smin < 1);
      for (std::size_t k = 0; k + 1 < f.breakpoints.size(); ++k) {
        CHECK(g_at(f, smax) >= g[k] - 1e-12);
        CHECK(g_at(f, smin) <= g[k] + 1e-12);
      }
    }
  }
}

TEST_CASE("approximate shifts") {
  auto model = test::iid({"3/4", "1/4"}, 8);
  const StepFunction f = build_step_function(*model, 0);
  const auto g = f.cumulative();
  const double best_max = *std::max_element(g.begin(), g.end());
  const double best_min = *std::min_element(g.begin(), g.end());
  const Rational amax = optimize_shift_approx(*model, 0, Extremum::ArgMax, 20000, 3);
  const Rational amin = optimize_shift_approx(*model, 1, Extremum::ArgMin, 20000, 3);
  CHECK(g_at(f, amax) == doctest::Approx(best_max).epsilon(0.05));
  CHECK(g_at(f, amin) == doctest::Approx(best_min).epsilon(0.05));
  CHECK(optimize_shift_approx(*model, 0, Extremum::ArgMax, 20000, 3) == amax);

  // A single sample: its own region start comes back.
  const Rational one = optimize_shift_approx(*model, 0, Extremum::ArgMin, 1, 9);
  bool is_breakpoint = false;
  for (const auto& b : f.breakpoints) is_breakpoint = is_breakpoint || b == one;
  CHECK(is_breakpoint);

  auto uniform = test::iid({"1/2", "1/2"}, 6);
  const StepFunction fu = build_step_function(*uniform, 0);
  const Rational su = optimize_shift_approx(*uniform, 0, Extremum::ArgMax, 500, 1);
  CHECK(std::abs(g_at(fu, su)) < 1e-12);
}

TEST_CASE("shift tables") {
  auto model = test::iid({"1/2", "1/4", "1/4"}, 4);
  const ShiftTable t = compute_shift_table(*model, ShiftMode::Exact);
  REQUIRE(t.s.size() == 3);
  CHECK(t.s[1] == 0);
  const auto j = to_json(t);
  CHECK(parse_shift_table(j) == t);
  CHECK(shift_digest(parse_shift_table(j)) == shift_digest(t));
  CHECK_THROWS_AS(compute_shift_table(*test::iid({"1/2", "1/2"}, 30), ShiftMode::Exact, 1u << 10),
                  EnumerationCapExceeded);
  CHECK_THROWS(parse_shift_table(nlohmann::json::parse(R"({"mode":"exact","s":["1/1"]})")));
  CHECK_THROWS(parse_shift_table(nlohmann::json::parse(R"({"mode":"maybe","s":["0/1"]})")));
}

TEST_CASE("rate example table: s_0 = 0 and s_1 on a breakpoint") {
  auto model = test::iid({"3/4", "1/4"}, 8);
  const ShiftTable t = compute_shift_table(*model, ShiftMode::Exact);
  CHECK(t.s[0] == 0);
  const StepFunction f = build_step_function(*model, 1);
  CHECK(std::find(f.breakpoints.begin(), f.breakpoints.end(), t.s[1]) != f.breakpoints.end());
}
