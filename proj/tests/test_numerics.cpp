#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dvfh/numerics.hpp"
#include "support.hpp"

using namespace dvfh;
using dvfh::test::q;

TEST_CASE("floor_bits truncates the binary expansion") {
  CHECK(floor_bits(q("5/16"), 2) == q("1/4"));
  CHECK(floor_bits(q("2/3"), 0) == 0);
  CHECK(floor_bits(q("3/4"), 3) == q("3/4"));
}

TEST_CASE("frac_after keeps the bits past l") {
  CHECK(frac_after(q("5/16"), 2) == q("1/4"));
  CHECK(frac_after(q("3/4"), 2) == 0);
  CHECK(frac_after(q("1/3"), 1) == q("2/3"));
}

TEST_CASE("frac_mod1") {
  CHECK(frac_mod1(q("7/4")) == q("3/4"));
  CHECK(frac_mod1(q("-1/4")) == q("3/4"));
  CHECK(frac_mod1(q("1")) == 0);
  CHECK(frac_mod1(q("-3")) == 0);
}

TEST_CASE("floor + fraction identity holds exactly") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> depth(0, 40);
  for (int i = 0; i < 2000; ++i) {
    const Rational r = test::random_unit(rng);
    const int l = depth(rng);
    const Rational f = floor_bits(r, l);
    CHECK(f <= r);
    CHECK(r < f + pow2(-l));
    CHECK(r == f + pow2(-l) * frac_after(r, l));
    CHECK(frac_after(r, l) >= 0);
    CHECK(frac_after(r, l) < 1);
  }
}

TEST_CASE("interval_depth") {
  CHECK(interval_depth(UnitInterval(q("0"), q("3/4")), 2) == 1);
  CHECK(interval_depth(UnitInterval(q("3/4"), q("1")), 2) == 3);
  CHECK(interval_depth(UnitInterval::full(), 2) == 1);
  CHECK(interval_depth(UnitInterval::full(), 4) == 2);
  CHECK(interval_depth(UnitInterval::full(), 3) == 1);
}

namespace {
bool depth_condition(const UnitInterval& iv, std::int64_t l, int m) {
  return iv.hi() <= floor_bits(iv.lo(), l) + m * pow2(-l);
}
}  // namespace

TEST_CASE("interval_depth is the largest l satisfying the cell condition") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> alpha(2, 6);
  for (int i = 0; i < 3000; ++i) {
    Rational a = test::random_unit(rng);
    Rational b = test::random_unit(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (i % 3 == 0) b = 1;
    const UnitInterval iv(a, b);
    const int m = alpha(rng);
    const auto l = interval_depth(iv, m);
    CHECK(l >= 0);
    CHECK(depth_condition(iv, l, m));
    CHECK_FALSE(depth_condition(iv, l + 1, m));
  }
}

TEST_CASE("subdivide examples") {
  auto p = subdivide(UnitInterval(q("0"), q("3/4")), 1, 2);
  REQUIRE(p.size() == 2);
  CHECK(*p[0] == UnitInterval(q("0"), q("1/2")));
  CHECK(*p[1] == UnitInterval(q("1/2"), q("3/4")));

  p = subdivide(UnitInterval(q("3/4"), q("1")), 3, 2);
  CHECK(*p[0] == UnitInterval(q("3/4"), q("7/8")));
  CHECK(*p[1] == UnitInterval(q("7/8"), q("1")));

  p = subdivide(UnitInterval(q("1/3"), q("1")), 1, 2);
  CHECK(*p[0] == UnitInterval(q("1/3"), q("1/2")));
  CHECK(*p[1] == UnitInterval(q("1/2"), q("1")));
}

TEST_CASE("subdivide partitions, counts and cell alignment") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> alpha(2, 6);
  for (int i = 0; i < 3000; ++i) {
    Rational a = test::random_unit(rng);
    Rational b = test::random_unit(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const UnitInterval iv(a, b);
    const int m = alpha(rng);
    const auto l0 = interval_depth(iv, m);
    const Pieces pieces = subdivide(iv, l0, m);
    REQUIRE(pieces.size() == static_cast<std::size_t>(m));
    const auto count = count_nonempty(pieces);
    CHECK(count >= 2);
    CHECK(count <= static_cast<std::size_t>(m));
    Rational total = 0;
    Rational cursor = iv.lo();
    for (const auto& p : pieces) {
      if (!p) continue;
      CHECK(p->lo() == cursor);  // contiguous, disjoint, in order
      cursor = p->hi();
      total += p->length();
      const bool flush_lo = floor_bits(p->lo(), l0) == p->lo();
      const bool flush_hi = floor_bits(p->hi(), l0) == p->hi() || p->hi() == 1;
      CHECK((flush_lo || flush_hi));
      // The piece fits a single cell at depth l1, so rescale accepts it.
      const auto l1 = floor_neg_log2(p->length());
      CHECK(p->hi() <= floor_bits(p->lo(), l1) + pow2(-l1));
      CHECK(rescale(*p, l1).length() == p->length() * pow2(l1));
    }
    CHECK(cursor == iv.hi());
    CHECK(total == iv.length());
  }
}

TEST_CASE("floor_neg_log2") {
  CHECK(floor_neg_log2(q("1/4")) == 2);
  CHECK(floor_neg_log2(q("3/10")) == 1);
  CHECK(floor_neg_log2(q("1")) == 0);
  CHECK(floor_neg_log2(q("1/3")) == 1);
  CHECK(floor_neg_log2(pow2(-300) + pow2(-900)) == 299);
  CHECK(floor_neg_log2(pow2(-300)) == 300);
}

TEST_CASE("rescale") {
  CHECK(rescale(UnitInterval(q("1/2"), q("3/4")), 2) == UnitInterval::full());
  CHECK(rescale(UnitInterval(q("3/4"), q("7/8")), 3) == UnitInterval::full());
  CHECK(rescale(UnitInterval(q("5/8"), q("3/4")), 1) == UnitInterval(q("1/4"), q("1/2")));
  CHECK_THROWS_AS(rescale(UnitInterval(q("3/8"), q("5/8")), 1), std::logic_error);
}

TEST_CASE("rank_desc") {
  auto p = rank_desc(test::qs({"1/5", "1/2", "3/10"}));
  CHECK(p.forward() == std::vector<int>{1, 2, 0});
  p = rank_desc(test::qs({"2/5", "2/5", "1/5"}));
  CHECK(p.forward() == std::vector<int>{0, 1, 2});
  p = rank_desc(test::qs({"1"}));
  CHECK(p.forward() == std::vector<int>{0});
}

TEST_CASE("rank_desc is a bijection ordered by value") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto v = test::random_dist(rng, 2 + i % 7, true);
    const auto p = rank_desc(v);
    for (int k = 0; k < static_cast<int>(v.size()); ++k) {
      CHECK(p.inverse(p(k)) == k);
      CHECK(p(p.inverse(k)) == k);
      if (k > 0) {
        const auto& prev = v[static_cast<std::size_t>(p(k - 1))];
        const auto& cur = v[static_cast<std::size_t>(p(k))];
        CHECK(prev >= cur);
        if (prev == cur) CHECK(p(k - 1) < p(k));
      }
    }
  }
  CHECK_THROWS(Permutation({0, 0}));
}

TEST_CASE("arc_intersect examples") {
  auto r = arc_intersect(UnitInterval::full(), CircularArc(q("7/8"), q("1/4")));
  REQUIRE(std::holds_alternative<CircularArc>(r));
  CHECK(std::get<CircularArc>(r) == CircularArc(q("7/8"), q("1/4")));

  r = arc_intersect(UnitInterval(q("1/4"), q("1")), CircularArc(q("1/2"), q("1/8")));
  REQUIRE(std::holds_alternative<UnitInterval>(r));
  CHECK(std::get<UnitInterval>(r) == UnitInterval(q("1/2"), q("5/8")));

  r = arc_intersect(UnitInterval(q("1/100"), q("1")), CircularArc(q("199/200"), q("1/40")));
  CHECK(std::holds_alternative<Disconnected>(r));

  r = arc_intersect(UnitInterval(q("0"), q("1/4")), CircularArc(q("1/2"), q("1/4")));
  CHECK(std::holds_alternative<EmptySet>(r));
}

namespace {
// |I meet A| by splitting [0,1) at every endpoint and testing midpoints.
Rational brute_measure(const UnitInterval& iv, const CircularArc& arc) {
  std::vector<Rational> cuts{0, 1, iv.lo(), iv.hi(), arc.start(), frac_mod1(arc.end())};
  std::sort(cuts.begin(), cuts.end());
  Rational total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i] == cuts[i + 1]) continue;
    const Rational mid = (cuts[i] + cuts[i + 1]) / 2;
    const bool in_arc = frac_mod1(mid - arc.start()) < arc.length();
    if (iv.contains(mid) && in_arc) total += cuts[i + 1] - cuts[i];
  }
  return total;
}
}  // namespace

TEST_CASE("arc_intersect measure matches a segment-wise oracle") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5000; ++i) {
    Rational a = test::random_dyadic(rng, 5);
    Rational b = test::random_dyadic(rng, 5);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (i % 4 == 0) b = 1;
    const UnitInterval iv(a, b);
    Rational len = test::random_dyadic(rng, 5);
    if (len == 0) len = 1;
    const CircularArc arc(test::random_dyadic(rng, 5), len);
    const auto meet = arc_intersect(iv, arc);
    const Rational expect = brute_measure(iv, arc);
    if (std::holds_alternative<Disconnected>(meet)) {
      CHECK(expect > 0);
      continue;
    }
    CHECK(measure(meet) == expect);
    if (const auto* lin = std::get_if<UnitInterval>(&meet)) {
      CHECK(iv.contains(*lin));
    }
  }
}

TEST_CASE("circular depth and subdivision of a wrapped arc") {
  const CircularArc arc(q("3/4"), q("1/2"));  // [3/4, 1) then [0, 1/4)
  const auto l0 = interval_depth(arc, 2);
  CHECK(l0 == 2);  // end 5/4 <= 3/4 + 2/4, and 3/4 + 2/8 < 5/4
  const Pieces p = subdivide(arc, l0, 2);
  REQUIRE(count_nonempty(p) == 2);
  CHECK(*p[0] == UnitInterval(q("3/4"), q("1")));
  CHECK(*p[1] == UnitInterval(q("0"), q("1/4")));
}

TEST_CASE("formatting") {
  CHECK(to_string(q("3/4")) == "3/4");
  CHECK(to_string(Rational(0)) == "0/1");
  CHECK(to_string(UnitInterval(q("1/2"), q("1"))) == "[1/2, 1/1)");
  CHECK(binary_fraction(q("5/8")) == "0.101");
  CHECK_THROWS_AS(UnitInterval(q("1/2"), q("1/2")), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("three"), std::invalid_argument);
  CHECK(parse_rational("0.33") == q("33/100"));
  CHECK(parse_rational("2/4") == q("1/2"));
}
