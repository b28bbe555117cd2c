#pragma once

// Exact dyadic arithmetic on sub-intervals of [0,1).
//
// Every interval here is half-open. A CircularArc lives on the unit circle
// R/Z and may run past 1; its "unwrapped" form is [start, start + length)
// with start in [0,1), so the linear algorithms below apply to it unchanged.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dvfh/rational.hpp"

namespace dvfh {

/// Half-open [lo, hi) with 0 <= lo < hi <= 1.
class UnitInterval {
 public:
  UnitInterval(Rational lo, Rational hi);

  static UnitInterval full() { return UnitInterval(Rational(0), Rational(1)); }

  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  Rational length() const { return hi_ - lo_; }

  bool contains(const Rational& x) const { return lo_ <= x && x < hi_; }
  bool contains(const UnitInterval& other) const {
    return lo_ <= other.lo_ && other.hi_ <= hi_;
  }

  friend bool operator==(const UnitInterval&, const UnitInterval&) = default;

 private:
  Rational lo_;
  Rational hi_;
};

/// {<start + u> : 0 <= u < length} on the unit circle.
class CircularArc {
 public:
  CircularArc(Rational start, Rational length);
  explicit CircularArc(const UnitInterval& linear)
      : CircularArc(linear.lo(), linear.length()) {}

  const Rational& start() const { return start_; }
  const Rational& length() const { return length_; }
  /// Unwrapped upper end, in (start, start + 1].
  Rational end() const { return start_ + length_; }
  bool wraps() const { return end() > 1; }
  /// The arc as a linear interval; only valid when !wraps().
  UnitInterval as_interval() const { return UnitInterval(start_, end()); }

  friend bool operator==(const CircularArc&, const CircularArc&) = default;

 private:
  Rational start_;
  Rational length_;
};

/// A bijection of {0..m-1} together with its inverse.
class Permutation {
 public:
  explicit Permutation(std::vector<int> forward);

  int operator()(int i) const { return forward_[static_cast<std::size_t>(i)]; }
  int inverse(int v) const { return inverse_[static_cast<std::size_t>(v)]; }
  std::size_t size() const { return forward_.size(); }
  const std::vector<int>& forward() const { return forward_; }
  const std::vector<int>& inverse() const { return inverse_; }

 private:
  std::vector<int> forward_;
  std::vector<int> inverse_;
};

/// 2^-l * floor(2^l * r): the first l bits of r as a dyadic rational.
Rational floor_bits(const Rational& r, std::int64_t l);

/// 2^l * r - floor(2^l * r): the bits of r after position l.
Rational frac_after(const Rational& r, std::int64_t l);

/// r - floor(r).
Rational frac_mod1(const Rational& r);

/// Largest l >= 0 with hi <= floor_bits(lo, l) + m * 2^-l.
std::int64_t interval_depth(const UnitInterval& interval, int alphabet_size);
/// Same condition on the unwrapped arc [start, start + length).
std::int64_t interval_depth(const CircularArc& arc, int alphabet_size);

using Pieces = std::vector<std::optional<UnitInterval>>;

/// Intersections of the interval with the m consecutive depth-l0 dyadic
/// cells starting at the cell that contains lo. Empty pieces are nullopt.
Pieces subdivide(const UnitInterval& interval, std::int64_t depth, int alphabet_size);
/// Circular version: cells are walked from the cell containing start and
/// each piece is reported modulo 1. Every piece sits inside one linear cell.
Pieces subdivide(const CircularArc& arc, std::int64_t depth, int alphabet_size);

std::size_t count_nonempty(const Pieces& pieces);

/// The unique l with 2^-(l+1) < x <= 2^-l, for 0 < x <= 1.
std::int64_t floor_neg_log2(const Rational& x);

/// [frac_after(lo, l1), frac_after(hi, l1)) with an upper end of 0 read as 1.
/// The interval must sit inside a single depth-l1 dyadic cell.
UnitInterval rescale(const UnitInterval& interval, std::int64_t l1);

/// Descending order of values; equal values keep ascending index order.
Permutation rank_desc(std::span<const Rational> values);

/// Piece lengths with absent pieces counted as 0.
std::vector<Rational> piece_lengths(const Pieces& pieces);

struct EmptySet {
  friend bool operator==(EmptySet, EmptySet) = default;
};
struct Disconnected {
  friend bool operator==(Disconnected, Disconnected) = default;
};
/// Result of intersecting a linear interval with an arc. A CircularArc
/// alternative only appears when the intersection passes through 0.
using ArcIntersection = std::variant<EmptySet, UnitInterval, CircularArc, Disconnected>;

ArcIntersection arc_intersect(const UnitInterval& interval, const CircularArc& arc);

/// Measure of an intersection result (0 for EmptySet; Disconnected has no
/// single measure and throws).
Rational measure(const ArcIntersection& result);

std::string to_string(const UnitInterval& interval);
std::string to_string(const CircularArc& arc);

/// Binary-fraction rendering of a dyadic rational in [0,1), e.g. "0.011".
/// Throws if r is not dyadic.
std::string binary_fraction(const Rational& r);

}  // namespace dvfh
