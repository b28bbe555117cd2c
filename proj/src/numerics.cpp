#include "dvfh/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

namespace dvfh {

UnitInterval::UnitInterval(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (!(lo_ >= 0 && lo_ < hi_ && hi_ <= 1)) {
    throw std::invalid_argument("invalid unit interval [" + to_string(lo_) + ", " +
                                to_string(hi_) + ")");
  }
}

CircularArc::CircularArc(Rational start, Rational length)
    : start_(std::move(start)), length_(std::move(length)) {
  if (!(start_ >= 0 && start_ < 1 && length_ > 0 && length_ <= 1)) {
    throw std::invalid_argument("invalid arc (" + to_string(start_) + ", " + to_string(length_) +
                                ")");
  }
}

Permutation::Permutation(std::vector<int> forward)
    : forward_(std::move(forward)), inverse_(forward_.size(), -1) {
  for (std::size_t i = 0; i < forward_.size(); ++i) {
    const int v = forward_[i];
    if (v < 0 || static_cast<std::size_t>(v) >= forward_.size() ||
        inverse_[static_cast<std::size_t>(v)] != -1) {
      throw std::invalid_argument("not a permutation");
    }
    inverse_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
}

namespace {

// floor(r * 2^l) for l >= 0.
Integer scaled_floor(const Rational& r, std::int64_t l) {
  Integer num = r.get_num();
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(l));
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), r.get_den_mpz_t());
  return q;
}

Rational dyadic(const Integer& numerator, std::int64_t l) {
  Integer den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(l));
  Rational out(numerator, den);
  out.canonicalize();
  return out;
}

// hi <= (floor(lo * 2^l) + m) / 2^l, evaluated in integers.
bool depth_condition(const Rational& lo, const Rational& hi, std::int64_t l, int m) {
  Integer rhs = scaled_floor(lo, l) + m;
  rhs *= hi.get_den();
  Integer lhs = hi.get_num();
  mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(l));
  return lhs <= rhs;
}

std::int64_t depth_of(const Rational& lo, const Rational& hi, int m) {
  assert(m >= 2);
  // The condition holds whenever 2^-l >= hi - lo, and the right-hand side
  // strictly decreases in l, so scan upward from there.
  std::int64_t l = floor_neg_log2(hi - lo);
  assert(depth_condition(lo, hi, l, m));
  while (depth_condition(lo, hi, l + 1, m)) ++l;
  return l;
}

Pieces subdivide_span(const Rational& lo, const Rational& hi, std::int64_t depth, int m,
                      bool wrap) {
  Pieces pieces(static_cast<std::size_t>(m));
  const Integer base = scaled_floor(lo, depth);
  for (int i = 0; i < m; ++i) {
    Rational cell_lo = dyadic(base + i, depth);
    Rational cell_hi = dyadic(base + i + 1, depth);
    Rational a = std::max(cell_lo, lo);
    Rational b = std::min(cell_hi, hi);
    if (a >= b) continue;
    if (wrap && a >= 1) {
      a -= 1;
      b -= 1;
    }
    pieces[static_cast<std::size_t>(i)].emplace(std::move(a), std::move(b));
  }
  return pieces;
}

}  // namespace

Rational floor_bits(const Rational& r, std::int64_t l) {
  assert(l >= 0);
  return dyadic(scaled_floor(r, l), l);
}

Rational frac_after(const Rational& r, std::int64_t l) {
  assert(l >= 0);
  Rational scaled = r * pow2(l);
  return scaled - Rational(scaled_floor(r, l));
}

Rational frac_mod1(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return r - Rational(q);
}

std::int64_t interval_depth(const UnitInterval& interval, int alphabet_size) {
  return depth_of(interval.lo(), interval.hi(), alphabet_size);
}

std::int64_t interval_depth(const CircularArc& arc, int alphabet_size) {
  return depth_of(arc.start(), arc.end(), alphabet_size);
}

Pieces subdivide(const UnitInterval& interval, std::int64_t depth, int alphabet_size) {
  return subdivide_span(interval.lo(), interval.hi(), depth, alphabet_size, false);
}

Pieces subdivide(const CircularArc& arc, std::int64_t depth, int alphabet_size) {
  return subdivide_span(arc.start(), arc.end(), depth, alphabet_size, true);
}

std::size_t count_nonempty(const Pieces& pieces) {
  return static_cast<std::size_t>(
      std::count_if(pieces.begin(), pieces.end(), [](const auto& p) { return p.has_value(); }));
}

std::int64_t floor_neg_log2(const Rational& x) {
  if (!(x > 0 && x <= 1)) throw std::domain_error("floor_neg_log2 needs 0 < x <= 1");
  const auto bits_num = static_cast<std::int64_t>(mpz_sizeinbase(x.get_num_mpz_t(), 2));
  const auto bits_den = static_cast<std::int64_t>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
  const std::int64_t guess = bits_den - bits_num;
  Integer shifted = x.get_num();
  mpz_mul_2exp(shifted.get_mpz_t(), shifted.get_mpz_t(), static_cast<mp_bitcnt_t>(guess));
  return shifted <= x.get_den() ? guess : guess - 1;
}

UnitInterval rescale(const UnitInterval& interval, std::int64_t l1) {
  const Rational cell = floor_bits(interval.lo(), l1);
  const Rational scale = pow2(l1);
  if (interval.hi() > cell + 1 / scale) {
    throw std::logic_error("rescale: " + to_string(interval) + " straddles a depth-" +
                           std::to_string(l1) + " cell");
  }
  Rational lo = (interval.lo() - cell) * scale;
  Rational hi = (interval.hi() - cell) * scale;
  return UnitInterval(std::move(lo), std::move(hi));
}

Permutation rank_desc(std::span<const Rational> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  return Permutation(std::move(order));
}

std::vector<Rational> piece_lengths(const Pieces& pieces) {
  std::vector<Rational> lengths;
  lengths.reserve(pieces.size());
  for (const auto& p : pieces) lengths.push_back(p ? p->length() : Rational(0));
  return lengths;
}

ArcIntersection arc_intersect(const UnitInterval& interval, const CircularArc& arc) {
  // On the unwrapped line the arc is [s, e) with e <= s + 1 < 2; the circle
  // copy of the interval that can meet it is either [a, b) or [a+1, b+1).
  const Rational& s = arc.start();
  const Rational e = arc.end();
  const Rational a1 = std::max(s, interval.lo());
  const Rational b1 = std::min(e, interval.hi());
  const Rational a2 = std::max(s, Rational(interval.lo() + 1));
  const Rational b2 = std::min(e, Rational(interval.hi() + 1));
  const bool first = a1 < b1;
  const bool second = a2 < b2;
  if (first && second) {
    if (b1 == a2) return CircularArc(a1, b2 - a1);
    return Disconnected{};
  }
  if (first) return UnitInterval(a1, b1);
  if (second) return UnitInterval(a2 - 1, b2 - 1);
  return EmptySet{};
}

Rational measure(const ArcIntersection& result) {
  struct Visitor {
    Rational operator()(const EmptySet&) const { return 0; }
    Rational operator()(const UnitInterval& i) const { return i.length(); }
    Rational operator()(const CircularArc& a) const { return a.length(); }
    Rational operator()(const Disconnected&) const {
      throw std::logic_error("measure of a disconnected intersection");
    }
  };
  return std::visit(Visitor{}, result);
}

std::string to_string(const UnitInterval& interval) {
  return "[" + to_string(interval.lo()) + ", " + to_string(interval.hi()) + ")";
}

std::string to_string(const CircularArc& arc) {
  return "arc(" + to_string(arc.start()) + ", " + to_string(arc.length()) + ")";
}

std::string binary_fraction(const Rational& r) {
  if (!(r >= 0 && r < 1)) throw std::domain_error("binary_fraction needs r in [0,1)");
  const Integer& den = r.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) throw std::domain_error("not a dyadic rational");
  const auto bits = static_cast<std::int64_t>(mpz_sizeinbase(den.get_mpz_t(), 2)) - 1;
  std::string out = "0.";
  if (bits == 0) return out + "0";
  const Integer num = scaled_floor(r, bits);
  for (std::int64_t i = bits - 1; i >= 0; --i) {
    out.push_back(mpz_tstbit(num.get_mpz_t(), static_cast<mp_bitcnt_t>(i)) ? '1' : '0');
  }
  return out;
}

}  // namespace dvfh
