#pragma once

// Shared fixtures and independent oracles for the test binaries. The oracles
// deliberately avoid the library's incremental algorithms: regions come from
// full enumeration plus sorting, probabilities from direct products.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dvfh/model.hpp"
#include "dvfh/rational.hpp"

namespace dvfh::test {

inline Rational q(const std::string& text) { return parse_rational(text); }

inline std::vector<Rational> qs(std::initializer_list<const char*> items) {
  std::vector<Rational> out;
  for (const char* s : items) out.push_back(parse_rational(s));
  return out;
}

inline ModelPtr iid(std::initializer_list<const char*> probs, int n) {
  return make_model(IidConfig{qs(probs)}, n);
}

// Random strictly positive distribution with small denominators.
inline std::vector<Rational> random_dist(std::mt19937_64& rng, int m, bool allow_zero = false) {
  std::uniform_int_distribution<int> weight(allow_zero ? 0 : 1, 7);
  std::vector<int> w(static_cast<std::size_t>(m));
  int total = 0;
  do {
    total = 0;
    for (auto& x : w) total += (x = weight(rng));
  } while (total == 0);
  std::vector<Rational> out;
  for (int x : w) {
    Rational r(x, total);
    r.canonicalize();
    out.push_back(r);
  }
  return out;
}

inline IidConfig random_iid(std::mt19937_64& rng, int m) { return IidConfig{random_dist(rng, m)}; }

// First-order chain with a strictly positive initial law and transition rows
// that may contain zeros.
inline MarkovConfig random_markov(std::mt19937_64& rng, int m) {
  MarkovConfig c;
  c.order = 1;
  c.initial = random_dist(rng, m);
  for (int i = 0; i < m; ++i) c.transition.push_back(random_dist(rng, m, true));
  return c;
}

// All m^len sequences in lexicographic order.
inline std::vector<Sequence> all_sequences(int m, int len) {
  std::vector<Sequence> out;
  Sequence s(static_cast<std::size_t>(len), 0);
  for (;;) {
    out.push_back(s);
    int i = len - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == m - 1) s[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++s[static_cast<std::size_t>(i)];
  }
  return out;
}

// P(x_2^n | x1) as a product of conditionals.
inline Rational brute_conditional(const BlockModel& model, int x1, const Sequence& rest) {
  Rational p = 1;
  for (std::size_t k = 0; k < rest.size(); ++k) {
    const auto& row = model.conditional(x1, std::span<const int>(rest.data(), k));
    p *= row.prob[static_cast<std::size_t>(rest[k])];
  }
  return p;
}

struct BruteRegion {
  Sequence rest;
  Rational lower;
  Rational upper;
};

// Regions by enumerating every continuation and summing the masses of all
// lexicographically smaller ones.
inline std::vector<BruteRegion> brute_regions(const BlockModel& model, int x1) {
  const auto seqs = all_sequences(model.alphabet_size(), model.block_length() - 1);
  std::vector<Rational> mass;
  for (const auto& s : seqs) mass.push_back(brute_conditional(model, x1, s));
  std::vector<BruteRegion> out;
  Rational below = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out.push_back({seqs[i], below, below + mass[i]});
    below += mass[i];
  }
  return out;
}

inline Rational random_dyadic(std::mt19937_64& rng, int bits) {
  std::uniform_int_distribution<std::uint64_t> d(0, (std::uint64_t{1} << bits) - 1);
  return Rational(Integer(std::to_string(d(rng)))) * pow2(-bits);
}

inline Rational random_unit(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> den(1, 1000);
  const int b = den(rng);
  std::uniform_int_distribution<int> num(0, b - 1);
  Rational r(num(rng), b);
  r.canonicalize();
  return r;
}

}  // namespace dvfh::test
