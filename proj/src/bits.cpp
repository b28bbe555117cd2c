#include "dvfh/bits.hpp"

#include <stdexcept>

namespace dvfh {

Rational MessageBits::tail_value(std::uint64_t position) const {
  if (position >= bits_.size()) return Rational(0);
  const std::uint64_t count = bits_.size() - position;
  Integer num = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    num <<= 1;
    if (bits_[position + i]) num += 1;
  }
  Integer den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), count);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

bool RandomBits::bit(std::uint64_t position) {
  const std::uint64_t word = position / 64;
  while (words_.size() <= word) words_.push_back(engine_());
  return (words_[word] >> (63 - position % 64)) & 1U;
}

Bits RandomBits::prefix(std::uint64_t count) {
  Bits out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = bit(i) ? 1 : 0;
  return out;
}

Bits bits_from_string(std::string_view text) {
  Bits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bit strings may only contain 0 and 1");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Bits bits_from_bytes(std::span<const std::uint8_t> bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (auto byte : bytes) {
    for (int i = 7; i >= 0; --i) out.push_back((byte >> i) & 1U);
  }
  return out;
}

std::vector<std::uint8_t> bytes_from_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) throw std::invalid_argument("bit count is not a multiple of 8");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  }
  return out;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over a Weyl sequence keyed by (master, index).
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  z += master * 0xd1b54a32d192ed03ULL;
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  return z ^ (z >> 33);
}

}  // namespace dvfh
