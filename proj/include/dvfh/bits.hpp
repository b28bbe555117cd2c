#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dvfh/rational.hpp"

namespace dvfh {

using Bits = std::vector<std::uint8_t>;

/// Read-only view of an input bit stream u_1 u_2 ... with a consume cursor.
/// Bits at or after the cursor may be peeked any number of times.
class BitSource {
 public:
  virtual ~BitSource() = default;

  /// Bit at absolute 0-based position.
  virtual bool bit(std::uint64_t position) = 0;

  std::uint64_t cursor() const { return cursor_; }
  void consume(std::uint64_t count) { cursor_ += count; }

 private:
  std::uint64_t cursor_ = 0;
};

/// A finite message followed by infinitely many zeros.
class MessageBits final : public BitSource {
 public:
  explicit MessageBits(Bits bits) : bits_(std::move(bits)) {}

  bool bit(std::uint64_t position) override {
    return position < bits_.size() && bits_[position] != 0;
  }
  std::uint64_t length() const { return bits_.size(); }
  const Bits& bits() const { return bits_; }

  /// The exact value 0.u_{p+1} u_{p+2} ... of the stream from `position` on.
  Rational tail_value(std::uint64_t position) const;

 private:
  Bits bits_;
};

/// Fair coin flips from a seeded engine, generated on demand and retained so
/// that every position reads back the same value.
class RandomBits final : public BitSource {
 public:
  explicit RandomBits(std::uint64_t seed) : engine_(seed) {}

  bool bit(std::uint64_t position) override;
  /// Positions [0, count) as a bit vector (generating as needed).
  Bits prefix(std::uint64_t count);

 private:
  std::mt19937_64 engine_;
  std::vector<std::uint64_t> words_;
};

/// "1011" -> {1,0,1,1}. Throws std::invalid_argument on other characters.
Bits bits_from_string(std::string_view text);
std::string bits_to_string(std::span<const std::uint8_t> bits);

/// Bytes to bits, MSB first, and back (bit count must be a multiple of 8).
Bits bits_from_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bytes_from_bits(std::span<const std::uint8_t> bits);

/// Seed for stream `index` under `master`; counter-based so that parallel
/// runs reproduce serial ones.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

}  // namespace dvfh
