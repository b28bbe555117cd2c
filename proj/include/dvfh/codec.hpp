#pragma once

// Delayed variable-to-fixed homophonic encoder and decoder.
//
// Each block j maps a variable number l1 of input bits to n symbols. The
// bits of block j only become decodable once the first symbol of block j+1
// arrives: that symbol carries the rank of the dyadic piece that r fell in.
// A finite message therefore always ends with one extra flush block.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvfh/bits.hpp"
#include "dvfh/model.hpp"
#include "dvfh/numerics.hpp"
#include "dvfh/shift_table.hpp"

namespace dvfh {

class DisconnectedIntersection : public std::runtime_error {
 public:
  explicit DisconnectedIntersection(std::uint64_t block)
      : std::runtime_error("block " + std::to_string(block) +
                           ": shifted region meets the interval in two components"),
        block_(block) {}
  std::uint64_t block() const { return block_; }

 private:
  std::uint64_t block_;
};

class TruncatedStream : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BlockBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Standard codes x1 as a rank under P_{X1}; the shifted form sends the
/// previous piece index directly and rotates every F_{x1} by s_{x1}.
class Variant {
 public:
  static Variant standard() { return Variant(); }
  static Variant shifted(ShiftTable table, int initial_piece = 0);

  bool is_shifted() const { return table_.has_value(); }
  const ShiftTable& table() const { return *table_; }
  int initial_piece() const { return initial_piece_; }
  /// s_{x1}; zero for the standard variant.
  const Rational& shift_for(int x1) const;

 private:
  Variant() = default;
  std::optional<ShiftTable> table_;
  int initial_piece_ = 0;
};

struct EncoderState {
  UnitInterval interval = UnitInterval::full();
  int rank = 0;          // k
  int previous_piece = 0;  // i* of the last block (shifted variant)
  std::uint64_t block = 0;  // blocks emitted so far
  std::uint64_t bits_consumed = 0;
};

EncoderState initial_encoder_state(const Variant& variant);

/// Everything the encoder decided for one block.
struct BlockTrace {
  std::uint64_t block = 0;  // 1-based
  Sequence codeword;        // x~_1^n
  UnitInterval interval_before = UnitInterval::full();
  CircularArc region = CircularArc(Rational(0), Rational(1));  // r-space region of x~_2^n
  CircularArc window = CircularArc(Rational(0), Rational(1));  // I'
  std::int64_t depth = 0;                                      // l0
  Pieces pieces;
  int piece = 0;             // i*
  std::int64_t consumed = 0;  // l1
  int rank_next = 0;          // k after the block
  UnitInterval interval_after = UnitInterval::full();
  std::uint64_t bit_offset = 0;  // t_(j), 0-based
  std::uint64_t bits_peeked = 0;
};

struct EncodedBlock {
  EncoderState state;
  BlockTrace trace;
};

/// One pass of the encoding loop. Reads bits lazily: the candidate set for r
/// halves per peeked bit until both the codeword and the piece are fixed;
/// exactly l1 bits are then consumed from `bits`.
EncodedBlock encode_block(const EncoderState& state, const BlockModel& model, BitSource& bits,
                          const Variant& variant);

using TraceObserver = std::function<void(const BlockTrace&)>;

struct EncodedMessage {
  std::vector<Sequence> blocks;
  std::uint64_t data_bits = 0;  // bits consumed by all blocks except the flush
};

/// Encodes until at least message.size() bits are consumed, then appends
/// one flush block. Padding is zeros.
EncodedMessage encode_message(const BlockModel& model, const Bits& message, const Variant& variant,
                              std::uint64_t block_budget = 1'000'000,
                              const TraceObserver& observer = {});

struct DecoderState {
  UnitInterval interval = UnitInterval::full();
  std::optional<Pieces> pieces;  // previous block's pieces
  std::uint64_t block = 0;
  std::uint64_t emitted = 0;
};

struct DecodedBlock {
  Bits bits;
  DecoderState state;
  CircularArc window = CircularArc(Rational(0), Rational(1));
  bool exception = false;  // I' was empty and fell back to the bare region
  bool fallback = false;   // the selected piece was empty (corrupted input)
};

DecodedBlock decode_block(const DecoderState& state, const BlockModel& model,
                          const Sequence& codeword, const Variant& variant);

/// Decodes blocks until `length` bits are available (at least one block is
/// read) and truncates. Throws TruncatedStream when the blocks run out.
Bits decode_message(const BlockModel& model, const std::vector<Sequence>& blocks,
                    std::uint64_t length, const Variant& variant);

struct InjectedDecode {
  Bits bits;                               // everything emitted
  std::vector<std::uint64_t> boundaries;   // t^_(j): start of block j's bits, j = 1..
  std::vector<CircularArc> windows;        // decoder I' per block
};

/// Replaces block j0 (1-based) with y and decodes every block.
InjectedDecode inject_and_decode(const BlockModel& model, std::vector<Sequence> blocks,
                                 std::uint64_t j0, const Sequence& y, const Variant& variant);

/// Invariant checks for one trace against the exact input stream. Returns a
/// list of human-readable violations (empty when the trace is sound).
std::vector<std::string> verify_trace(const BlockTrace& trace, const MessageBits& source,
                                      int alphabet_size);

}  // namespace dvfh
