#include "dvfh/codec.hpp"

#include <algorithm>
#include <cassert>

namespace dvfh {

Variant Variant::shifted(ShiftTable table, int initial_piece) {
  Variant v;
  v.table_ = std::move(table);
  v.initial_piece_ = initial_piece;
  return v;
}

const Rational& Variant::shift_for(int x1) const {
  static const Rational kZero(0);
  if (!table_) return kZero;
  return table_->s.at(static_cast<std::size_t>(x1));
}

EncoderState initial_encoder_state(const Variant& variant) {
  EncoderState s;
  s.previous_piece = variant.initial_piece();
  return s;
}

namespace {

void check_variant(const BlockModel& model, const Variant& variant) {
  if (!variant.is_shifted()) return;
  if (static_cast<int>(variant.table().s.size()) != model.alphabet_size()) {
    throw ModelError("shift table has " + std::to_string(variant.table().s.size()) +
                     " entries for alphabet size " + std::to_string(model.alphabet_size()));
  }
  if (variant.initial_piece() < 0 || variant.initial_piece() >= model.alphabet_size()) {
    throw ModelError("initial piece index out of range");
  }
}

// Index of the nonempty piece that contains all of [a, b), or -1.
int piece_containing(const Pieces& pieces, const Rational& a, const Rational& b) {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (p && p->lo() <= a && a < p->hi()) return b <= p->hi() ? static_cast<int>(i) : -1;
  }
  return -1;
}

CircularArc window_of(const ArcIntersection& meet) {
  if (const auto* linear = std::get_if<UnitInterval>(&meet)) return CircularArc(*linear);
  return std::get<CircularArc>(meet);
}

Integer leading_bits(BitSource& bits, std::uint64_t offset, std::int64_t count) {
  Integer v = 0;
  for (std::int64_t i = 0; i < count; ++i) {
    v <<= 1;
    if (bits.bit(offset + static_cast<std::uint64_t>(i))) v += 1;
  }
  return v;
}

}  // namespace

EncodedBlock encode_block(const EncoderState& state, const BlockModel& model, BitSource& bits,
                          const Variant& variant) {
  check_variant(model, variant);
  const int m = model.alphabet_size();
  const int x1 = variant.is_shifted()
                     ? state.previous_piece
                     : rank_desc(model.first_symbol_dist())(state.rank);
  const Rational& shift = variant.shift_for(x1);
  const UnitInterval& interval = state.interval;
  const std::uint64_t offset = bits.cursor();

  RegionSearch search(model, x1);
  std::optional<RegionDecision> decision;
  std::optional<CircularArc> region;
  std::optional<CircularArc> window;
  Pieces pieces;
  std::int64_t depth = 0;
  int piece = -1;

  // Candidate set for r: the dyadic cell of the peeked bits, meet I.
  std::uint64_t peeked = 0;
  Rational cell_lo = 0;
  Rational cell_hi = 1;
  Rational step = 1;
  for (;;) {
    const Rational a = std::max(cell_lo, interval.lo());
    const Rational b = std::min(cell_hi, interval.hi());
    assert(a < b);
    if (!decision) {
      if (shift == 0) {
        if (search.refine(a, b)) decision = search.decision();
      } else {
        const Rational ra = frac_mod1(a + shift);
        const Rational rb = ra + (b - a);
        if (rb <= 1) {
          if (search.refine(ra, rb)) decision = search.decision();
        } else {
          decision = shifted_inverse_region(model, x1, UnitInterval(a, b), shift);
        }
      }
      if (decision) {
        region.emplace(frac_mod1(decision->region.lower - shift), decision->region.width());
        const ArcIntersection meet = arc_intersect(interval, *region);
        if (std::holds_alternative<Disconnected>(meet)) {
          throw DisconnectedIntersection(state.block + 1);
        }
        window = window_of(meet);
        depth = interval_depth(*window, m);
        pieces = subdivide(*window, depth, m);
      }
    }
    if (decision) {
      piece = piece_containing(pieces, a, b);
      if (piece >= 0) break;
    }
    step /= 2;
    if (bits.bit(offset + peeked)) {
      cell_lo += step;
    } else {
      cell_hi -= step;
    }
    ++peeked;
  }

  const UnitInterval& chosen = *pieces[static_cast<std::size_t>(piece)];
  const std::int64_t l1 = floor_neg_log2(chosen.length());
  const auto lengths = piece_lengths(pieces);

  EncodedBlock out;
  out.state.interval = rescale(chosen, l1);
  out.state.rank = rank_desc(lengths).inverse(piece);
  out.state.previous_piece = piece;
  out.state.block = state.block + 1;
  out.state.bits_consumed = state.bits_consumed + static_cast<std::uint64_t>(l1);
  bits.consume(static_cast<std::uint64_t>(l1));

  BlockTrace& t = out.trace;
  t.block = out.state.block;
  t.codeword.reserve(static_cast<std::size_t>(model.block_length()));
  t.codeword.push_back(x1);
  t.codeword.insert(t.codeword.end(), decision->sequence.begin(), decision->sequence.end());
  t.interval_before = interval;
  t.region = *region;
  t.window = *window;
  t.depth = depth;
  t.pieces = std::move(pieces);
  t.piece = piece;
  t.consumed = l1;
  t.rank_next = out.state.rank;
  t.interval_after = out.state.interval;
  t.bit_offset = offset;
  t.bits_peeked = peeked;
  return out;
}

EncodedMessage encode_message(const BlockModel& model, const Bits& message, const Variant& variant,
                              std::uint64_t block_budget, const TraceObserver& observer) {
  MessageBits source(message);
  EncoderState state = initial_encoder_state(variant);
  EncodedMessage out;
  for (;;) {
    const bool flush = state.bits_consumed >= message.size();
    if (flush) out.data_bits = state.bits_consumed;
    if (out.blocks.size() >= block_budget) {
      throw BlockBudgetExceeded("block budget of " + std::to_string(block_budget) +
                                " exhausted after " + std::to_string(state.bits_consumed) + " bits");
    }
    EncodedBlock step = encode_block(state, model, source, variant);
    if (observer) observer(step.trace);
    out.blocks.push_back(std::move(step.trace.codeword));
    state = std::move(step.state);
    if (flush) break;
  }
  return out;
}

DecodedBlock decode_block(const DecoderState& state, const BlockModel& model,
                          const Sequence& codeword, const Variant& variant) {
  check_variant(model, variant);
  const int m = model.alphabet_size();
  if (static_cast<int>(codeword.size()) != model.block_length()) {
    throw std::invalid_argument("codeword length differs from block length");
  }
  for (int s : codeword) {
    if (s < 0 || s >= m) throw std::out_of_range("codeword symbol outside the alphabet");
  }
  const int x1 = codeword[0];

  DecodedBlock out;
  out.state = state;
  out.state.block = state.block + 1;

  if (state.pieces) {
    const Pieces& pieces = *state.pieces;
    const Permutation by_length = rank_desc(piece_lengths(pieces));
    int piece = variant.is_shifted()
                    ? x1
                    : by_length(rank_desc(model.first_symbol_dist()).inverse(x1));
    if (!pieces[static_cast<std::size_t>(piece)]) {
      // Only reachable from corrupted input: take the shortest nonempty piece.
      piece = by_length(static_cast<int>(count_nonempty(pieces)) - 1);
      out.fallback = true;
    }
    const UnitInterval& chosen = *pieces[static_cast<std::size_t>(piece)];
    const std::int64_t l1 = floor_neg_log2(chosen.length());
    const Rational head = floor_bits(chosen.lo(), l1) * pow2(l1);
    const Integer value = head.get_num();
    out.bits.reserve(static_cast<std::size_t>(l1));
    for (std::int64_t i = l1 - 1; i >= 0; --i) {
      out.bits.push_back(mpz_tstbit(value.get_mpz_t(), static_cast<mp_bitcnt_t>(i)) ? 1 : 0);
    }
    out.state.interval = rescale(chosen, l1);
    out.state.emitted = state.emitted + static_cast<std::uint64_t>(l1);
  }

  const Sequence rest(codeword.begin() + 1, codeword.end());
  const auto region = shifted_region_bounds(model, x1, rest, variant.shift_for(x1));
  CircularArc window(out.state.interval);
  if (region) {
    const ArcIntersection meet = arc_intersect(out.state.interval, *region);
    if (std::holds_alternative<EmptySet>(meet) || std::holds_alternative<Disconnected>(meet)) {
      window = *region;
      out.exception = true;
    } else {
      window = window_of(meet);
    }
  } else {
    // Zero-probability codeword: no region to fall back on, keep I.
    out.exception = true;
  }
  const std::int64_t depth = interval_depth(window, m);
  out.state.pieces = subdivide(window, depth, m);
  out.window = window;
  return out;
}

Bits decode_message(const BlockModel& model, const std::vector<Sequence>& blocks,
                    std::uint64_t length, const Variant& variant) {
  DecoderState state;
  Bits out;
  out.reserve(length);
  for (const auto& block : blocks) {
    if (state.block > 0 && out.size() >= length) break;
    DecodedBlock step = decode_block(state, model, block, variant);
    out.insert(out.end(), step.bits.begin(), step.bits.end());
    state = std::move(step.state);
  }
  if (out.size() < length || blocks.empty()) {
    throw TruncatedStream("stream yields " + std::to_string(out.size()) + " of " +
                          std::to_string(length) + " message bits");
  }
  out.resize(length);
  return out;
}

InjectedDecode inject_and_decode(const BlockModel& model, std::vector<Sequence> blocks,
                                 std::uint64_t j0, const Sequence& y, const Variant& variant) {
  if (j0 < 1 || j0 > blocks.size()) throw std::out_of_range("corrupted block index out of range");
  blocks[j0 - 1] = y;
  InjectedDecode out;
  DecoderState state;
  for (const auto& block : blocks) {
    DecodedBlock step = decode_block(state, model, block, variant);
    out.bits.insert(out.bits.end(), step.bits.begin(), step.bits.end());
    out.windows.push_back(step.window);
    out.boundaries.push_back(step.state.emitted);
    state = std::move(step.state);
  }
  // Block j's bits are released by block j+1, so they start right after
  // everything emitted up to and including block j.
  return out;
}

std::vector<std::string> verify_trace(const BlockTrace& t, const MessageBits& source,
                                      int alphabet_size) {
  std::vector<std::string> bad;
  const auto where = "block " + std::to_string(t.block) + ": ";
  if (!(t.interval_before.length() > Rational(1, 2))) {
    bad.push_back(where + "|I| = " + to_string(t.interval_before.length()) + " is not > 1/2");
  }
  const Rational r = source.tail_value(t.bit_offset);
  if (!t.interval_before.contains(r)) {
    bad.push_back(where + "r = " + to_string(r) + " outside I = " + to_string(t.interval_before));
  }
  if (!(frac_mod1(r - t.region.start()) < t.region.length())) {
    bad.push_back(where + "r outside the codeword region");
  }
  const std::size_t count = count_nonempty(t.pieces);
  if (count < 2 || count > static_cast<std::size_t>(alphabet_size)) {
    bad.push_back(where + std::to_string(count) + " nonempty pieces");
  }
  Rational total = 0;
  for (const auto& p : t.pieces) {
    if (p) total += p->length();
  }
  if (total != t.window.length()) bad.push_back(where + "pieces do not tile I'");
  if (t.piece < 0 || static_cast<std::size_t>(t.piece) >= t.pieces.size() ||
      !t.pieces[static_cast<std::size_t>(t.piece)]) {
    bad.push_back(where + "selected piece is empty");
    return bad;
  }
  const UnitInterval& chosen = *t.pieces[static_cast<std::size_t>(t.piece)];
  if (!chosen.contains(r)) bad.push_back(where + "r outside the selected piece");
  const Rational cell = floor_bits(chosen.lo(), t.consumed);
  if (chosen.hi() > cell + pow2(-t.consumed)) {
    bad.push_back(where + "selected piece straddles a depth-l1 cell");
  }
  MessageBits replay(source.bits());
  const Integer consumed = leading_bits(replay, t.bit_offset, t.consumed);
  if (Rational(consumed) * pow2(-t.consumed) != cell) {
    bad.push_back(where + "consumed bits differ from floor_bits(lo(I'_i*), l1)");
  }
  const auto& after = t.interval_after;
  const bool full = after.lo() == 0 && after.hi() == 1;
  const bool upper_tail = after.hi() == 1 && after.lo() < Rational(1, 2);
  const bool lower_head = after.lo() == 0 && after.hi() > Rational(1, 2);
  if (!(full || upper_tail || lower_head)) {
    bad.push_back(where + "post-rescale I = " + to_string(after) +
                  " is not of the form [a,1), [0,b) or [0,1)");
  }
  if (after != rescale(chosen, t.consumed)) bad.push_back(where + "I is not the rescaled piece");
  return bad;
}

}  // namespace dvfh
