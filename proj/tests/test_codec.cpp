#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dvfh/codec.hpp"
#include "dvfh/shift.hpp"
#include "support.hpp"

using namespace dvfh;
using test::q;

namespace {

Variant shifted_for(const BlockModel& model) {
  const bool small = continuation_count(model) <= (1u << 12);
  return Variant::shifted(
      compute_shift_table(model, small ? ShiftMode::Exact : ShiftMode::Approximate, 1u << 12, 256, 5));
}

Bits random_bits(std::mt19937_64& rng, std::size_t count) {
  Bits out(count);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 1);
  return out;
}

}  // namespace

TEST_CASE("hand trace: iid(3/4,1/4), n=2, message 1011") {
  auto model = test::iid({"3/4", "1/4"}, 2);
  const Variant v = Variant::standard();
  MessageBits src(bits_from_string("1011"));

  auto b1 = encode_block(initial_encoder_state(v), *model, src, v);
  CHECK(b1.trace.codeword == Sequence{0, 0});
  CHECK(b1.trace.consumed == 2);
  CHECK(b1.state.rank == 1);
  CHECK(b1.state.interval == UnitInterval::full());
  CHECK(src.cursor() == 2);

  auto b2 = encode_block(b1.state, *model, src, v);
  CHECK(b2.trace.codeword == Sequence{1, 1});
  CHECK(b2.trace.depth == 3);
  REQUIRE(b2.trace.pieces.size() == 2);
  CHECK(*b2.trace.pieces[0] == UnitInterval(q("3/4"), q("7/8")));
  CHECK(*b2.trace.pieces[1] == UnitInterval(q("7/8"), q("1")));
  CHECK(b2.trace.piece == 0);
  CHECK(b2.trace.consumed == 3);
  CHECK(b2.state.rank == 0);
  CHECK(src.cursor() == 5);

  std::vector<BlockTrace> traces;
  const auto enc = encode_message(*model, bits_from_string("1011"), v, 100,
                                  [&](const BlockTrace& t) { traces.push_back(t); });
  CHECK(enc.blocks == std::vector<Sequence>{{0, 0}, {1, 1}, {0, 0}});
  CHECK(enc.data_bits == 5);
  REQUIRE(traces.size() == 3);
  CHECK(traces[1].bit_offset == 2);

  DecoderState st;
  auto d1 = decode_block(st, *model, Sequence{0, 0}, v);
  CHECK(d1.bits.empty());
  auto d2 = decode_block(d1.state, *model, Sequence{1, 1}, v);
  CHECK(bits_to_string(d2.bits) == "10");
  auto d3 = decode_block(d2.state, *model, Sequence{0, 0}, v);
  CHECK(bits_to_string(d3.bits) == "110");
  CHECK(bits_to_string(decode_message(*model, enc.blocks, 4, v)) == "1011");
}

TEST_CASE("message framing") {
  auto model = test::iid({"3/4", "1/4"}, 2);
  const auto empty = encode_message(*model, {}, Variant::standard());
  CHECK(empty.blocks.size() == 1);
  CHECK(empty.data_bits == 0);
  CHECK(decode_message(*model, empty.blocks, 0, Variant::standard()).empty());

  auto uniform = test::iid({"1/2", "1/2"}, 8);
  std::mt19937_64 rng(1);
  const Bits msg = random_bits(rng, 64);
  const auto enc = encode_message(*uniform, msg, Variant::standard());
  CHECK(enc.blocks.size() == 9);
  CHECK(decode_message(*uniform, enc.blocks, 64, Variant::standard()) == msg);

  CHECK_THROWS_AS(encode_message(*model, random_bits(rng, 500), Variant::standard(), 10),
                  BlockBudgetExceeded);
  CHECK_THROWS_AS(decode_message(*model, {enc.blocks.front()}, 100, Variant::standard()),
                  std::invalid_argument);
  CHECK_THROWS_AS(decode_message(*model, {{0, 0}}, 3, Variant::standard()), TruncatedStream);
  CHECK_THROWS_AS(decode_message(*model, {}, 0, Variant::standard()), TruncatedStream);
}

TEST_CASE("uniform binary blocks consume exactly n bits") {
  auto model = test::iid({"1/2", "1/2"}, 2);
  RandomBits src(3);
  EncoderState st = initial_encoder_state(Variant::standard());
  for (int j = 0; j < 500; ++j) {
    auto b = encode_block(st, *model, src, Variant::standard());
    CHECK(b.trace.consumed == 2);
    CHECK(b.state.interval == UnitInterval::full());
    st = b.state;
  }
}

TEST_CASE("roundtrip and trace invariants over random models") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(0, 300);
  int blocks = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + trial % 4;
    const int n = std::vector<int>{2, 3, 4, 8, 16}[static_cast<std::size_t>(trial / 4 % 5)];
    ModelConfig cfg = trial % 2 ? ModelConfig(test::random_iid(rng, m))
                                : ModelConfig(test::random_markov(rng, m));
    auto model = make_model(cfg, n);
    for (bool shifted : {false, true}) {
      const Variant v = shifted ? shifted_for(*model) : Variant::standard();
      const Bits msg = random_bits(rng, static_cast<std::size_t>(len(rng)));
      const MessageBits src(msg);
      std::vector<BlockTrace> traces;
      const auto enc = encode_message(*model, msg, v, 100000,
                                      [&](const BlockTrace& t) { traces.push_back(t); });
      blocks += static_cast<int>(enc.blocks.size());
      CHECK(decode_message(*model, enc.blocks, msg.size(), v) == msg);
      for (const auto& t : traces) {
        const auto bad = verify_trace(t, src, m);
        CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
      }
      // The decoder tracks the encoder's I' and pieces block for block.
      DecoderState st;
      for (std::size_t j = 0; j < enc.blocks.size(); ++j) {
        auto d = decode_block(st, *model, enc.blocks[j], v);
        CHECK(d.window == traces[j].window);
        CHECK_FALSE(d.exception);
        CHECK_FALSE(d.fallback);
        CHECK(*d.state.pieces == traces[j].pieces);
        st = d.state;
      }
    }
  }
  CHECK(blocks > 1000);
}

TEST_CASE("shifted variant on the two-symbol example") {
  auto model = test::iid({"3/4", "1/4"}, 2);
  const ShiftTable table = compute_shift_table(*model, ShiftMode::Exact);
  CHECK(table.s == test::qs({"0", "3/4"}));
  const Variant v = Variant::shifted(table);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Bits msg = random_bits(rng, 40);
    const auto enc = encode_message(*model, msg, v);
    CHECK(enc.blocks.front()[0] == 0);  // initial i* = 0
    CHECK(decode_message(*model, enc.blocks, msg.size(), v) == msg);
  }
}

TEST_CASE("a non-breakpoint shift can disconnect I from the region") {
  auto model = test::iid({"3/4", "1/4"}, 3);
  const Variant v = Variant::shifted(ShiftTable{test::qs({"5/13", "5/13"}), ShiftMode::Approximate});
  std::mt19937_64 rng(8);
  int disconnected = 0;
  int ok = 0;
  for (int i = 0; i < 400; ++i) {
    const Bits msg = random_bits(rng, 60);
    try {
      const auto enc = encode_message(*model, msg, v);
      CHECK(decode_message(*model, enc.blocks, msg.size(), v) == msg);
      ++ok;
    } catch (const DisconnectedIntersection& e) {
      CHECK(e.block() >= 2);
      ++disconnected;
    }
  }
  CHECK(disconnected > 0);
  CHECK(ok > 0);
}

TEST_CASE("corruption: the exception branch and resynchronisation") {
  auto model = test::iid({"3/4", "1/4"}, 4);
  const Variant v = Variant::standard();
  std::mt19937_64 rng(12);
  int exceptions = 0;
  for (int i = 0; i < 300; ++i) {
    const Bits msg = random_bits(rng, 80);
    const auto enc = encode_message(*model, msg, v);
    if (enc.blocks.size() < 4) continue;
    Sequence y(4);
    for (auto& s : y) s = static_cast<int>(rng() % 2);
    auto blocks = enc.blocks;
    blocks[1] = y;
    DecoderState st;
    for (const auto& b : blocks) {
      auto d = decode_block(st, *model, b, v);
      exceptions += d.exception ? 1 : 0;
      st = d.state;
    }
    // Identity corruption changes nothing.
    const auto same = inject_and_decode(*model, enc.blocks, 2, enc.blocks[1], v);
    Bits head(same.bits.begin(), same.bits.begin() + static_cast<std::ptrdiff_t>(msg.size()));
    CHECK(head == msg);
  }
  CHECK(exceptions > 0);
}

TEST_CASE("uniform model: a corrupted block never spreads past its neighbour") {
  auto model = test::iid({"1/2", "1/2"}, 4);
  const Variant v = Variant::standard();
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Bits msg = random_bits(rng, 40);
    const auto enc = encode_message(*model, msg, v);
    Sequence y(4);
    for (auto& s : y) s = static_cast<int>(rng() % 2);
    const std::uint64_t j0 = 1 + rng() % enc.blocks.size();
    const auto dec = inject_and_decode(*model, enc.blocks, j0, y, v);
    // Blocks other than j0-1 and j0 are decoded correctly and in place.
    for (std::size_t bit = 0; bit < msg.size(); ++bit) {
      const std::uint64_t block = bit / 4 + 1;
      if (block + 1 == j0 || block == j0) continue;
      CHECK(dec.bits[bit] == msg[bit]);
    }
  }
}

TEST_CASE("r is uniform over I at the top of each block") {
  auto model = test::iid({"3/4", "1/4"}, 4);
  const Variant v = Variant::standard();
  RandomBits src(77);
  EncoderState st = initial_encoder_state(v);
  constexpr int kBins = 10;
  std::array<double, kBins> counts{};
  const int blocks = 20000;
  for (int j = 0; j < blocks; ++j) {
    // 64 bits of r are plenty to place it in one of ten bins.
    double r = 0;
    double w = 0.5;
    for (int i = 0; i < 64; ++i, w /= 2) r += src.bit(src.cursor() + static_cast<std::uint64_t>(i)) ? w : 0;
    const double lo = to_double(st.interval.lo());
    const double len = to_double(st.interval.length());
    const double u = (r - lo) / len;
    REQUIRE(u >= 0);
    REQUIRE(u < 1);
    counts[static_cast<std::size_t>(u * kBins)] += 1;
    st = encode_block(st, *model, src, v).state;
  }
  double chi2 = 0;
  const double expect = static_cast<double>(blocks) / kBins;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 0.999 quantile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 27.877);
}

TEST_CASE("bit helpers") {
  CHECK(bits_to_string(bits_from_bytes(std::vector<std::uint8_t>{0xA5})) == "10100101");
  CHECK(bytes_from_bits(bits_from_string("1010010111110000")) == std::vector<std::uint8_t>{0xA5, 0xF0});
  CHECK_THROWS_AS(bits_from_string("10x"), std::invalid_argument);
  MessageBits mb(bits_from_string("1011"));
  CHECK(mb.tail_value(0) == q("11/16"));
  CHECK(mb.tail_value(2) == q("3/4"));
  CHECK(mb.tail_value(9) == 0);
  RandomBits a(5), b(5);
  CHECK(a.prefix(300) == b.prefix(300));
  CHECK(split_seed(1, 2) != split_seed(2, 1));
}
