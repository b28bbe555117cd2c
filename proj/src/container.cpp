#include "dvfh/container.hpp"

#include <algorithm>
#include <string>

namespace dvfh {

int symbol_width(int alphabet_size) {
  int w = 0;
  while ((1 << w) < alphabet_size) ++w;
  return w;
}

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'V', 'F', 'H'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(bytes[offset + i]) << (8 * i));
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> write_container(const Container& c) {
  const auto& h = c.header;
  if (h.alphabet_size < 2) throw ContainerError("alphabet size must be >= 2");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(h.version);
  out.push_back(h.shifted ? 1 : 0);
  out.push_back(h.alphabet_size);
  put_le<std::uint32_t>(out, h.block_length);
  put_le<std::uint64_t>(out, h.message_bits);
  out.insert(out.end(), h.model_digest.begin(), h.model_digest.end());
  out.insert(out.end(), h.shift_digest.begin(), h.shift_digest.end());

  const int width = symbol_width(h.alphabet_size);
  std::uint8_t acc = 0;
  int filled = 0;
  for (const auto& block : c.blocks) {
    if (block.size() != h.block_length) throw ContainerError("block length mismatch");
    for (int sym : block) {
      if (sym < 0 || sym >= h.alphabet_size) throw ContainerError("symbol outside the alphabet");
      for (int b = width - 1; b >= 0; --b) {
        acc = static_cast<std::uint8_t>((acc << 1) | ((sym >> b) & 1));
        if (++filled == 8) {
          out.push_back(acc);
          acc = 0;
          filled = 0;
        }
      }
    }
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return out;
}

Container read_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kContainerHeaderSize) throw ContainerError("container shorter than its header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw ContainerError("bad magic; not a DVFH container");
  }
  Container c;
  auto& h = c.header;
  h.version = bytes[4];
  if (h.version != 1) throw ContainerError("unsupported container version " + std::to_string(h.version));
  if (bytes[5] > 1) throw ContainerError("unknown variant byte");
  h.shifted = bytes[5] == 1;
  h.alphabet_size = bytes[6];
  if (h.alphabet_size < 2) throw ContainerError("alphabet size must be >= 2");
  h.block_length = get_le<std::uint32_t>(bytes, 7);
  if (h.block_length < 2) throw ContainerError("block length must be >= 2");
  h.message_bits = get_le<std::uint64_t>(bytes, 11);
  std::copy_n(bytes.begin() + 19, 8, h.model_digest.begin());
  std::copy_n(bytes.begin() + 27, 8, h.shift_digest.begin());

  const int width = symbol_width(h.alphabet_size);
  const std::uint64_t payload_bits = (bytes.size() - kContainerHeaderSize) * 8;
  const std::uint64_t block_bits = static_cast<std::uint64_t>(h.block_length) * static_cast<std::uint64_t>(width);
  const std::uint64_t count = payload_bits / block_bits;
  std::uint64_t pos = kContainerHeaderSize * 8;
  auto next_bit = [&]() {
    const std::uint8_t byte = bytes[pos / 8];
    const int bit = (byte >> (7 - pos % 8)) & 1;
    ++pos;
    return bit;
  };
  c.blocks.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    Sequence block(h.block_length);
    for (auto& sym : block) {
      int v = 0;
      for (int b = 0; b < width; ++b) v = (v << 1) | next_bit();
      if (v >= h.alphabet_size) throw ContainerError("packed symbol outside the alphabet");
      sym = v;
    }
    c.blocks.push_back(std::move(block));
  }
  return c;
}

}  // namespace dvfh
