#pragma once

// Binary codeword container.
//
//   offset  size  field
//   0       4     magic "DVFH"
//   4       1     version (1)
//   5       1     variant (0 standard, 1 shifted)
//   6       1     alphabet size m
//   7       4     block length n            (little-endian)
//   11      8     message bit length L      (little-endian)
//   19      8     model digest (SHA-256 prefix of the canonical config)
//   27      8     shift-table digest (zeros for standard)
//   35      ...   symbols, ceil(log2 m) bits each, MSB first, zero padded

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dvfh/model.hpp"

namespace dvfh {

class ContainerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContainerHeader {
  std::uint8_t version = 1;
  bool shifted = false;
  std::uint8_t alphabet_size = 2;
  std::uint32_t block_length = 0;
  std::uint64_t message_bits = 0;
  Digest8 model_digest{};
  Digest8 shift_digest{};

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

struct Container {
  ContainerHeader header;
  std::vector<Sequence> blocks;
};

inline constexpr std::size_t kContainerHeaderSize = 35;

/// Bits per packed symbol: ceil(log2 m).
int symbol_width(int alphabet_size);

std::vector<std::uint8_t> write_container(const Container& container);

/// Parses the header and every complete block in the payload. Trailing
/// padding shorter than a block is ignored.
Container read_container(std::span<const std::uint8_t> bytes);

}  // namespace dvfh
