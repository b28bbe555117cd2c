#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvfh/model.hpp"
#include "dvfh/rational.hpp"

namespace dvfh {

enum class ShiftMode { Exact, Approximate };

/// One rotation s_{x1} in [0,1) per first symbol.
struct ShiftTable {
  std::vector<Rational> s;
  ShiftMode mode = ShiftMode::Exact;

  friend bool operator==(const ShiftTable&, const ShiftTable&) = default;
};

/// {"mode":"exact","s":["0/1","3/4"]}
nlohmann::json to_json(const ShiftTable& table);
ShiftTable parse_shift_table(const nlohmann::json& j);
ShiftTable load_shift_table(const std::filesystem::path& path);
/// First 8 bytes of SHA-256 over the canonical JSON.
Digest8 shift_digest(const ShiftTable& table);

}  // namespace dvfh
