#include "dvfh/shift_table.hpp"

#include <fstream>

namespace dvfh {

nlohmann::json to_json(const ShiftTable& table) {
  auto s = nlohmann::json::array();
  for (const auto& v : table.s) s.push_back(to_string(v));
  return {{"mode", table.mode == ShiftMode::Exact ? "exact" : "approximate"}, {"s", s}};
}

ShiftTable parse_shift_table(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("s") || !j["s"].is_array()) {
    throw ModelError("shift table needs an array \"s\"");
  }
  ShiftTable table;
  const auto mode = j.value("mode", std::string("exact"));
  if (mode == "exact") {
    table.mode = ShiftMode::Exact;
  } else if (mode == "approximate") {
    table.mode = ShiftMode::Approximate;
  } else {
    throw ModelError("unknown shift mode '" + mode + "'");
  }
  for (const auto& v : j["s"]) {
    if (!v.is_string()) throw ModelError("shift values must be rational strings");
    Rational r;
    try {
      r = parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ModelError(e.what());
    }
    if (r < 0 || r >= 1) throw ModelError("shift " + to_string(r) + " is outside [0,1)");
    table.s.push_back(r);
  }
  return table;
}

ShiftTable load_shift_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open shift table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("shift table " + path.string() + ": " + e.what());
  }
  return parse_shift_table(j);
}

Digest8 shift_digest(const ShiftTable& table) { return digest8(to_json(table).dump()); }

}  // namespace dvfh
