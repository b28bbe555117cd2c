#pragma once

// Target block distributions P_{X^n} = P_{X1} * P_{X_2^n | X1} and the
// lexicographic cumulative distribution F_{x1} used by the codec.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dvfh/numerics.hpp"
#include "dvfh/rational.hpp"

namespace dvfh {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Sequence = std::vector<int>;
using Digest8 = std::array<std::uint8_t, 8>;

/// Conditional next-symbol law with its exclusive prefix sums:
/// cum[c] = prob[0] + ... + prob[c-1], cum[m] = 1.
struct ConditionalRow {
  std::vector<Rational> prob;
  std::vector<Rational> cum;

  static ConditionalRow from_probs(std::vector<Rational> probs);
};

/// [F(x - 1), F(x)) for one continuation x = x_2^n given x1. Empty when the
/// continuation has probability zero.
struct Region {
  Rational lower;
  Rational upper;

  Rational width() const { return upper - lower; }
  bool empty() const { return lower == upper; }
  UnitInterval as_interval() const { return UnitInterval(lower, upper); }
  friend bool operator==(const Region&, const Region&) = default;
};

class BlockModel {
 public:
  virtual ~BlockModel() = default;

  int alphabet_size() const { return alphabet_size_; }
  int block_length() const { return block_length_; }
  const std::vector<Rational>& first_symbol_dist() const { return first_; }

  /// Law of x_k given x1 and prefix = x_2^{k-1} (prefix.size() <= n - 2).
  virtual const ConditionalRow& conditional(int x1, std::span<const int> prefix) const = 0;

  /// max over x1, x_2^n of P(x_2^n | x1).
  virtual Rational p_max() const = 0;

  /// H(X_2^n | X1 = x1) in bits.
  virtual double cond_entropy(int x1) const = 0;

  /// P(x_2^n | x1).
  Rational conditional_probability(int x1, std::span<const int> rest) const;
  /// P_{X^n}(block) for a full block x_1^n.
  Rational block_probability(std::span<const int> block) const;

 protected:
  BlockModel(int alphabet_size, int block_length, std::vector<Rational> first);

 private:
  int alphabet_size_;
  int block_length_;
  std::vector<Rational> first_;
};

using ModelPtr = std::shared_ptr<const BlockModel>;

struct IidConfig {
  std::vector<Rational> probs;
};

/// Order-k chain restarted at every block. `initial` is the joint law of the
/// first k symbols (m^k entries, base-m index, oldest symbol most
/// significant); `transition` has one row per length-k context.
struct MarkovConfig {
  int order = 1;
  std::vector<Rational> initial;
  std::vector<std::vector<Rational>> transition;
};

/// Explicit law over X^n. Keys are digit strings of length n.
struct TableConfig {
  int n = 0;
  int alphabet_size = 0;
  std::map<std::string, Rational> probs;
};

using ModelConfig = std::variant<IidConfig, MarkovConfig, TableConfig>;

ModelConfig parse_model_config(const nlohmann::json& j);
ModelConfig load_model_config(const std::filesystem::path& path);
/// Canonical JSON: sorted keys, rationals as "num/den".
nlohmann::json to_json(const ModelConfig& config);
std::string canonical_string(const ModelConfig& config);
/// First 8 bytes of SHA-256 over the canonical string.
Digest8 model_digest(const ModelConfig& config);
/// First 8 bytes of SHA-256 over arbitrary text.
Digest8 digest8(std::string_view text);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Validates and instantiates; throws ModelError.
ModelPtr make_model(const ModelConfig& config, int block_length);

/// [F(x_2^n - 1), F(x_2^n)) by sequential accumulation.
Region region_bounds(const BlockModel& model, int x1, std::span<const int> rest);

/// The arc <[lower, upper) - s>; nullopt for an empty region.
std::optional<CircularArc> shifted_region_bounds(const BlockModel& model, int x1,
                                                 std::span<const int> rest, const Rational& shift);

struct RegionDecision {
  Sequence sequence;  // x_2^n
  Region region;
};

/// Sequential refinement of F^{-1}: the continuation prefix is extended one
/// symbol at a time while the candidate set fits inside one child region.
/// Candidate sets may only shrink between calls, so progress is kept.
class RegionSearch {
 public:
  RegionSearch(const BlockModel& model, int x1);

  /// True once a full continuation owns all of [a, b).
  bool refine(const Rational& a, const Rational& b);
  /// Point location; always decides.
  void locate(const Rational& r);

  bool decided() const;
  RegionDecision decision() const;

 private:
  const BlockModel* model_;
  int x1_;
  Sequence prefix_;
  Rational lower_;
  Rational width_;
};

/// Decided iff one continuation's region contains all of `candidates`.
std::optional<RegionDecision> inverse_region(const BlockModel& model, int x1,
                                             const UnitInterval& candidates);

/// inverse_region applied to <candidates + shift>. A rotated set that wraps
/// decides only if both parts decide the same continuation.
std::optional<RegionDecision> shifted_inverse_region(const BlockModel& model, int x1,
                                                     const UnitInterval& candidates,
                                                     const Rational& shift);

/// F^{-1}(r): the continuation whose region contains r.
RegionDecision locate(const BlockModel& model, int x1, const Rational& r);

/// Visits every continuation x_2^n in lexicographic order with its region.
/// Zero-probability continuations are skipped unless include_empty is set.
void for_each_continuation(const BlockModel& model, int x1,
                           const std::function<void(const Sequence&, const Region&)>& visit,
                           bool include_empty = false);

/// m^(n-1), saturating at UINT64_MAX.
std::uint64_t continuation_count(const BlockModel& model);

/// Entropy of a finite distribution in bits.
double entropy_bits(std::span<const Rational> probs);

}  // namespace dvfh
