#include "dvfh/model.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace dvfh {

ConditionalRow ConditionalRow::from_probs(std::vector<Rational> probs) {
  ConditionalRow row;
  row.cum.reserve(probs.size() + 1);
  Rational acc = 0;
  for (const auto& p : probs) {
    row.cum.push_back(acc);
    acc += p;
  }
  row.cum.push_back(acc);
  row.prob = std::move(probs);
  return row;
}

BlockModel::BlockModel(int alphabet_size, int block_length, std::vector<Rational> first)
    : alphabet_size_(alphabet_size), block_length_(block_length), first_(std::move(first)) {}

Rational BlockModel::conditional_probability(int x1, std::span<const int> rest) const {
  Rational p = 1;
  for (std::size_t k = 0; k < rest.size(); ++k) {
    const auto& row = conditional(x1, rest.first(k));
    p *= row.prob[static_cast<std::size_t>(rest[k])];
    if (p == 0) break;
  }
  return p;
}

Rational BlockModel::block_probability(std::span<const int> block) const {
  return first_[static_cast<std::size_t>(block[0])] *
         conditional_probability(block[0], block.subspan(1));
}

double entropy_bits(std::span<const Rational> probs) {
  double h = 0;
  for (const auto& p : probs) {
    if (p > 0) h -= to_double(p) * log2_of(p);
  }
  return h;
}

namespace {

void check_distribution(std::span<const Rational> probs, const std::string& what,
                        bool strictly_positive) {
  Rational sum = 0;
  for (const auto& p : probs) {
    if (p < 0 || (strictly_positive && p == 0)) {
      throw ModelError(what + ": entry " + to_string(p) +
                       (strictly_positive ? " is not > 0" : " is negative"));
    }
    sum += p;
  }
  if (sum != 1) throw ModelError(what + ": sums to " + to_string(sum) + ", not 1");
}

std::uint64_t checked_pow(int base, int exp) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(base)) {
      throw ModelError("alphabet_size^n does not fit in 64 bits");
    }
    v *= static_cast<std::uint64_t>(base);
  }
  return v;
}

// ---------------------------------------------------------------- iid

class IidModel final : public BlockModel {
 public:
  IidModel(std::vector<Rational> probs, int n)
      : BlockModel(static_cast<int>(probs.size()), n, probs),
        row_(ConditionalRow::from_probs(probs)) {}

  const ConditionalRow& conditional(int, std::span<const int>) const override { return row_; }

  Rational p_max() const override {
    Rational best = *std::max_element(row_.prob.begin(), row_.prob.end());
    Rational out = 1;
    for (int i = 1; i < block_length(); ++i) out *= best;
    return out;
  }

  double cond_entropy(int) const override {
    return (block_length() - 1) * entropy_bits(row_.prob);
  }

 private:
  ConditionalRow row_;
};

// ---------------------------------------------------------------- markov

// The conditional law depends on the last min(h, order) symbols of the
// history x_1^h; such a context is encoded base-m, oldest symbol first.
class MarkovModel final : public BlockModel {
 public:
  MarkovModel(const MarkovConfig& cfg, int m, std::vector<Rational> first, int n)
      : BlockModel(m, n, std::move(first)), order_(cfg.order) {
    for (const auto& t : cfg.transition) steady_.push_back(ConditionalRow::from_probs(t));
    // Marginals of the initial joint law over its first h symbols.
    std::vector<std::vector<Rational>> marginal(static_cast<std::size_t>(order_) + 1);
    marginal[static_cast<std::size_t>(order_)] = cfg.initial;
    for (int h = order_ - 1; h >= 1; --h) {
      auto& cur = marginal[static_cast<std::size_t>(h)];
      const auto& next = marginal[static_cast<std::size_t>(h) + 1];
      cur.assign(next.size() / static_cast<std::size_t>(m), Rational(0));
      for (std::size_t i = 0; i < next.size(); ++i) cur[i / static_cast<std::size_t>(m)] += next[i];
    }
    startup_.resize(static_cast<std::size_t>(order_));
    for (int h = 1; h < order_; ++h) {
      const auto& cur = marginal[static_cast<std::size_t>(h)];
      const auto& next = marginal[static_cast<std::size_t>(h) + 1];
      for (std::size_t code = 0; code < cur.size(); ++code) {
        std::vector<Rational> probs(static_cast<std::size_t>(m));
        for (int c = 0; c < m; ++c) {
          probs[static_cast<std::size_t>(c)] =
              cur[code] == 0 ? Rational(1, m)
                             : Rational(next[code * static_cast<std::size_t>(m) +
                                             static_cast<std::size_t>(c)] /
                                        cur[code]);
        }
        startup_[static_cast<std::size_t>(h)].push_back(ConditionalRow::from_probs(std::move(probs)));
      }
    }
    context_count_ = steady_.size();
  }

  const ConditionalRow& conditional(int x1, std::span<const int> prefix) const override {
    const std::size_t h = prefix.size() + 1;
    const std::size_t keep = std::min<std::size_t>(h, static_cast<std::size_t>(order_));
    std::size_t code = 0;
    for (std::size_t i = h - keep; i < h; ++i) {
      const int sym = i == 0 ? x1 : prefix[i - 1];
      code = code * static_cast<std::size_t>(alphabet_size()) + static_cast<std::size_t>(sym);
    }
    if (h < static_cast<std::size_t>(order_)) return startup_[h][code];
    return steady_[code];
  }

  Rational p_max() const override {
    Rational best = 0;
    for (int x1 = 0; x1 < alphabet_size(); ++x1) {
      std::vector<Rational> layer = forward_layer_init(x1);
      for (int h = 1; h < block_length(); ++h) {
        std::vector<Rational> next(states_at(h + 1), Rational(0));
        for (std::size_t code = 0; code < layer.size(); ++code) {
          if (layer[code] == 0) continue;
          const auto& row = row_for(h, code);
          for (int c = 0; c < alphabet_size(); ++c) {
            Rational v = layer[code] * row.prob[static_cast<std::size_t>(c)];
            auto& slot = next[advance(h, code, c)];
            if (v > slot) slot = v;
          }
        }
        layer = std::move(next);
      }
      for (const auto& v : layer) best = std::max(best, v);
    }
    return best;
  }

  double cond_entropy(int x1) const override {
    std::vector<double> layer(states_at(1), 0.0);
    layer[static_cast<std::size_t>(x1)] = 1.0;
    double h_total = 0;
    for (int h = 1; h < block_length(); ++h) {
      std::vector<double> next(states_at(h + 1), 0.0);
      for (std::size_t code = 0; code < layer.size(); ++code) {
        if (layer[code] == 0) continue;
        const auto& row = row_for(h, code);
        h_total += layer[code] * entropy_bits(row.prob);
        for (int c = 0; c < alphabet_size(); ++c) {
          next[advance(h, code, c)] += layer[code] * to_double(row.prob[static_cast<std::size_t>(c)]);
        }
      }
      layer = std::move(next);
    }
    return h_total;
  }

 private:
  std::size_t states_at(int h) const {
    std::size_t s = 1;
    for (int i = 0; i < std::min(h, order_); ++i) s *= static_cast<std::size_t>(alphabet_size());
    return s;
  }
  std::vector<Rational> forward_layer_init(int x1) const {
    std::vector<Rational> layer(states_at(1), Rational(0));
    layer[static_cast<std::size_t>(x1)] = 1;
    return layer;
  }
  const ConditionalRow& row_for(int h, std::size_t code) const {
    return h < order_ ? startup_[static_cast<std::size_t>(h)][code] : steady_[code];
  }
  // Context code after appending symbol c to a length-h history.
  std::size_t advance(int h, std::size_t code, int c) const {
    std::size_t next = code * static_cast<std::size_t>(alphabet_size()) + static_cast<std::size_t>(c);
    if (h + 1 > order_) next %= context_count_;
    return next;
  }

  int order_;
  std::vector<ConditionalRow> steady_;
  std::vector<std::vector<ConditionalRow>> startup_;
  std::size_t context_count_ = 1;
};

// ---------------------------------------------------------------- table

class TableModel final : public BlockModel {
 public:
  TableModel(const TableConfig& cfg, std::vector<Rational> first)
      : BlockModel(cfg.alphabet_size, cfg.n, std::move(first)) {
    const int m = alphabet_size();
    const int n = block_length();
    checked_pow(m, n);
    std::vector<std::unordered_map<std::uint64_t, Rational>> mass(static_cast<std::size_t>(n) + 1);
    for (const auto& [key, p] : cfg.probs) {
      if (p == 0) continue;
      std::uint64_t code = 0;
      for (int h = 1; h <= n; ++h) {
        code = code * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(key[static_cast<std::size_t>(h - 1)] - '0');
        mass[static_cast<std::size_t>(h)][code] += p;
      }
      entries_.push_back({key, p});
    }
    rows_.resize(static_cast<std::size_t>(n));
    for (int h = 1; h < n; ++h) {
      for (const auto& [code, total] : mass[static_cast<std::size_t>(h)]) {
        std::vector<Rational> probs(static_cast<std::size_t>(m), Rational(0));
        for (int c = 0; c < m; ++c) {
          auto it = mass[static_cast<std::size_t>(h) + 1].find(code * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(c));
          if (it != mass[static_cast<std::size_t>(h) + 1].end()) probs[static_cast<std::size_t>(c)] = it->second / total;
        }
        rows_[static_cast<std::size_t>(h)].emplace(code, ConditionalRow::from_probs(std::move(probs)));
      }
    }
    std::vector<Rational> uniform(static_cast<std::size_t>(m), Rational(1, m));
    uniform_ = ConditionalRow::from_probs(std::move(uniform));
  }

  const ConditionalRow& conditional(int x1, std::span<const int> prefix) const override {
    std::uint64_t code = static_cast<std::uint64_t>(x1);
    for (int s : prefix) code = code * static_cast<std::uint64_t>(alphabet_size()) + static_cast<std::uint64_t>(s);
    const auto& level = rows_[prefix.size() + 1];
    auto it = level.find(code);
    // Zero-mass prefixes own empty regions; any law works there.
    return it == level.end() ? uniform_ : it->second;
  }

  Rational p_max() const override {
    Rational best = 0;
    for (const auto& e : entries_) {
      best = std::max(best, Rational(e.p / first_symbol_dist()[static_cast<std::size_t>(e.key[0] - '0')]));
    }
    return best;
  }

  double cond_entropy(int x1) const override {
    const Rational& marginal = first_symbol_dist()[static_cast<std::size_t>(x1)];
    double h = 0;
    for (const auto& e : entries_) {
      if (e.key[0] - '0' != x1) continue;
      Rational q = e.p / marginal;
      h -= to_double(q) * log2_of(q);
    }
    return h;
  }

 private:
  struct Entry {
    std::string key;
    Rational p;
  };
  std::vector<Entry> entries_;
  std::vector<std::unordered_map<std::uint64_t, ConditionalRow>> rows_;
  ConditionalRow uniform_;
};

// ---------------------------------------------------------------- config parsing

std::vector<Rational> parse_rational_array(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw ModelError(what + " must be an array");
  std::vector<Rational> out;
  for (const auto& v : j) {
    try {
      if (v.is_string()) {
        out.push_back(parse_rational(v.get<std::string>()));
      } else if (v.is_number_integer()) {
        out.emplace_back(v.get<long>());
      } else {
        throw ModelError(what + ": probabilities must be strings like \"3/4\" or integers");
      }
    } catch (const std::invalid_argument& e) {
      throw ModelError(what + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json rational_array(std::span<const Rational> values) {
  auto arr = nlohmann::json::array();
  for (const auto& v : values) arr.push_back(to_string(v));
  return arr;
}

}  // namespace

ModelConfig parse_model_config(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ModelError("model config needs a string \"type\"");
  }
  const auto type = j["type"].get<std::string>();
  if (type == "iid") {
    if (!j.contains("probs")) throw ModelError("iid model needs \"probs\"");
    return IidConfig{parse_rational_array(j["probs"], "probs")};
  }
  if (type == "markov") {
    MarkovConfig cfg;
    if (!j.contains("initial") || !j.contains("transition")) {
      throw ModelError("markov model needs \"initial\" and \"transition\"");
    }
    cfg.order = j.value("order", 1);
    cfg.initial = parse_rational_array(j["initial"], "initial");
    if (!j["transition"].is_array()) throw ModelError("transition must be an array of rows");
    for (const auto& row : j["transition"]) cfg.transition.push_back(parse_rational_array(row, "transition row"));
    return cfg;
  }
  if (type == "table") {
    TableConfig cfg;
    if (!j.contains("n") || !j.contains("probs") || !j["probs"].is_object()) {
      throw ModelError("table model needs \"n\" and an object \"probs\"");
    }
    cfg.n = j["n"].get<int>();
    int max_symbol = 1;
    for (const auto& [key, value] : j["probs"].items()) {
      if (static_cast<int>(key.size()) != cfg.n) {
        throw ModelError("table key '" + key + "' does not have length n=" + std::to_string(cfg.n));
      }
      for (char c : key) {
        if (c < '0' || c > '9') throw ModelError("table key '" + key + "' is not a digit string");
        max_symbol = std::max(max_symbol, c - '0');
      }
      auto parsed = parse_rational_array(nlohmann::json::array({value}), "table entry " + key);
      cfg.probs[key] = parsed.front();
    }
    cfg.alphabet_size = j.value("alphabet_size", max_symbol + 1);
    return cfg;
  }
  throw ModelError("unknown model type '" + type + "'");
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("model file " + path.string() + ": " + e.what());
  }
  return parse_model_config(j);
}

nlohmann::json to_json(const ModelConfig& config) {
  struct Visitor {
    nlohmann::json operator()(const IidConfig& c) const {
      return {{"type", "iid"}, {"probs", rational_array(c.probs)}};
    }
    nlohmann::json operator()(const MarkovConfig& c) const {
      auto rows = nlohmann::json::array();
      for (const auto& r : c.transition) rows.push_back(rational_array(r));
      return {{"type", "markov"},
              {"order", c.order},
              {"initial", rational_array(c.initial)},
              {"transition", rows}};
    }
    nlohmann::json operator()(const TableConfig& c) const {
      auto probs = nlohmann::json::object();
      for (const auto& [k, v] : c.probs) probs[k] = to_string(v);
      return {{"type", "table"}, {"n", c.n}, {"alphabet_size", c.alphabet_size}, {"probs", probs}};
    }
  };
  return std::visit(Visitor{}, config);
}

std::string canonical_string(const ModelConfig& config) { return to_json(config).dump(); }

Digest8 model_digest(const ModelConfig& config) { return digest8(canonical_string(config)); }

Digest8 digest8(std::string_view s) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> full{};
  SHA256(reinterpret_cast<const unsigned char*>(s.data()), s.size(), full.data());
  Digest8 out{};
  std::copy_n(full.begin(), out.size(), out.begin());
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

ModelPtr make_model(const ModelConfig& config, int block_length) {
  if (block_length < 2) throw ModelError("block length n must be >= 2");
  struct Visitor {
    int n;
    ModelPtr operator()(const IidConfig& c) const {
      if (c.probs.size() < 2) throw ModelError("alphabet size must be >= 2");
      check_distribution(c.probs, "iid probs", true);
      return std::make_shared<IidModel>(c.probs, n);
    }
    ModelPtr operator()(const MarkovConfig& c) const {
      if (c.order < 1) throw ModelError("markov order must be >= 1");
      if (c.transition.empty()) throw ModelError("markov transition table is empty");
      const int m = static_cast<int>(c.transition.front().size());
      if (m < 2) throw ModelError("alphabet size must be >= 2");
      const std::uint64_t contexts = checked_pow(m, c.order);
      if (c.transition.size() != contexts) {
        throw ModelError("markov transition needs m^order = " + std::to_string(contexts) + " rows");
      }
      if (c.initial.size() != contexts) {
        throw ModelError("markov initial needs m^order = " + std::to_string(contexts) + " entries");
      }
      check_distribution(c.initial, "markov initial", false);
      for (std::size_t i = 0; i < c.transition.size(); ++i) {
        if (static_cast<int>(c.transition[i].size()) != m) throw ModelError("ragged transition table");
        check_distribution(c.transition[i], "transition row " + std::to_string(i), false);
      }
      std::vector<Rational> first(static_cast<std::size_t>(m), Rational(0));
      const std::size_t stride = contexts / static_cast<std::size_t>(m);
      for (std::size_t i = 0; i < c.initial.size(); ++i) first[i / stride] += c.initial[i];
      check_distribution(first, "first-symbol marginal", true);
      return std::make_shared<MarkovModel>(c, m, std::move(first), n);
    }
    ModelPtr operator()(const TableConfig& c) const {
      if (c.n != n) {
        throw ModelError("table n=" + std::to_string(c.n) + " does not match block length " +
                         std::to_string(n));
      }
      if (c.alphabet_size < 2 || c.alphabet_size > 10) {
        throw ModelError("table alphabet size must be in [2, 10]");
      }
      std::vector<Rational> all;
      std::vector<Rational> first(static_cast<std::size_t>(c.alphabet_size), Rational(0));
      for (const auto& [key, p] : c.probs) {
        for (char ch : key) {
          if (ch - '0' >= c.alphabet_size) throw ModelError("table key '" + key + "' exceeds alphabet");
        }
        all.push_back(p);
        first[static_cast<std::size_t>(key[0] - '0')] += p;
      }
      check_distribution(all, "table probs", false);
      check_distribution(first, "first-symbol marginal", true);
      return std::make_shared<TableModel>(c, std::move(first));
    }
  };
  return std::visit(Visitor{block_length}, config);
}

// ---------------------------------------------------------------- regions

Region region_bounds(const BlockModel& model, int x1, std::span<const int> rest) {
  const int m = model.alphabet_size();
  if (x1 < 0 || x1 >= m) throw std::out_of_range("first symbol out of range");
  if (static_cast<int>(rest.size()) != model.block_length() - 1) {
    throw std::invalid_argument("continuation must have n-1 symbols");
  }
  Rational lower = 0;
  Rational width = 1;
  for (std::size_t k = 0; k < rest.size(); ++k) {
    const int c = rest[k];
    if (c < 0 || c >= m) throw std::out_of_range("symbol out of range");
    const auto& row = model.conditional(x1, rest.first(k));
    lower += width * row.cum[static_cast<std::size_t>(c)];
    width *= row.prob[static_cast<std::size_t>(c)];
  }
  return Region{lower, lower + width};
}

std::optional<CircularArc> shifted_region_bounds(const BlockModel& model, int x1,
                                                 std::span<const int> rest, const Rational& shift) {
  Region r = region_bounds(model, x1, rest);
  if (r.empty()) return std::nullopt;
  return CircularArc(frac_mod1(r.lower - shift), r.width());
}

RegionSearch::RegionSearch(const BlockModel& model, int x1)
    : model_(&model), x1_(x1), lower_(0), width_(1) {
  if (x1 < 0 || x1 >= model.alphabet_size()) throw std::out_of_range("first symbol out of range");
  prefix_.reserve(static_cast<std::size_t>(model.block_length()) - 1);
}

bool RegionSearch::decided() const {
  return static_cast<int>(prefix_.size()) == model_->block_length() - 1;
}

bool RegionSearch::refine(const Rational& a, const Rational& b) {
  assert(a >= lower_ && b <= lower_ + width_);
  Rational child_lo;
  Rational child_hi;
  while (!decided()) {
    const auto& row = model_->conditional(x1_, prefix_);
    const int m = model_->alphabet_size();
    int chosen = -1;
    for (int c = 0; c < m; ++c) {
      if (row.prob[static_cast<std::size_t>(c)] == 0) continue;
      child_hi = lower_ + width_ * row.cum[static_cast<std::size_t>(c) + 1];
      if (a < child_hi) {
        chosen = c;
        break;
      }
    }
    assert(chosen >= 0);
    if (b > child_hi) return false;
    lower_ += width_ * row.cum[static_cast<std::size_t>(chosen)];
    width_ *= row.prob[static_cast<std::size_t>(chosen)];
    prefix_.push_back(chosen);
  }
  return true;
}

void RegionSearch::locate(const Rational& r) {
  while (!decided()) {
    const auto& row = model_->conditional(x1_, prefix_);
    const int m = model_->alphabet_size();
    int chosen = -1;
    for (int c = 0; c < m; ++c) {
      if (row.prob[static_cast<std::size_t>(c)] == 0) continue;
      if (r < lower_ + width_ * row.cum[static_cast<std::size_t>(c) + 1]) {
        chosen = c;
        break;
      }
    }
    assert(chosen >= 0);
    lower_ += width_ * row.cum[static_cast<std::size_t>(chosen)];
    width_ *= row.prob[static_cast<std::size_t>(chosen)];
    prefix_.push_back(chosen);
  }
}

RegionDecision RegionSearch::decision() const {
  assert(decided());
  return RegionDecision{prefix_, Region{lower_, lower_ + width_}};
}

std::optional<RegionDecision> inverse_region(const BlockModel& model, int x1,
                                             const UnitInterval& candidates) {
  RegionSearch search(model, x1);
  if (!search.refine(candidates.lo(), candidates.hi())) return std::nullopt;
  return search.decision();
}

std::optional<RegionDecision> shifted_inverse_region(const BlockModel& model, int x1,
                                                     const UnitInterval& candidates,
                                                     const Rational& shift) {
  const Rational a = frac_mod1(candidates.lo() + shift);
  const Rational b = a + candidates.length();
  if (b <= 1) return inverse_region(model, x1, UnitInterval(a, b));
  auto upper_part = inverse_region(model, x1, UnitInterval(a, Rational(1)));
  auto lower_part = inverse_region(model, x1, UnitInterval(Rational(0), b - 1));
  if (upper_part && lower_part && upper_part->sequence == lower_part->sequence) return upper_part;
  return std::nullopt;
}

RegionDecision locate(const BlockModel& model, int x1, const Rational& r) {
  RegionSearch search(model, x1);
  search.locate(r);
  return search.decision();
}

void for_each_continuation(const BlockModel& model, int x1,
                           const std::function<void(const Sequence&, const Region&)>& visit,
                           bool include_empty) {
  const int len = model.block_length() - 1;
  const int m = model.alphabet_size();
  Sequence prefix;
  prefix.reserve(static_cast<std::size_t>(len));
  std::function<void(const Rational&, const Rational&)> walk = [&](const Rational& lower,
                                                                   const Rational& width) {
    if (static_cast<int>(prefix.size()) == len) {
      visit(prefix, Region{lower, lower + width});
      return;
    }
    const auto& row = model.conditional(x1, prefix);
    for (int c = 0; c < m; ++c) {
      const Rational& p = row.prob[static_cast<std::size_t>(c)];
      if (p == 0 && !include_empty) continue;
      prefix.push_back(c);
      walk(lower + width * row.cum[static_cast<std::size_t>(c)], width * p);
      prefix.pop_back();
    }
  };
  walk(Rational(0), Rational(1));
}

std::uint64_t continuation_count(const BlockModel& model) {
  std::uint64_t v = 1;
  for (int i = 1; i < model.block_length(); ++i) {
    if (v > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(model.alphabet_size())) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    v *= static_cast<std::uint64_t>(model.alphabet_size());
  }
  return v;
}

}  // namespace dvfh
