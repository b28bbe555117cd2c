// dvfh: encode/decode files, report bounds, optimize shifts and run benchmarks.
//
// Exit codes: 0 ok, 1 model/shift/container validation, 2 I/O,
// 3 disconnected shifted intersection.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dvfh/analysis.hpp"
#include "dvfh/codec.hpp"
#include "dvfh/container.hpp"
#include "dvfh/shift.hpp"

namespace {

using namespace dvfh;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitDisconnected = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                 text.size()));
}

// "bits" files hold ASCII 0/1 with whitespace ignored; "bytes" are raw.
Bits load_message(const std::string& path, const std::string& format) {
  const auto raw = read_file(path);
  if (format == "bytes") return bits_from_bytes(raw);
  std::string text;
  for (auto c : raw) {
    if (!std::isspace(c)) text.push_back(static_cast<char>(c));
  }
  try {
    return bits_from_string(text);
  } catch (const std::invalid_argument&) {
    throw ModelError("bit message files may only contain 0, 1 and whitespace");
  }
}

void store_message(const std::string& path, const std::string& format, const Bits& bits) {
  if (format == "bytes") {
    if (bits.size() % 8 != 0) {
      throw ModelError("message has " + std::to_string(bits.size()) +
                       " bits; use --format bits for lengths that are not whole bytes");
    }
    write_file(path, bytes_from_bits(bits));
  } else {
    write_text(path, bits_to_string(bits) + "\n");
  }
}

struct LoadedModel {
  ModelConfig config;
  ModelPtr model;
  std::string hash;
};

LoadedModel load_model(const std::string& path, int n) {
  LoadedModel out;
  out.config = load_model_config(path);
  out.model = make_model(out.config, n);
  out.hash = to_hex(model_digest(out.config));
  return out;
}

Variant make_variant(const std::string& name, const std::string& shift_path, int m) {
  if (name == "standard") {
    if (!shift_path.empty()) throw ModelError("--shift is only valid with --variant shifted");
    return Variant::standard();
  }
  if (shift_path.empty()) throw ModelError("--variant shifted needs --shift");
  ShiftTable table = load_shift_table(shift_path);
  if (static_cast<int>(table.s.size()) != m) {
    throw ModelError("shift table has " + std::to_string(table.s.size()) + " entries, alphabet has " +
                     std::to_string(m));
  }
  return Variant::shifted(std::move(table));
}

// Shifted benchmarks compute exact rotations per block length on the fly.
Variant bench_variant(const std::string& name, const BlockModel& model) {
  if (name == "standard") return Variant::standard();
  return Variant::shifted(compute_shift_table(model, ShiftMode::Exact));
}

std::vector<int> parse_lengths(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ModelError("bad block length '" + item + "'");
    }
  }
  if (out.empty()) throw ModelError("no block lengths given");
  return out;
}

void emit_csv(const std::string& path, const std::string& csv) {
  if (path.empty() || path == "-") {
    std::cout << csv;
  } else {
    write_text(path, csv);
  }
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

// ---------------------------------------------------------------- commands

struct EncodeArgs {
  std::string model, variant = "standard", shift, input, output, format = "bytes";
  int n = 0;
  std::uint64_t budget = 10'000'000;
};

int cmd_encode(const EncodeArgs& a) {
  const LoadedModel lm = load_model(a.model, a.n);
  const Variant variant = make_variant(a.variant, a.shift, lm.model->alphabet_size());
  const Bits message = load_message(a.input, a.format);
  const EncodedMessage enc = encode_message(*lm.model, message, variant, a.budget);

  Container c;
  c.header.shifted = variant.is_shifted();
  c.header.alphabet_size = static_cast<std::uint8_t>(lm.model->alphabet_size());
  c.header.block_length = static_cast<std::uint32_t>(a.n);
  c.header.message_bits = message.size();
  c.header.model_digest = model_digest(lm.config);
  if (variant.is_shifted()) c.header.shift_digest = shift_digest(variant.table());
  c.blocks = enc.blocks;
  write_file(a.output, write_container(c));
  std::cout << "blocks=" << enc.blocks.size() << " consumed=" << enc.data_bits << "\n";
  return 0;
}

struct DecodeArgs {
  std::string model, shift, input, output, format = "bytes";
};

int cmd_decode(const DecodeArgs& a) {
  const Container c = read_container(read_file(a.input));
  const LoadedModel lm = load_model(a.model, static_cast<int>(c.header.block_length));
  if (model_digest(lm.config) != c.header.model_digest) {
    throw ModelError("model digest " + lm.hash + " does not match the container's " +
                     to_hex(c.header.model_digest));
  }
  if (lm.model->alphabet_size() != c.header.alphabet_size) {
    throw ModelError("container alphabet size differs from the model");
  }
  const Variant variant =
      make_variant(c.header.shifted ? "shifted" : "standard", a.shift, lm.model->alphabet_size());
  if (variant.is_shifted() && shift_digest(variant.table()) != c.header.shift_digest) {
    throw ModelError("shift table digest does not match the container");
  }
  const Bits bits = decode_message(*lm.model, c.blocks, c.header.message_bits, variant);
  store_message(a.output, a.format, bits);
  std::cout << "bits=" << bits.size() << "\n";
  return 0;
}

struct BoundsArgs {
  std::string model;
  int n = 0;
  int k_max = 5;
  bool json = false;
};

int cmd_bounds(const BoundsArgs& a) {
  const LoadedModel lm = load_model(a.model, a.n);
  const BlockModel& model = *lm.model;
  const auto& first = model.first_symbol_dist();
  const Rational p_max = model.p_max();
  double min_h = std::numeric_limits<double>::infinity();
  for (int x = 0; x < model.alphabet_size(); ++x) min_h = std::min(min_h, model.cond_entropy(x));

  nlohmann::json j;
  j["model_hash"] = lm.hash;
  j["n"] = a.n;
  j["m"] = model.alphabet_size();
  j["bound_std"] = divergence_bound_standard(first);
  j["bound_mod"] = divergence_bound_modified(first);
  j["p_max"] = to_string(p_max);
  j["p_max_float"] = to_double(p_max);
  j["min_cond_entropy"] = min_h;
  j["rate_threshold"] = rate_threshold(model);
  j["error_prop"] = nlohmann::json::array();
  for (int k = 1; k <= a.k_max; ++k) {
    const ErrorPropBound b = error_prop_bound(p_max, k);
    j["error_prop"].push_back({{"k", k}, {"bound", b.value}, {"vacuous", b.vacuous}});
  }
  if (a.json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "model " << lm.hash << " n=" << a.n << " m=" << model.alphabet_size() << "\n"
            << "bound_std=" << num(j["bound_std"]) << " bits\n"
            << "bound_mod=" << num(j["bound_mod"]) << " bits\n"
            << "p_max=" << to_string(p_max) << " (" << num(to_double(p_max)) << ")\n"
            << "min_cond_entropy=" << num(min_h) << " bits\n"
            << "rate_threshold=" << num(rate_threshold(model)) << " bits\n"
            << "k  (4 p_max)^k\n";
  for (const auto& row : j["error_prop"]) {
    std::cout << std::setw(2) << row["k"].get<int>() << " "
              << (row["vacuous"].get<bool>() ? std::string("vacuous")
                                             : num(row["bound"].get<double>()))
              << "\n";
  }
  return 0;
}

struct ShiftArgs {
  std::string model, output, mode = "exact";
  int n = 0;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t cap = kDefaultEnumerationCap;
};

int cmd_shift_optimize(const ShiftArgs& a) {
  const LoadedModel lm = load_model(a.model, a.n);
  const ShiftMode mode = a.mode == "exact" ? ShiftMode::Exact : ShiftMode::Approximate;
  const ShiftTable table = compute_shift_table(*lm.model, mode, a.cap, a.samples, a.seed);
  const std::string text = to_json(table).dump(2) + "\n";
  if (a.output.empty()) {
    std::cout << text;
  } else {
    write_text(a.output, text);
    std::cout << "wrote " << a.output << " digest=" << to_hex(shift_digest(table)) << "\n";
  }
  return 0;
}

struct BenchArgs {
  std::string model, variant = "standard", csv, lengths = "8";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t blocks = 10'000;
  std::uint64_t samples = 100'000;
  int joint_blocks = 2;
  std::uint64_t trials = 1000;
  std::uint64_t j0 = 2;
  int k_max = 3;
};

int cmd_bench_redundancy(const BenchArgs& a) {
  const ModelConfig config = load_model_config(a.model);
  const std::string hash = to_hex(model_digest(config));
  const std::vector<int> lengths = parse_lengths(a.lengths);
  // Validate everything up front so errors surface before any work starts.
  std::vector<ModelPtr> models;
  for (int n : lengths) models.push_back(make_model(config, n));

  std::vector<RedundancyRow> rows(lengths.size());
  std::vector<std::exception_ptr> errors(lengths.size());
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next >= lengths.size()) return;
        i = next++;
      }
      try {
        const Variant variant = bench_variant(a.variant, *models[i]);
        rows[i] = measure_redundancy(*models[i], hash, variant, a.blocks,
                                     split_seed(a.seed, static_cast<std::uint64_t>(lengths[i])));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::max(1u, a.threads); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ostringstream csv;
  write_redundancy_csv(csv, rows);
  emit_csv(a.csv, csv.str());
  if (!a.csv.empty() && a.csv != "-") {
    for (const auto& r : rows) {
      std::cerr << "n=" << r.n << " mean_l1=" << num(r.mean_l1) << " redundancy=" << num(r.redundancy)
                << " +- " << num(r.stderr_) << "\n";
    }
  }
  return 0;
}

int cmd_bench_divergence(const BenchArgs& a) {
  const int n = parse_lengths(a.lengths).front();
  const LoadedModel lm = load_model(a.model, n);
  const Variant variant = bench_variant(a.variant, *lm.model);
  const DivergenceReport r = estimate_divergence(*lm.model, lm.hash, variant, a.joint_blocks,
                                                 a.samples, a.seed, a.threads);
  std::ostringstream csv;
  write_divergence_csv(csv, std::span<const DivergenceReport>(&r, 1));
  emit_csv(a.csv, csv.str());
  std::cerr << "estimate=" << num(r.estimate) << " ci=[" << num(r.ci_lo) << ", " << num(r.ci_hi)
            << "] bound=" << num(r.analytic_bound) << " (" << r.ci_method << ")\n";
  return 0;
}

int cmd_bench_error_prop(const BenchArgs& a) {
  const int n = parse_lengths(a.lengths).front();
  const LoadedModel lm = load_model(a.model, n);
  const Variant variant = bench_variant(a.variant, *lm.model);
  ErrorPropOptions opt;
  opt.j0 = a.j0;
  opt.max_k = a.k_max;
  opt.trials = a.trials;
  opt.seed = a.seed;
  opt.threads = a.threads;
  const auto rows = error_propagation_experiment(*lm.model, lm.hash, variant, opt);
  std::ostringstream csv;
  write_error_prop_csv(csv, rows);
  emit_csv(a.csv, csv.str());
  for (const auto& r : rows) {
    std::cerr << "k=" << r.k << " rate=" << num(r.rate) << " wilson=[" << num(r.wilson_lo) << ", "
              << num(r.wilson_hi) << "] bound=" << (r.bound ? num(*r.bound) : "NA") << "\n";
  }
  return 0;
}

struct AwgnArgs {
  double snr_db = 10;
  double inner = 0.25;
  double outer = 0.25;
  std::string convention = "both";
};

int cmd_awgn(const AwgnArgs& a) {
  auto show = [&](const char* name, SnrConvention c) {
    std::cout << name << " " << std::fixed << std::setprecision(6)
              << awgn_ask4_mutual_information(a.snr_db, a.inner, a.outer, c) << "\n";
  };
  std::cout << "snr_db=" << a.snr_db << " p_inner=" << a.inner << " p_outer=" << a.outer << "\n";
  if (a.convention != "fixed-amplitude") show("average-power", SnrConvention::AveragePower);
  if (a.convention != "average-power") show("fixed-amplitude", SnrConvention::FixedAmplitude);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed variable-to-fixed homophonic coding"};
  app.require_subcommand(1);

  const std::vector<std::string> variants{"standard", "shifted"};
  const std::vector<std::string> formats{"bytes", "bits"};

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a message into a container");
  encode->add_option("--model", enc.model, "Model config JSON")->required();
  encode->add_option("--n", enc.n, "Block length")->required()->check(CLI::Range(2, 1 << 20));
  encode->add_option("--variant", enc.variant)->check(CLI::IsMember(variants));
  encode->add_option("--shift", enc.shift, "Shift table JSON (shifted variant)");
  encode->add_option("--input", enc.input, "Message file")->required();
  encode->add_option("--output", enc.output, "Container file")->required();
  encode->add_option("--format", enc.format, "Message file format")->check(CLI::IsMember(formats));
  encode->add_option("--block-budget", enc.budget, "Abort after this many blocks");

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Recover the message from a container");
  decode->add_option("--model", dec.model)->required();
  decode->add_option("--shift", dec.shift);
  decode->add_option("--input", dec.input)->required();
  decode->add_option("--output", dec.output)->required();
  decode->add_option("--format", dec.format)->check(CLI::IsMember(formats));

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds", "Divergence, error-propagation and rate bounds");
  bounds->add_option("--model", bnd.model)->required();
  bounds->add_option("--n", bnd.n)->required()->check(CLI::Range(2, 1 << 20));
  bounds->add_option("--k-max", bnd.k_max)->check(CLI::Range(1, 1000));
  bounds->add_flag("--json", bnd.json);

  ShiftArgs sh;
  auto* shift = app.add_subcommand("shift-optimize", "Compute the rotation table");
  shift->add_option("--model", sh.model)->required();
  shift->add_option("--n", sh.n)->required()->check(CLI::Range(2, 1 << 20));
  shift->add_option("--mode", sh.mode)->check(CLI::IsMember({"exact", "approx"}));
  shift->add_option("--samples", sh.samples)->check(CLI::PositiveNumber);
  shift->add_option("--seed", sh.seed);
  shift->add_option("--cap", sh.cap, "Enumeration cap for exact mode");
  shift->add_option("--output", sh.output);

  BenchArgs br;
  auto* bench_red = app.add_subcommand("bench-redundancy", "E[l1]/n - H per block length");
  bench_red->add_option("--model", br.model)->required();
  bench_red->add_option("--n", br.lengths, "Comma-separated block lengths");
  bench_red->add_option("--variant", br.variant)->check(CLI::IsMember(variants));
  bench_red->add_option("--blocks", br.blocks)->check(CLI::PositiveNumber);
  bench_red->add_option("--seed", br.seed);
  bench_red->add_option("--threads", br.threads)->check(CLI::Range(1u, 1024u));
  bench_red->add_option("--csv", br.csv);

  BenchArgs bd;
  auto* bench_div = app.add_subcommand("bench-divergence", "Empirical per-block max log-ratio");
  bench_div->add_option("--model", bd.model)->required();
  bench_div->add_option("--n", bd.lengths);
  bench_div->add_option("--variant", bd.variant)->check(CLI::IsMember(variants));
  bench_div->add_option("--joint-blocks", bd.joint_blocks)->check(CLI::Range(1, 64));
  bench_div->add_option("--samples", bd.samples)->check(CLI::PositiveNumber);
  bench_div->add_option("--seed", bd.seed);
  bench_div->add_option("--threads", bd.threads)->check(CLI::Range(1u, 1024u));
  bench_div->add_option("--csv", bd.csv);

  BenchArgs be;
  auto* bench_err = app.add_subcommand("bench-error-prop", "Realignment after a corrupted block");
  bench_err->add_option("--model", be.model)->required();
  bench_err->add_option("--n", be.lengths);
  bench_err->add_option("--variant", be.variant)->check(CLI::IsMember(variants));
  bench_err->add_option("--trials", be.trials)->check(CLI::PositiveNumber);
  bench_err->add_option("--j0", be.j0)->check(CLI::PositiveNumber);
  bench_err->add_option("--k-max", be.k_max)->check(CLI::Range(1, 1000));
  bench_err->add_option("--seed", be.seed);
  bench_err->add_option("--threads", be.threads)->check(CLI::Range(1u, 1024u));
  bench_err->add_option("--csv", be.csv);

  AwgnArgs aw;
  auto* awgn = app.add_subcommand("awgn-ask", "4-ASK mutual information over AWGN");
  awgn->add_option("--snr-db", aw.snr_db);
  awgn->add_option("--inner", aw.inner, "P(+a) = P(-a)");
  awgn->add_option("--outer", aw.outer, "P(+3a) = P(-3a)");
  awgn->add_option("--convention", aw.convention)
      ->check(CLI::IsMember({"average-power", "fixed-amplitude", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode) return cmd_encode(enc);
    if (*decode) return cmd_decode(dec);
    if (*bounds) return cmd_bounds(bnd);
    if (*shift) return cmd_shift_optimize(sh);
    if (*bench_red) return cmd_bench_redundancy(br);
    if (*bench_div) return cmd_bench_divergence(bd);
    if (*bench_err) return cmd_bench_error_prop(be);
    if (*awgn) return cmd_awgn(aw);
  } catch (const DisconnectedIntersection& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDisconnected;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    // Model, shift-table and container validation, truncated streams and
    // exhausted budgets all land here.
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
