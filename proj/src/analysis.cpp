#include "dvfh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dvfh/shift.hpp"

namespace dvfh {

double divergence_bound_standard(std::span<const Rational> first) {
  std::vector<Rational> sorted(first.begin(), first.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Rational ratio = Rational(2) / (Rational(static_cast<long>(i + 1)) * sorted[i]);
    best = std::max(best, log2_of(ratio));
  }
  return best;
}

double divergence_bound_modified(std::span<const Rational> first) {
  const Rational least = *std::min_element(first.begin(), first.end());
  return log2_of(Rational(2) / least);
}

ErrorPropBound error_prop_bound(const Rational& p_max, int k) {
  if (k <= 0) return {};
  const double v = std::pow(4.0 * to_double(p_max), k);
  return {v, v >= 1.0};
}

double rate_threshold(const BlockModel& model) {
  double least = std::numeric_limits<double>::infinity();
  for (int x = 0; x < model.alphabet_size(); ++x) least = std::min(least, model.cond_entropy(x));
  return least - std::log2((model.alphabet_size() - 1) / 2.0);
}

double entropy_per_symbol(const BlockModel& model) {
  const auto& first = model.first_symbol_dist();
  double h = entropy_bits(first);
  for (int x = 0; x < model.alphabet_size(); ++x) {
    if (first[static_cast<std::size_t>(x)] > 0) {
      h += to_double(first[static_cast<std::size_t>(x)]) * model.cond_entropy(x);
    }
  }
  return h / model.block_length();
}

BlockLaw first_block_exact_distribution(const BlockModel& model, std::uint64_t cap) {
  if (continuation_count(model) > cap) {
    throw EnumerationCapExceeded("first-block law needs " + std::to_string(continuation_count(model)) +
                                 " continuations, cap is " + std::to_string(cap));
  }
  const int x1 = rank_desc(model.first_symbol_dist())(0);
  BlockLaw law;
  for_each_continuation(model, x1, [&](const Sequence& rest, const Region& region) {
    Sequence block{x1};
    block.insert(block.end(), rest.begin(), rest.end());
    law[block] = region.width();
  });
  return law;
}

namespace {

struct NeedMoreBits {};

// A fixed bit prefix; asking past it means the cell must be split.
class PrefixBits final : public BitSource {
 public:
  explicit PrefixBits(const Bits& prefix) : prefix_(prefix) {}
  bool bit(std::uint64_t position) override {
    if (position >= prefix_.size()) throw NeedMoreBits{};
    return prefix_[position] != 0;
  }

 private:
  const Bits& prefix_;
};

void explore_cell(const BlockModel& model, const Variant& variant, int blocks, int max_depth,
                  Bits& prefix, BlockLaw& law) {
  PrefixBits source(prefix);
  EncoderState state = initial_encoder_state(variant);
  Sequence outcome;
  try {
    for (int j = 0; j < blocks; ++j) {
      EncodedBlock step = encode_block(state, model, source, variant);
      outcome.insert(outcome.end(), step.trace.codeword.begin(), step.trace.codeword.end());
      state = std::move(step.state);
    }
  } catch (const NeedMoreBits&) {
    if (static_cast<int>(prefix.size()) >= max_depth) {
      throw std::runtime_error("exact output law needs cells deeper than " +
                               std::to_string(max_depth) + " bits");
    }
    for (std::uint8_t b : {0, 1}) {
      prefix.push_back(b);
      explore_cell(model, variant, blocks, max_depth, prefix, law);
      prefix.pop_back();
    }
    return;
  }
  law[outcome] += pow2(-static_cast<std::int64_t>(prefix.size()));
}

}  // namespace

BlockLaw exact_output_law(const BlockModel& model, const Variant& variant, int blocks,
                          int max_depth) {
  if (blocks < 1) throw std::invalid_argument("blocks must be positive");
  BlockLaw law;
  Bits prefix;
  explore_cell(model, variant, blocks, max_depth, prefix, law);
  return law;
}

double max_log_ratio(const BlockLaw& law, const BlockModel& model, int blocks) {
  const auto n = static_cast<std::size_t>(model.block_length());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [outcome, mass] : law) {
    if (mass == 0) continue;
    Rational target = 1;
    for (std::size_t j = 0; j < outcome.size(); j += n) {
      target *= model.block_probability(std::span<const int>(outcome).subspan(j, n));
    }
    if (target == 0) return std::numeric_limits<double>::infinity();
    best = std::max(best, log2_of(mass / target) / blocks);
  }
  return best;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0, 1};
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1 + z2 / nt;
  const double centre = (p + z2 / (2 * nt)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nt + z2 / (4 * nt * nt)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

RedundancyRow measure_redundancy(const BlockModel& model, const std::string& model_hash,
                                 const Variant& variant, std::uint64_t blocks,
                                 std::uint64_t seed) {
  if (blocks == 0) throw std::invalid_argument("blocks must be positive");
  RandomBits source(seed);
  EncoderState state = initial_encoder_state(variant);
  // Welford running mean and variance of l1.
  double mean = 0;
  double m2 = 0;
  for (std::uint64_t j = 1; j <= blocks; ++j) {
    EncodedBlock step = encode_block(state, model, source, variant);
    const double x = static_cast<double>(step.trace.consumed);
    const double delta = x - mean;
    mean += delta / static_cast<double>(j);
    m2 += delta * (x - mean);
    state = std::move(step.state);
  }
  const double n = model.block_length();
  RedundancyRow row;
  row.model_hash = model_hash;
  row.variant = variant.is_shifted() ? "shifted" : "standard";
  row.n = model.block_length();
  row.blocks = blocks;
  row.mean_l1 = mean;
  row.h_per_symbol = entropy_per_symbol(model);
  row.redundancy = mean / n - row.h_per_symbol;
  const double var = blocks > 1 ? m2 / static_cast<double>(blocks - 1) : 0.0;
  row.stderr_ = std::sqrt(var / static_cast<double>(blocks)) / n;
  row.seed = seed;
  return row;
}

namespace {

// Runs body(begin, end, slot) over [0, count) split into `threads` contiguous
// ranges. Results are keyed by index, so the split never affects them.
template <typename Body>
void parallel_ranges(std::uint64_t count, unsigned threads, Body body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    body(std::uint64_t{0}, count, 0u);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t begin = count * t / threads;
    const std::uint64_t end = count * (t + 1) / threads;
    pool.emplace_back([&, begin, end, t] {
      try {
        body(begin, end, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t checked_power(int base, std::uint64_t exponent, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < exponent; ++i) {
    if (v > cap / static_cast<std::uint64_t>(base)) {
      throw EnumerationCapExceeded("outcome space exceeds the cap of " + std::to_string(cap));
    }
    v *= static_cast<std::uint64_t>(base);
  }
  return v;
}

}  // namespace

DivergenceReport estimate_divergence(const BlockModel& model, const std::string& model_hash,
                                     const Variant& variant, int joint_blocks,
                                     std::uint64_t samples, std::uint64_t seed, unsigned threads,
                                     std::uint64_t cap) {
  if (joint_blocks < 1) throw std::invalid_argument("joint_blocks must be positive");
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  const int m = model.alphabet_size();
  const auto symbols = static_cast<std::uint64_t>(model.block_length()) *
                       static_cast<std::uint64_t>(joint_blocks);
  const std::uint64_t outcomes = checked_power(m, symbols, cap);

  std::vector<std::vector<std::uint64_t>> partial(std::max(1u, threads));
  parallel_ranges(samples, threads, [&](std::uint64_t begin, std::uint64_t end, unsigned slot) {
    auto& counts = partial[slot];
    counts.assign(outcomes, 0);
    for (std::uint64_t s = begin; s < end; ++s) {
      RandomBits source(split_seed(seed, s));
      EncoderState state = initial_encoder_state(variant);
      std::uint64_t index = 0;
      for (int j = 0; j < joint_blocks; ++j) {
        EncodedBlock step = encode_block(state, model, source, variant);
        for (int x : step.trace.codeword) index = index * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(x);
        state = std::move(step.state);
      }
      ++counts[index];
    }
  });
  std::vector<std::uint64_t> counts(outcomes, 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < p.size(); ++i) counts[i] += p[i];
  }

  DivergenceReport report;
  report.model_hash = model_hash;
  report.n = model.block_length();
  report.joint_blocks = joint_blocks;
  report.samples = samples;
  report.analytic_bound = variant.is_shifted()
                              ? divergence_bound_modified(model.first_symbol_dist())
                              : divergence_bound_standard(model.first_symbol_dist());
  report.estimate = -std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::size_t>(model.block_length());
  Sequence outcome(symbols);
  for (std::uint64_t i = 0; i < outcomes; ++i) {
    if (counts[i] == 0) continue;
    std::uint64_t v = i;
    for (std::size_t k = symbols; k-- > 0;) {
      outcome[k] = static_cast<int>(v % static_cast<std::uint64_t>(m));
      v /= static_cast<std::uint64_t>(m);
    }
    double target = 1;
    for (std::size_t j = 0; j < outcome.size(); j += n) {
      target *= to_double(model.block_probability(std::span<const int>(outcome).subspan(j, n)));
    }
    const double freq = static_cast<double>(counts[i]) / static_cast<double>(samples);
    const double ratio = std::log2(freq / target) / joint_blocks;
    if (ratio > report.estimate) {
      report.estimate = ratio;
      const Interval ci = wilson_interval(counts[i], samples);
      report.ci_lo = std::log2(ci.lo / target) / joint_blocks;
      report.ci_hi = std::log2(ci.hi / target) / joint_blocks;
    }
  }
  return report;
}

std::vector<ErrorPropRow> error_propagation_experiment(const BlockModel& model,
                                                       const std::string& model_hash,
                                                       const Variant& variant,
                                                       const ErrorPropOptions& opt) {
  if (opt.j0 < 1) throw std::invalid_argument("j0 must be at least 1");
  if (opt.max_k < 1) throw std::invalid_argument("max_k must be at least 1");
  if (opt.trials == 0) throw std::invalid_argument("trials must be positive");
  const int m = model.alphabet_size();
  const int n = model.block_length();
  const auto kmax = static_cast<std::size_t>(opt.max_k);
  // Block j0 + max_k is decodable once block j0 + max_k + 1 arrives; the
  // window of that last block confirms the decoder is back in step.
  const std::uint64_t total = opt.j0 + static_cast<std::uint64_t>(opt.max_k) + 1;

  std::vector<std::uint8_t> failed(opt.trials * kmax, 0);
  parallel_ranges(opt.trials, opt.threads, [&](std::uint64_t begin, std::uint64_t end, unsigned) {
    for (std::uint64_t t = begin; t < end; ++t) {
      const std::uint64_t trial_seed = split_seed(opt.seed, t);
      RandomBits source(trial_seed);
      EncoderState state = initial_encoder_state(variant);
      std::vector<Sequence> blocks;
      std::vector<std::uint64_t> starts;  // t_(j), 0-based, j = 1..total
      std::vector<CircularArc> windows;
      for (std::uint64_t j = 0; j < total; ++j) {
        EncodedBlock step = encode_block(state, model, source, variant);
        blocks.push_back(step.trace.codeword);
        starts.push_back(step.trace.bit_offset);
        windows.push_back(step.trace.window);
        state = std::move(step.state);
      }
      const std::uint64_t encoded_end = starts.back();  // bits of blocks 1..total-1
      const Bits input = source.prefix(encoded_end);

      Sequence y = blocks[opt.j0 - 1];
      if (!opt.identity_corruption) {
        std::mt19937_64 rng(split_seed(trial_seed, 1));
        std::uniform_int_distribution<int> symbol(0, m - 1);
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = symbol(rng);
      }
      const InjectedDecode dec = inject_and_decode(model, blocks, opt.j0, y, variant);
      const bool synced_at_end = dec.windows.back() == windows.back();
      for (std::size_t k = 1; k <= kmax; ++k) {
        const std::size_t j = opt.j0 + k;  // 1-based block index
        const std::uint64_t from_enc = starts[j - 1];
        const std::uint64_t from_dec = dec.boundaries[j - 1];
        bool ok = synced_at_end && dec.bits.size() >= from_dec &&
                  dec.bits.size() - from_dec == encoded_end - from_enc;
        if (ok) {
          ok = std::equal(input.begin() + static_cast<std::ptrdiff_t>(from_enc), input.end(),
                          dec.bits.begin() + static_cast<std::ptrdiff_t>(from_dec));
        }
        failed[t * kmax + (k - 1)] = ok ? 0 : 1;
      }
    }
  });

  std::vector<ErrorPropRow> rows;
  const Rational p_max = model.p_max();
  for (std::size_t k = 1; k <= kmax; ++k) {
    ErrorPropRow row;
    row.model_hash = model_hash;
    row.n = n;
    row.trials = opt.trials;
    row.j0 = opt.j0;
    row.k = static_cast<int>(k);
    for (std::uint64_t t = 0; t < opt.trials; ++t) row.failures += failed[t * kmax + (k - 1)];
    row.rate = static_cast<double>(row.failures) / static_cast<double>(opt.trials);
    const Interval ci = wilson_interval(row.failures, opt.trials);
    row.wilson_lo = ci.lo;
    row.wilson_hi = ci.hi;
    const ErrorPropBound bound = error_prop_bound(p_max, static_cast<int>(k));
    if (!bound.vacuous) row.bound = bound.value;
    rows.push_back(std::move(row));
  }
  return rows;
}

double awgn_ask4_mutual_information(double snr_db, double p_inner, double p_outer,
                                    SnrConvention convention) {
  if (p_inner < 0 || p_outer < 0 || std::abs(2 * p_inner + 2 * p_outer - 1) > 1e-12) {
    throw std::invalid_argument("4-ASK probabilities must satisfy 2 p_inner + 2 p_outer = 1");
  }
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double sigma = 1.0;
  const double power = convention == SnrConvention::AveragePower
                           ? 2 * p_inner + 18 * p_outer  // E[X^2] / a^2
                           : 5.0;
  const double a = std::sqrt(snr * sigma * sigma / power);
  const std::array<double, 4> points{-3 * a, -a, a, 3 * a};
  const std::array<double, 4> probs{p_outer, p_inner, p_inner, p_outer};

  const double norm = 1.0 / (sigma * std::sqrt(2 * std::numbers::pi));
  auto density = [&](double y) {
    double f = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double d = (y - points[i]) / sigma;
      f += probs[i] * norm * std::exp(-0.5 * d * d);
    }
    return f;
  };
  auto integrand = [&](double y) {
    const double f = density(y);
    return f > 0 ? -f * std::log2(f) : 0.0;
  };

  using boost::math::quadrature::gauss_kronrod;
  double h_y = 0;
  // Integrate piecewise between constellation points so every bump is
  // resolved; 12 sigma of tail leaves nothing measurable behind.
  std::vector<double> cuts{points[0] - 12 * sigma};
  for (double p : points) cuts.push_back(p);
  cuts.push_back(points[3] + 12 * sigma);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    h_y += gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 15, 1e-12);
  }
  const double h_n = 0.5 * std::log2(2 * std::numbers::pi * std::numbers::e * sigma * sigma);
  return h_y - h_n;
}

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

}  // namespace

void write_redundancy_csv(std::ostream& out, std::span<const RedundancyRow> rows) {
  out << "model_hash,variant,n,blocks,mean_l1,H_per_symbol,redundancy,stderr,seed\n";
  for (const auto& r : rows) {
    out << r.model_hash << ',' << r.variant << ',' << r.n << ',' << r.blocks << ','
        << fmt(r.mean_l1) << ',' << fmt(r.h_per_symbol) << ',' << fmt(r.redundancy) << ','
        << fmt(r.stderr_) << ',' << r.seed << '\n';
  }
}

void write_error_prop_csv(std::ostream& out, std::span<const ErrorPropRow> rows) {
  out << "model_hash,n,trials,j0,k,failures,rate,wilson_lo,wilson_hi,bound\n";
  for (const auto& r : rows) {
    out << r.model_hash << ',' << r.n << ',' << r.trials << ',' << r.j0 << ',' << r.k << ','
        << r.failures << ',' << fmt(r.rate) << ',' << fmt(r.wilson_lo) << ','
        << fmt(r.wilson_hi) << ',' << (r.bound ? fmt(*r.bound) : std::string("NA")) << '\n';
  }
}

void write_divergence_csv(std::ostream& out, std::span<const DivergenceReport> rows) {
  out << "model_hash,n,m,samples,estimate,ci_lo,ci_hi,analytic_bound\n";
  for (const auto& r : rows) {
    out << r.model_hash << ',' << r.n << ',' << r.joint_blocks << ',' << r.samples << ','
        << fmt(r.estimate) << ',' << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << ','
        << fmt(r.analytic_bound) << '\n';
  }
}

}  // namespace dvfh
