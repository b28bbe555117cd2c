#pragma once

// Analytic bounds, exact small-case output laws, Monte Carlo experiments and
// the 4-ASK mutual-information calculator. Floating point is fine here: none
// of this sits on the encode/decode path.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dvfh/codec.hpp"
#include "dvfh/model.hpp"

namespace dvfh {

// ---------------------------------------------------------------- bounds

/// log2 max_i 2 / ((i+1) * i-th largest P_{X1}), in bits.
double divergence_bound_standard(std::span<const Rational> first);
/// log2(2 / min P_{X1}), in bits.
double divergence_bound_modified(std::span<const Rational> first);

struct ErrorPropBound {
  double value = 1;
  bool vacuous = true;  // value >= 1 carries no information
};
/// (4 p_max)^k; k = 0 yields 1 (no guarantee).
ErrorPropBound error_prop_bound(const Rational& p_max, int k);

/// min_x H(X_2^n | X1 = x) - log2((m-1)/2): the mean-l1 threshold of the
/// shifted code with optimal rotations.
double rate_threshold(const BlockModel& model);

/// H(X^n) / n in bits (H(P) for an i.i.d. model).
double entropy_per_symbol(const BlockModel& model);

// ---------------------------------------------------------------- exact laws

using BlockLaw = std::map<std::vector<int>, Rational>;

/// Law of the first emitted block: x1 = sigma(0; P_{X1}) surely, the rest
/// distributed as P(. | x1). Throws EnumerationCapExceeded past `cap`.
BlockLaw first_block_exact_distribution(const BlockModel& model, std::uint64_t cap);

/// Exact joint law of the first `blocks` codewords, obtained by running the
/// encoder on dyadic cells of the input: a cell is split until the encoder no
/// longer asks for a bit beyond it, then its width is credited to the
/// outcome. Throws std::runtime_error if a cell deeper than `max_depth` bits
/// is needed (non-dyadic region boundaries).
BlockLaw exact_output_law(const BlockModel& model, const Variant& variant, int blocks,
                          int max_depth = 256);

/// (1/blocks) max_x log2(law(x) / P_{X^{n*blocks}}(x)), in bits.
double max_log_ratio(const BlockLaw& law, const BlockModel& model, int blocks);

// ---------------------------------------------------------------- statistics

struct Interval {
  double lo = 0;
  double hi = 0;
};
/// Wilson score interval with z standard deviations.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 3.0);

// ---------------------------------------------------------------- experiments

struct RedundancyRow {
  std::string model_hash;
  std::string variant;
  int n = 0;
  std::uint64_t blocks = 0;
  double mean_l1 = 0;
  double h_per_symbol = 0;
  double redundancy = 0;  // mean_l1 / n - h_per_symbol
  double stderr_ = 0;     // standard error of the redundancy
  std::uint64_t seed = 0;
};

/// Sequential encoding of `blocks` blocks from fresh random bits.
RedundancyRow measure_redundancy(const BlockModel& model, const std::string& model_hash,
                                 const Variant& variant, std::uint64_t blocks, std::uint64_t seed);

struct DivergenceReport {
  std::string model_hash;
  int n = 0;
  int joint_blocks = 0;
  std::uint64_t samples = 0;
  double estimate = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double analytic_bound = 0;
  std::string ci_method = "wilson z=3 on the maximizing outcome";
};

/// Empirical per-block max log-ratio over `joint_blocks` consecutive
/// codewords. Sample s draws its bits from split_seed(seed, s).
DivergenceReport estimate_divergence(const BlockModel& model, const std::string& model_hash,
                                     const Variant& variant, int joint_blocks,
                                     std::uint64_t samples, std::uint64_t seed,
                                     unsigned threads = 1,
                                     std::uint64_t cap = std::uint64_t{1} << 24);

struct ErrorPropRow {
  std::string model_hash;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t j0 = 0;
  int k = 0;
  std::uint64_t failures = 0;
  double rate = 0;
  double wilson_lo = 0;
  double wilson_hi = 0;
  std::optional<double> bound;  // absent when 4 p_max >= 1
};

struct ErrorPropOptions {
  std::uint64_t j0 = 2;
  int max_k = 3;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Replace block j0 with itself instead of a random y^n.
  bool identity_corruption = false;
};

/// Corrupts block j0 with a uniformly random y^n and checks, for each
/// k = 1..max_k, whether the decoded stream from t^_(j0+k) on equals the
/// input from t_(j0+k) on.
std::vector<ErrorPropRow> error_propagation_experiment(const BlockModel& model,
                                                       const std::string& model_hash,
                                                       const Variant& variant,
                                                       const ErrorPropOptions& options);

// ---------------------------------------------------------------- 4-ASK

enum class SnrConvention {
  /// SNR = E_P[X^2] / sigma^2: the amplitude a is rescaled per input law.
  AveragePower,
  /// a fixed by the uniform law's power 5a^2 = SNR * sigma^2.
  FixedAmplitude,
};

/// I(X;Y) in bits for X in {-3a,-a,a,3a} with P(+-a) = p_inner each and
/// P(+-3a) = p_outer each, Y = X + N(0, sigma^2).
double awgn_ask4_mutual_information(double snr_db, double p_inner, double p_outer,
                                    SnrConvention convention = SnrConvention::AveragePower);

// ---------------------------------------------------------------- CSV

void write_redundancy_csv(std::ostream& out, std::span<const RedundancyRow> rows);
void write_error_prop_csv(std::ostream& out, std::span<const ErrorPropRow> rows);
void write_divergence_csv(std::ostream& out, std::span<const DivergenceReport> rows);

}  // namespace dvfh
