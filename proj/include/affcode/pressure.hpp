#pragma once

// Partition sums S(k, s) = Σ_{|i| = k} Φ^s(T_i), finite-level pressure
// quotients log S(k, s) / k and the zero of the pressure.

#include <cstdint>
#include <optional>
#include <vector>

#include "affcode/codetree.hpp"

namespace affcode {

inline constexpr std::uint64_t kDefaultWordCap = std::uint64_t{1} << 24;

struct PressureOptions {
  std::uint64_t word_cap = kDefaultWordCap;
  // Monte Carlo is used where exact enumeration exceeds word_cap.
  bool allow_mc = true;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0;
};

struct PressureEstimate {
  int level = 0;
  double s = 0.0;
  double log_sum = 0.0;
  double value = 0.0;  // log_sum / level
  std::optional<double> mc_stderr;  // absent for exact enumeration
};

struct McEstimate {
  double log_sum = 0.0;
  // Standard error of log_sum (delta method on the linear-domain mean).
  double stderr_log = 0.0;
};

struct ZeroBracket {
  double lo = 0.0;
  double hi = 0.0;
  double s0_hat = 0.0;
  int level = 0;          // depth k at which the quotient was evaluated
  std::size_t neck_index = 0;
  bool exact = true;
  bool degenerate = false;  // p̂(0) <= 0
};

// log S(k, s) by exhaustive enumeration.  Throws InfeasibleError above
// word_cap and DepthError for k outside the tree.
double partition_sum(const NeckCodeTree& t, int k, double s,
                     std::uint64_t word_cap = kDefaultWordCap);

// Uniform-child descent: each path is weighted by (Π branchings)·Φ^s, an
// unbiased estimator of S(k, s).
McEstimate partition_sum_mc(const NeckCodeTree& t, int k, double s, std::size_t n_samples,
                            std::uint64_t seed);

// Log of the descent weight of a path and log of its selection probability.
double mc_path_log_weight(const NeckCodeTree& t, std::span<const int> word, double s);
double mc_path_log_probability(const NeckCodeTree& t, std::span<const int> word);

// Log-spectra of the words at one level, exact or sampled, so that
// log S(k, ·) can be evaluated at many s without redoing the products.
// Sampled levels reuse the same paths for every s, which keeps the estimate
// strictly decreasing in s.
class LevelSample {
 public:
  static LevelSample exact(const NeckCodeTree& t, int k,
                           std::uint64_t word_cap = kDefaultWordCap);
  static LevelSample sampled(const NeckCodeTree& t, int k, std::size_t n_samples,
                             std::uint64_t seed);

  int level() const { return level_; }
  bool is_exact() const { return exact_; }
  std::size_t size() const { return log_weights_.size(); }

  double log_sum(double s) const;
  McEstimate estimate(double s) const;

 private:
  LevelSample(int dim, int level, bool exact) : dim_(dim), level_(level), exact_(exact) {}
  double entry_log_phi(std::size_t i, double s) const;

  int dim_;
  int level_;
  bool exact_;
  std::vector<double> log_spectra_;  // size() * dim_
  std::vector<double> log_weights_;
};

// Quotients at levels N_1..N_L.
std::vector<PressureEstimate> pressure_curve(const NeckCodeTree& t, double s,
                                             std::size_t max_neck_index,
                                             const PressureOptions& options = {});

// Bisection for the zero of p̂(s) = log S(N_j, s) / N_j at the deepest neck
// level j <= max_neck_index that is exactly enumerable (Monte Carlo at N_L if
// none is and options.allow_mc).
ZeroBracket pressure_zero(const NeckCodeTree& t, std::size_t max_neck_index, double tol,
                          const PressureOptions& options = {});

// Zero of log S(k, ·) for a prepared level.
ZeroBracket pressure_zero(const LevelSample& level, int dim, double tol);

}  // namespace affcode
