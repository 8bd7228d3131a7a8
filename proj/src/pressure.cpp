#include "affcode/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affcode/logsumexp.hpp"
#include "affcode/random.hpp"
#include "affcode/svf.hpp"

namespace affcode {

namespace {

void check_level(const NeckCodeTree& t, int k) {
  if (k < 0 || k > t.total_depth()) {
    throw DepthError("level " + std::to_string(k) + " outside materialized depth " +
                     std::to_string(t.total_depth()));
  }
}

void check_feasible(const NeckCodeTree& t, int k, std::uint64_t word_cap) {
  const auto count = word_count(t, k);
  if (count > word_cap) {
    throw InfeasibleError("level " + std::to_string(k) + " has " + std::to_string(count) +
                          " words, above the cap of " + std::to_string(word_cap) +
                          "; use the Monte Carlo estimator or a shallower level");
  }
}

struct SampledPath {
  LogSpectrum spectrum;
  double log_branch_product = 0.0;
};

SampledPath descend(const NeckCodeTree& t, int k, Rng& rng) {
  ScaledProduct product(t.dim());
  SampledPath out;
  auto pos = t.root();
  for (int step = 0; step < k; ++step) {
    const int m = t.branching(pos);
    const int i = rng.below(m);
    out.log_branch_product += std::log(static_cast<double>(m));
    product.right_multiply(t.edge_map(pos, i).linear, t.edge_log_det(pos, i));
    pos = t.child(pos, i);
  }
  out.spectrum = product.log_spectrum();
  return out;
}

}  // namespace

double partition_sum(const NeckCodeTree& t, int k, double s, std::uint64_t word_cap) {
  check_level(t, k);
  check_feasible(t, k, word_cap);
  if (s < 0.0) throw DomainError("s must be non-negative");
  LogSumExp acc;
  for_each_word(t, k, [&](const WordVisit& w) { acc.add(log_phi(w.linear.log_spectrum(), s)); });
  return acc.value();
}

McEstimate partition_sum_mc(const NeckCodeTree& t, int k, double s, std::size_t n_samples,
                            std::uint64_t seed) {
  check_level(t, k);
  if (n_samples < 1) throw ArgumentError("need at least one sample");
  if (s < 0.0) throw DomainError("s must be non-negative");
  return LevelSample::sampled(t, k, n_samples, seed).estimate(s);
}

double mc_path_log_weight(const NeckCodeTree& t, std::span<const int> word, double s) {
  double log_branch = 0.0;
  auto pos = t.root();
  for (int sym : word) {
    log_branch += std::log(static_cast<double>(t.branching(pos)));
    pos = t.child(pos, sym);
  }
  return log_branch + log_phi(product_along(t, word).linear.log_spectrum(), s);
}

double mc_path_log_probability(const NeckCodeTree& t, std::span<const int> word) {
  double lp = 0.0;
  auto pos = t.root();
  for (int sym : word) {
    const int m = t.branching(pos);
    if (sym < 0 || sym >= m) throw ArgumentError("word is not in the tree");
    lp -= std::log(static_cast<double>(m));
    pos = t.child(pos, sym);
  }
  return lp;
}

LevelSample LevelSample::exact(const NeckCodeTree& t, int k, std::uint64_t word_cap) {
  check_level(t, k);
  check_feasible(t, k, word_cap);
  LevelSample out(t.dim(), k, true);
  const auto count = word_count(t, k);
  out.log_spectra_.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(t.dim()));
  out.log_weights_.reserve(static_cast<std::size_t>(count));
  for_each_word(t, k, [&](const WordVisit& w) {
    const auto spec = w.linear.log_spectrum();
    out.log_spectra_.insert(out.log_spectra_.end(), spec.values.begin(),
                            spec.values.begin() + t.dim());
    out.log_weights_.push_back(0.0);
  });
  return out;
}

LevelSample LevelSample::sampled(const NeckCodeTree& t, int k, std::size_t n_samples,
                                 std::uint64_t seed) {
  check_level(t, k);
  if (n_samples < 1) throw ArgumentError("need at least one sample");
  LevelSample out(t.dim(), k, false);
  out.log_spectra_.reserve(n_samples * static_cast<std::size_t>(t.dim()));
  out.log_weights_.reserve(n_samples);
  Rng rng(seed);
  for (std::size_t j = 0; j < n_samples; ++j) {
    const auto path = descend(t, k, rng);
    out.log_spectra_.insert(out.log_spectra_.end(), path.spectrum.values.begin(),
                            path.spectrum.values.begin() + t.dim());
    out.log_weights_.push_back(path.log_branch_product);
  }
  return out;
}

double LevelSample::entry_log_phi(std::size_t i, double s) const {
  LogSpectrum spec;
  spec.dim = dim_;
  std::copy_n(log_spectra_.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(dim_)),
              dim_, spec.values.begin());
  return log_phi(spec, s);
}

double LevelSample::log_sum(double s) const {
  LogSumExp acc;
  for (std::size_t i = 0; i < size(); ++i) acc.add(log_weights_[i] + entry_log_phi(i, s));
  if (exact_) return acc.value();
  return acc.value() - std::log(static_cast<double>(size()));
}

McEstimate LevelSample::estimate(double s) const {
  if (exact_) return McEstimate{log_sum(s), 0.0};
  const std::size_t n = size();
  std::vector<double> lw(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lw[i] = log_weights_[i] + entry_log_phi(i, s);
    top = std::max(top, lw[i]);
  }
  // Work with w_i / exp(top) to keep the moments in range.
  double mean = 0.0;
  for (double x : lw) mean += std::exp(x - top);
  mean /= static_cast<double>(n);
  double var = 0.0;
  if (n > 1) {
    for (double x : lw) {
      const double dev = std::exp(x - top) - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(n - 1);
  }
  const double se = std::sqrt(var / static_cast<double>(n));
  return McEstimate{top + std::log(mean), se / mean};
}

std::vector<PressureEstimate> pressure_curve(const NeckCodeTree& t, double s,
                                             std::size_t max_neck_index,
                                             const PressureOptions& options) {
  if (max_neck_index < 1 || max_neck_index > t.block_count()) {
    throw DepthError("neck index " + std::to_string(max_neck_index) + " outside 1.." +
                     std::to_string(t.block_count()));
  }
  std::vector<PressureEstimate> out;
  for (std::size_t m = 1; m <= max_neck_index; ++m) {
    const int level = t.neck(m);
    PressureEstimate e;
    e.level = level;
    e.s = s;
    if (word_count(t, level) <= options.word_cap) {
      e.log_sum = partition_sum(t, level, s, options.word_cap);
    } else if (options.allow_mc) {
      const auto mc = partition_sum_mc(t, level, s, options.mc_samples,
                                       derive_seed(options.seed, m));
      e.log_sum = mc.log_sum;
      e.mc_stderr = mc.stderr_log;
    } else {
      check_feasible(t, level, options.word_cap);
    }
    e.value = e.log_sum / static_cast<double>(level);
    out.push_back(e);
  }
  return out;
}

ZeroBracket pressure_zero(const LevelSample& level, int dim, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  ZeroBracket z;
  z.level = level.level();
  z.exact = level.is_exact();
  auto f = [&](double s) { return level.log_sum(s); };
  if (level.level() == 0 || !(f(0.0) > 0.0)) {
    z.degenerate = true;
    return z;
  }
  double lo = 0.0;
  double hi = static_cast<double>(dim) + 2.0;
  const double ceiling = std::max(2.0 * dim, dim + 2.0);
  while (f(hi) > 0.0) {
    if (hi >= ceiling) {
      throw DomainError("pressure estimate stays positive up to s = " + std::to_string(ceiling));
    }
    lo = hi;
    hi = std::min(2.0 * hi, ceiling);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  z.lo = lo;
  z.hi = hi;
  z.s0_hat = 0.5 * (lo + hi);
  return z;
}

ZeroBracket pressure_zero(const NeckCodeTree& t, std::size_t max_neck_index, double tol,
                          const PressureOptions& options) {
  if (max_neck_index < 1 || max_neck_index > t.block_count()) {
    throw DepthError("neck index " + std::to_string(max_neck_index) + " outside 1.." +
                     std::to_string(t.block_count()));
  }
  std::size_t j = max_neck_index;
  while (j >= 1 && word_count(t, t.neck(j)) > options.word_cap) --j;
  ZeroBracket z;
  if (j >= 1) {
    z = pressure_zero(LevelSample::exact(t, t.neck(j), options.word_cap), t.dim(), tol);
  } else if (options.allow_mc) {
    j = max_neck_index;
    z = pressure_zero(LevelSample::sampled(t, t.neck(j), options.mc_samples, options.seed),
                      t.dim(), tol);
  } else {
    check_feasible(t, t.neck(1), options.word_cap);
  }
  z.neck_index = j;
  return z;
}

}  // namespace affcode
