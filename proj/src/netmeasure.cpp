#include "affcode/netmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affcode/logsumexp.hpp"
#include "affcode/svf.hpp"

namespace affcode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> admissible_depths(const NeckCodeTree& t, const CoverWindow& w) {
  if (w.min_index < 0 || w.min_index > w.max_index) {
    throw ArgumentError("cover window needs 0 <= j <= D");
  }
  std::vector<int> depths;
  if (w.neck_only) {
    if (static_cast<std::size_t>(w.max_index) > t.block_count()) {
      throw DepthError("neck index " + std::to_string(w.max_index) + " beyond " +
                       std::to_string(t.block_count()) + " blocks");
    }
    for (int m = w.min_index; m <= w.max_index; ++m) depths.push_back(t.neck(static_cast<std::size_t>(m)));
  } else {
    if (w.max_index > t.total_depth()) {
      throw DepthError("depth " + std::to_string(w.max_index) + " beyond materialized depth " +
                       std::to_string(t.total_depth()));
    }
    for (int k = w.min_index; k <= w.max_index; ++k) depths.push_back(k);
  }
  return depths;
}

}  // namespace

CoverTree::CoverTree(const NeckCodeTree& t, CoverWindow window, std::size_t node_cap)
    : dim_(t.dim()), window_(window) {
  const auto admissible = admissible_depths(t, window);
  // Root level first, then every admissible depth.
  levels_.push_back(Level{});
  levels_[0].admissible = !admissible.empty() && admissible.front() == 0;
  for (int d : admissible) {
    if (d == 0) continue;
    Level l;
    l.depth = d;
    l.admissible = true;
    levels_.push_back(std::move(l));
  }
  std::size_t total = 0;
  for (auto& l : levels_) {
    const auto count = word_count(t, l.depth);
    total += static_cast<std::size_t>(std::min<std::uint64_t>(count, node_cap + 1));
    if (count > node_cap || total > node_cap) {
      throw InfeasibleError("cover window needs more than " + std::to_string(node_cap) +
                            " nodes");
    }
    l.size = static_cast<std::size_t>(count);
    l.log_spectra.reserve(l.size * static_cast<std::size_t>(dim_));
    l.child_begin.assign(l.size + 1, 0);
  }
  for (std::size_t li = 1; li < levels_.size(); ++li) {
    const int gap = levels_[li].depth - levels_[li - 1].depth;
    levels_[li].segment.reserve(levels_[li].size * static_cast<std::size_t>(gap));
  }

  // Depth-first walk; nodes of a level appear in lexicographic order and the
  // children of consecutive parents are contiguous.
  std::vector<std::size_t> filled(levels_.size(), 0);
  std::vector<int> symbols;
  auto record = [&](std::size_t li, const ScaledProduct& p) {
    auto& l = levels_[li];
    const auto spec = p.log_spectrum();
    l.log_spectra.insert(l.log_spectra.end(), spec.values.begin(), spec.values.begin() + dim_);
    if (li > 0) {
      const int from = levels_[li - 1].depth;
      for (int k = from; k < l.depth; ++k) {
        l.segment.push_back(static_cast<std::uint16_t>(symbols[static_cast<std::size_t>(k)]));
      }
      // Parent is the most recently recorded node of the previous level.
      ++levels_[li - 1].child_begin[filled[li - 1] - 1];
    }
    ++filled[li];
  };
  auto walk = [&](auto& self, NeckCodeTree::Position pos, std::size_t next_level,
                  const ScaledProduct& p) -> void {
    const int depth = static_cast<int>(symbols.size());
    if (next_level < levels_.size() && levels_[next_level].depth == depth) {
      record(next_level, p);
      ++next_level;
    }
    if (next_level >= levels_.size()) return;
    const int m = t.branching(pos);
    for (int i = 0; i < m; ++i) {
      ScaledProduct q = p;
      q.right_multiply(t.edge_map(pos, i).linear, t.edge_log_det(pos, i));
      symbols.push_back(i);
      self(self, t.child(pos, i), next_level, q);
      symbols.pop_back();
    }
  };
  // The root is recorded as level 0 (depth 0).
  walk(walk, t.root(), 0, ScaledProduct(dim_));

  // Per-parent child counts -> offsets.
  for (auto& l : levels_) {
    std::uint32_t acc = 0;
    for (std::size_t i = 0; i < l.size; ++i) {
      const std::uint32_t c = l.child_begin[i];
      l.child_begin[i] = acc;
      acc += c;
    }
    l.child_begin[l.size] = acc;
  }
}

std::vector<int> CoverTree::depths() const {
  std::vector<int> out;
  for (const auto& l : levels_) out.push_back(l.depth);
  return out;
}

std::size_t CoverTree::node_count() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size;
  return n;
}

double CoverTree::node_log_phi(const Level& level, std::size_t i, double s) const {
  LogSpectrum spec;
  spec.dim = dim_;
  std::copy_n(level.log_spectra.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(dim_)),
              dim_, spec.values.begin());
  return log_phi(spec, s);
}

std::vector<std::vector<double>> CoverTree::solve(double s) const {
  std::vector<std::vector<double>> best(levels_.size());
  for (std::size_t li = levels_.size(); li-- > 0;) {
    const auto& l = levels_[li];
    auto& out = best[li];
    out.resize(l.size);
    const bool bottom = li + 1 == levels_.size();
    for (std::size_t i = 0; i < l.size; ++i) {
      const double take = l.admissible ? node_log_phi(l, i, s) : kInf;
      if (bottom) {
        out[i] = take;
        continue;
      }
      LogSumExp split;
      for (std::uint32_t c = l.child_begin[i]; c < l.child_begin[i + 1]; ++c) {
        split.add(best[li + 1][c]);
      }
      out[i] = std::min(take, split.value());
    }
  }
  return best;
}

double CoverTree::best_log_cost(double s) const {
  if (!(s >= 0.0)) throw DomainError("s must be non-negative");
  return solve(s)[0][0];
}

CoverSolution CoverTree::best_cover(double s) const {
  if (!(s >= 0.0)) throw DomainError("s must be non-negative");
  const auto best = solve(s);
  CoverSolution sol;
  sol.constraint = window_;
  sol.log_cost = best[0][0];
  sol.cost = std::exp(sol.log_cost);
  std::vector<int> word;
  auto emit = [&](auto& self, std::size_t li, std::size_t i) -> void {
    const auto& l = levels_[li];
    const bool bottom = li + 1 == levels_.size();
    // Ties go to taking the node.
    if (l.admissible && (bottom || node_log_phi(l, i, s) <= best[li][i])) {
      sol.nodes.push_back(word);
      return;
    }
    const auto& next = levels_[li + 1];
    const std::size_t gap = static_cast<std::size_t>(next.depth - l.depth);
    for (std::uint32_t c = l.child_begin[i]; c < l.child_begin[i + 1]; ++c) {
      for (std::size_t k = 0; k < gap; ++k) word.push_back(next.segment[c * gap + k]);
      self(self, li + 1, c);
      word.resize(word.size() - gap);
    }
  };
  emit(emit, 0, 0);
  return sol;
}

CoverSolution best_cover(const NeckCodeTree& t, double s, int j, int max_depth, bool neck_only) {
  return CoverTree(t, CoverWindow{j, max_depth, neck_only}).best_cover(s);
}

double f_n(const NeckCodeTree& t, double s, std::size_t n) {
  if (n == 0) throw ArgumentError("f_n needs n >= 1");
  return best_cover(t, s, 1, static_cast<int>(n), true).cost;
}

std::optional<CoverSolution> witness_c_r(const NeckCodeTree& t, double s, std::size_t R) {
  if (R == 0) throw ArgumentError("witness needs R >= 1");
  auto sol = best_cover(t, s, 1, static_cast<int>(R), true);
  if (sol.log_cost < 0.0) return sol;
  return std::nullopt;
}

DimensionEstimate affinity_dim(const NeckCodeTree& t, std::size_t D, double tol, bool neck_only,
                               std::size_t node_cap) {
  if (D < 1 || D > t.block_count()) {
    throw DepthError("neck index " + std::to_string(D) + " outside 1.." +
                     std::to_string(t.block_count()));
  }
  if (!(tol > 0.0)) throw ArgumentError("tolerance must be positive");
  const CoverWindow window = neck_only
                                 ? CoverWindow{1, static_cast<int>(D), true}
                                 : CoverWindow{1, t.neck(D), false};
  const CoverTree tree(t, window, node_cap);
  auto below_one = [&](double s) { return tree.best_log_cost(s) < 0.0; };

  DimensionEstimate e;
  e.neck_index = D;
  e.depth_used = t.neck(D);
  e.neck_only = neck_only;
  double lo = 0.0;
  double hi = 2.0 * t.dim();
  if (below_one(lo)) {
    e.crossed = false;
    return e;
  }
  if (!below_one(hi)) {
    e.s_lo = e.s_hi = hi;
    e.crossed = false;
    return e;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (below_one(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  e.s_lo = lo;
  e.s_hi = hi;
  return e;
}

SandwichReport sandwich_check(const NeckCodeTree& t, double s, int n, int D) {
  if (t.block_count() < 2) throw EmptyShiftError("sandwich check needs two blocks");
  const int n1 = t.neck(1);
  if (n < 0 || D < n1 + n) throw ArgumentError("sandwich check needs D >= N_1 + n");
  const auto shifted = shift(t);
  const double v = CoverTree(t, CoverWindow{n1 + n, D, false}).best_log_cost(s);
  const double v_shift = CoverTree(shifted, CoverWindow{n, D - n1, false}).best_log_cost(s);
  const auto& f = t.family();
  SandwichReport r;
  r.log_value = v;
  r.log_shift_value = v_shift;
  r.log_lower = s * n1 * std::log(f.sigma_lo) + v_shift;
  r.log_upper = n1 * (std::log(static_cast<double>(f.max_branch)) + s * std::log(f.sigma_hi)) +
                v_shift;
  const double slack = Tolerances::kInequalitySlack;
  r.ok = r.log_lower <= r.log_value + slack && r.log_value <= r.log_upper + slack;
  return r;
}

}  // namespace affcode
