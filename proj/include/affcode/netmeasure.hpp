#pragma once

// Optimal antichain covers for the Φ^s-weighted net measures, the neck-only
// variant, and finite-depth affinity dimension estimates.

#include <cstdint>
#include <optional>
#include <vector>

#include "affcode/codetree.hpp"

namespace affcode {

// Depth window of admissible cover nodes.  With neck_only the bounds are neck
// indices (admissible depths N_min..N_max); otherwise they are depths.
struct CoverWindow {
  int min_index = 1;
  int max_index = 1;
  bool neck_only = false;
};

struct CoverSolution {
  std::vector<WordPath> nodes;  // antichain, lexicographic
  double log_cost = 0.0;
  double cost = 0.0;
  CoverWindow constraint;
};

struct DimensionEstimate {
  double s_lo = 0.0;
  double s_hi = 0.0;
  std::size_t neck_index = 0;  // D, in necks
  int depth_used = 0;          // N_D, in levels
  double threshold = 1.0;
  bool crossed = true;  // false when the bracket sits at a boundary of [0, 2d]
  bool neck_only = false;
  double estimate() const { return 0.5 * (s_lo + s_hi); }
};

// The tree restricted to the admissible depths of a window, with the
// log-spectrum of every node, so that the cover DP can be rerun for many s.
class CoverTree {
 public:
  static constexpr std::size_t kDefaultNodeCap = std::size_t{1} << 23;

  CoverTree(const NeckCodeTree& t, CoverWindow window,
            std::size_t node_cap = kDefaultNodeCap);

  const CoverWindow& window() const { return window_; }
  // Depths of the stored levels; the first is the root (depth 0).
  std::vector<int> depths() const;
  std::size_t node_count() const;

  // min over antichain covers within the window of log Σ Φ^s.
  double best_log_cost(double s) const;
  CoverSolution best_cover(double s) const;

 private:
  struct Level {
    int depth = 0;
    bool admissible = false;
    std::size_t size = 0;
    std::vector<double> log_spectra;           // size * dim
    std::vector<std::uint32_t> child_begin;    // size + 1 offsets into the next level
    std::vector<std::uint16_t> segment;        // size * (depth - parent depth)
  };
  // Per-level DP arrays: (take, best) per node.
  std::vector<std::vector<double>> solve(double s) const;
  double node_log_phi(const Level& level, std::size_t i, double s) const;

  int dim_ = 0;
  CoverWindow window_;
  std::vector<Level> levels_;
};

// Exact minimum of Σ Φ^s over antichain covers within [j, D] (see
// CoverWindow).  Nodes at the bottom of the window are forced.
CoverSolution best_cover(const NeckCodeTree& t, double s, int j, int max_depth, bool neck_only);

// min over neck-level covers from necks 1..n.
double f_n(const NeckCodeTree& t, double s, std::size_t n);

// The neck-level cover with cost < 1 from necks 1..R, if one exists.
std::optional<CoverSolution> witness_c_r(const NeckCodeTree& t, double s, std::size_t R);

// Bisection in s ∈ [0, 2d] for the crossing of best cover cost = 1 over the
// window [1, D] (D in necks; unrestricted covers use depths 1..N_D).
DimensionEstimate affinity_dim(const NeckCodeTree& t, std::size_t D, double tol,
                               bool neck_only, std::size_t node_cap = CoverTree::kDefaultNodeCap);

struct SandwichReport {
  double log_lower = 0.0;  // s·N_1·log σ̲ + log V_shift
  double log_value = 0.0;  // log V
  double log_upper = 0.0;  // N_1·(log M + s·log σ̄) + log V_shift
  double log_shift_value = 0.0;
  bool ok = false;
};

// Checks σ̲^{sN_1} V_shift <= V <= (M σ̄^s)^{N_1} V_shift for
// V = best cover of t on depths [N_1 + n, D] and V_shift = best cover of the
// shifted tree on [n, D - N_1].
SandwichReport sandwich_check(const NeckCodeTree& t, double s, int n, int D);

}  // namespace affcode
