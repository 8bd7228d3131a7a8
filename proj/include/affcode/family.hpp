#pragma once

#include <string>
#include <vector>

#include "affcode/linalg.hpp"

namespace affcode {

// One iterated function system F^λ = {f_1, …, f_{M_λ}}.
struct IfsSystem {
  std::string name;
  std::vector<AffineMap> maps;
};

// A finite labeled family of systems together with the global bounds
//   M = max |F^λ|,  sigma_lo <= σ_d(T) <= σ_1(T) <= sigma_hi,  |a| <= trans_bound.
// Labels are dense indices into `systems`.
struct IfsFamily {
  int dim = 0;
  std::vector<IfsSystem> systems;
  int max_branch = 0;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double trans_bound = 0.0;

  int label_count() const { return static_cast<int>(systems.size()); }
  int branching(int label) const;
  const AffineMap& map(int label, int index) const;

  // Bounds computed as the tightest values the maps admit.
  static IfsFamily with_tight_bounds(int dim, std::vector<IfsSystem> systems);
};

struct Violation {
  int label = -1;  // -1 for family-level problems
  int index = -1;  // -1 when the whole system is at fault
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks the three family bounds and basic well-formedness; never throws.
ValidationReport validate_family(const IfsFamily& family);

}  // namespace affcode
