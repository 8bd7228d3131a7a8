#include "affcode/family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "affcode/errors.hpp"
#include "affcode/svf.hpp"

namespace affcode {

int IfsFamily::branching(int label) const {
  if (label < 0 || label >= label_count()) {
    throw ArgumentError("unknown label " + std::to_string(label));
  }
  return static_cast<int>(systems[static_cast<std::size_t>(label)].maps.size());
}

const AffineMap& IfsFamily::map(int label, int index) const {
  const int m = branching(label);
  if (index < 0 || index >= m) {
    throw ArgumentError("map index " + std::to_string(index) + " out of range for label " +
                        std::to_string(label));
  }
  return systems[static_cast<std::size_t>(label)].maps[static_cast<std::size_t>(index)];
}

IfsFamily IfsFamily::with_tight_bounds(int dim, std::vector<IfsSystem> systems) {
  IfsFamily f;
  f.dim = dim;
  f.systems = std::move(systems);
  f.sigma_lo = 1.0;
  f.sigma_hi = 0.0;
  for (const auto& sys : f.systems) {
    f.max_branch = std::max(f.max_branch, static_cast<int>(sys.maps.size()));
    for (const auto& m : sys.maps) {
      const auto spec = singular_values(m.linear);
      f.sigma_lo = std::min(f.sigma_lo, spec.smallest());
      f.sigma_hi = std::max(f.sigma_hi, spec.largest());
      f.trans_bound = std::max(f.trans_bound, m.translation.norm());
    }
  }
  return f;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    if (v.label >= 0) {
      out << "label " << v.label;
      if (v.index >= 0) out << " map " << v.index;
      out << ": ";
    }
    out << v.what << '\n';
  }
  return out.str();
}

ValidationReport validate_family(const IfsFamily& f) {
  ValidationReport report;
  auto add = [&](int label, int index, std::string what) {
    report.violations.push_back({label, index, std::move(what)});
  };
  if (f.dim < 1 || f.dim > kMaxDim) {
    add(-1, -1, "dimension must lie in 1.." + std::to_string(kMaxDim));
    return report;
  }
  if (f.systems.empty()) add(-1, -1, "family has no systems");
  if (!(f.sigma_lo > 0.0 && f.sigma_lo < 1.0)) add(-1, -1, "sigma_lo must lie in (0,1)");
  if (!(f.sigma_hi > 0.0 && f.sigma_hi < 1.0)) add(-1, -1, "sigma_hi must lie in (0,1)");
  if (f.sigma_lo > f.sigma_hi) add(-1, -1, "sigma_lo exceeds sigma_hi");
  if (!(f.trans_bound >= 0.0) || !std::isfinite(f.trans_bound)) {
    add(-1, -1, "trans_bound must be finite and non-negative");
  }
  if (f.max_branch < 1) add(-1, -1, "max_branch must be at least 1");

  const double rel = Tolerances::kIdentityRel;
  for (int label = 0; label < f.label_count(); ++label) {
    const auto& sys = f.systems[static_cast<std::size_t>(label)];
    const int count = static_cast<int>(sys.maps.size());
    if (count < 1) add(label, -1, "system has no maps");
    if (count > f.max_branch) {
      add(label, -1,
          "system has " + std::to_string(count) + " maps, exceeding M = " +
              std::to_string(f.max_branch));
    }
    for (int i = 0; i < count; ++i) {
      const auto& m = sys.maps[static_cast<std::size_t>(i)];
      if (m.linear.dim() != f.dim || m.translation.dim() != f.dim) {
        add(label, i, "map dimension differs from family dimension");
        continue;
      }
      if (!m.linear.all_finite() || !(std::abs(m.linear.determinant()) > Tolerances::kSingularDet)) {
        add(label, i, "linear part is not a non-singular linear mapping");
        continue;
      }
      const auto spec = singular_values(m.linear);
      if (spec.largest() > f.sigma_hi * (1.0 + rel)) {
        std::ostringstream msg;
        msg << "largest singular value " << spec.largest() << " exceeds sigma_hi "
            << f.sigma_hi;
        add(label, i, msg.str());
      }
      if (spec.smallest() < f.sigma_lo * (1.0 - rel)) {
        std::ostringstream msg;
        msg << "smallest singular value " << spec.smallest() << " is below sigma_lo "
            << f.sigma_lo;
        add(label, i, msg.str());
      }
      const double tn = m.translation.norm();
      if (!std::isfinite(tn) || tn > f.trans_bound * (1.0 + rel)) {
        std::ostringstream msg;
        msg << "translation norm " << tn << " exceeds trans_bound " << f.trans_bound;
        add(label, i, msg.str());
      }
    }
  }
  return report;
}

}  // namespace affcode
