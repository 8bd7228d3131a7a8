#include "affcode/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "affcode/netmeasure.hpp"
#include "affcode/random.hpp"

namespace affcode {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void TranslationScheme::validate(const IfsFamily& family) const {
  if (classes.size() != static_cast<std::size_t>(family.label_count())) {
    throw SchemeError("class map needs one row per label");
  }
  const auto n = static_cast<int>(translations.size());
  for (int label = 0; label < family.label_count(); ++label) {
    const auto& row = classes[static_cast<std::size_t>(label)];
    if (row.size() != static_cast<std::size_t>(family.branching(label))) {
      throw SchemeError("class row for label " + std::to_string(label) +
                        " must have one entry per map");
    }
    std::set<int> seen;
    for (int c : row) {
      if (c < 0 || c >= n) throw SchemeError("class id " + std::to_string(c) + " out of range");
      if (!seen.insert(c).second) {
        throw SchemeError("maps of label " + std::to_string(label) +
                          " share class " + std::to_string(c));
      }
    }
  }
  for (const auto& a : translations) {
    if (a.dim() != family.dim) throw SchemeError("translation has the wrong dimension");
  }
}

std::vector<std::vector<int>> finest_classes(const IfsFamily& family) {
  std::vector<std::vector<int>> out;
  int next = 0;
  for (int label = 0; label < family.label_count(); ++label) {
    auto& row = out.emplace_back();
    for (int i = 0; i < family.branching(label); ++i) row.push_back(next++);
  }
  return out;
}

std::size_t class_count(const std::vector<std::vector<int>>& classes) {
  std::set<int> ids;
  for (const auto& row : classes) ids.insert(row.begin(), row.end());
  if (!ids.empty() && (*ids.begin() != 0 || *ids.rbegin() != static_cast<int>(ids.size()) - 1)) {
    throw SchemeError("class ids must be exactly 0..A-1");
  }
  return ids.size();
}

TranslationScheme sample_translations(const IfsFamily& family,
                                      std::vector<std::vector<int>> classes,
                                      double box_halfwidth, std::uint64_t seed, double center) {
  if (!(box_halfwidth >= 0.0)) throw SchemeError("half-width must be non-negative");
  TranslationScheme scheme;
  scheme.classes = std::move(classes);
  const std::size_t n = class_count(scheme.classes);
  Rng rng(seed);
  for (std::size_t c = 0; c < n; ++c) {
    Vector a(family.dim);
    for (int j = 0; j < family.dim; ++j) {
      a[j] = center + box_halfwidth * (2.0 * rng.uniform() - 1.0);
    }
    scheme.translations.push_back(a);
  }
  scheme.validate(family);
  return scheme;
}

IfsFamily apply_scheme(const IfsFamily& family, const TranslationScheme& scheme) {
  scheme.validate(family);
  IfsFamily out = family;
  for (int label = 0; label < out.label_count(); ++label) {
    auto& sys = out.systems[static_cast<std::size_t>(label)];
    for (std::size_t i = 0; i < sys.maps.size(); ++i) {
      const int c = scheme.classes[static_cast<std::size_t>(label)][i];
      sys.maps[i].translation = scheme.translations[static_cast<std::size_t>(c)];
      out.trans_bound = std::max(out.trans_bound, sys.maps[i].translation.norm());
    }
  }
  return out;
}

PointCloud generate_points(const NeckCodeTree& t, int k, std::size_t max_points,
                           std::uint64_t seed) {
  if (k < 0 || k > t.total_depth()) {
    throw DepthError("attractor depth " + std::to_string(k) + " outside materialized depth " +
                     std::to_string(t.total_depth()));
  }
  if (max_points < 1) throw ArgumentError("need at least one point");
  const auto& f = t.family();
  PointCloud cloud;
  cloud.dim = t.dim();
  cloud.depth = k;
  cloud.error_radius = std::pow(f.sigma_hi, k) * f.trans_bound / (1.0 - f.sigma_hi);
  if (word_count(t, k) <= max_points) {
    cloud.points.reserve(static_cast<std::size_t>(word_count(t, k)));
    for_each_word(t, k, [&](const WordVisit& w) { cloud.points.push_back(w.origin_image); });
    return cloud;
  }
  cloud.sampled = true;
  cloud.points.reserve(max_points);
  Rng rng(seed);
  for (std::size_t j = 0; j < max_points; ++j) {
    Matrix linear = Matrix::identity(t.dim());
    Vector origin(t.dim());
    auto pos = t.root();
    for (int step = 0; step < k; ++step) {
      const int i = rng.below(t.branching(pos));
      const AffineMap& m = t.edge_map(pos, i);
      origin += linear * m.translation;
      linear = linear * m.linear;
      pos = t.child(pos, i);
    }
    cloud.points.push_back(origin);
  }
  return cloud;
}

PointCloud generate_points(const NeckCodeTree& t, const TranslationScheme& scheme, int k,
                           std::size_t max_points, std::uint64_t seed) {
  auto family = std::make_shared<const IfsFamily>(apply_scheme(t.family(), scheme));
  return generate_points(t.with_family(family), k, max_points, seed);
}

std::size_t box_count(const PointCloud& cloud, double scale) {
  if (!(scale > 0.0)) throw ResolutionError("box scale must be positive");
  if (cloud.points.empty()) return 0;
  const int d = cloud.dim;
  std::array<double, kMaxDim> lower{};
  lower.fill(std::numeric_limits<double>::infinity());
  for (const auto& p : cloud.points) {
    for (int j = 0; j < d; ++j) lower[static_cast<std::size_t>(j)] = std::min(lower[static_cast<std::size_t>(j)], p[j]);
  }
  std::vector<std::array<std::int64_t, kMaxDim>> keys;
  keys.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    std::array<std::int64_t, kMaxDim> key{};
    for (int j = 0; j < d; ++j) {
      key[static_cast<std::size_t>(j)] =
          static_cast<std::int64_t>(std::floor((p[j] - lower[static_cast<std::size_t>(j)]) / scale));
    }
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

BoxCountResult box_dimension(const PointCloud& cloud, double scale_hi, double scale_lo,
                             int n_scales) {
  if (n_scales < 3) throw ResolutionError("box counting needs at least 3 scales");
  if (!(scale_lo > 0.0 && scale_hi > scale_lo)) {
    throw ResolutionError("box scales need 0 < scale_lo < scale_hi");
  }
  if (scale_lo < 2.0 * cloud.error_radius) {
    throw ResolutionError("smallest scale " + format_double(scale_lo) +
                          " is below twice the truncation error " +
                          format_double(cloud.error_radius));
  }
  BoxCountResult r;
  const double ratio = std::log(scale_lo / scale_hi);
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < n_scales; ++i) {
    const double scale = scale_hi * std::exp(ratio * i / (n_scales - 1));
    const std::size_t count = box_count(cloud, scale);
    r.scales.push_back(scale);
    r.counts.push_back(count);
    x.push_back(-std::log(scale));
    y.push_back(std::log(static_cast<double>(std::max<std::size_t>(count, 1))));
  }
  const double n = static_cast<double>(n_scales);
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < n_scales; ++i) {
    mx += x[static_cast<std::size_t>(i)];
    my += y[static_cast<std::size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (int i = 0; i < n_scales; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    const double dy = y[static_cast<std::size_t>(i)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  r.slope = sxy / sxx;
  r.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return r;
}

namespace {

struct TreeEstimates {
  double s0 = 0.0;
  double alpha = 0.0;
  double alpha_neck = 0.0;
};

TreeEstimates tree_estimates(const NeckCodeTree& t, const ExperimentSettings& st,
                             std::uint64_t mc_seed) {
  PressureOptions po = st.pressure;
  po.seed = mc_seed;
  TreeEstimates e;
  e.s0 = pressure_zero(t, st.necks, st.tol, po).s0_hat;
  e.alpha = affinity_dim(t, st.affinity_necks, st.affinity_tol, false).estimate();
  e.alpha_neck = affinity_dim(t, st.affinity_necks, st.affinity_tol, true).estimate();
  return e;
}

double cloud_extent(const PointCloud& cloud) {
  double extent = 0.0;
  for (int j = 0; j < cloud.dim; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : cloud.points) {
      lo = std::min(lo, p[j]);
      hi = std::max(hi, p[j]);
    }
    extent = std::max(extent, hi - lo);
  }
  return extent;
}

void summarize(ExperimentReport& r) {
  const double n = static_cast<double>(r.rows.size());
  auto field = [&](auto member) {
    double mean = 0.0;
    for (const auto& row : r.rows) mean += row.*member;
    mean /= n;
    double ss = 0.0;
    for (const auto& row : r.rows) ss += (row.*member - mean) * (row.*member - mean);
    r.mean.*member = mean;
    r.stddev.*member = r.rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  };
  field(&ExperimentRow::s0_hat);
  field(&ExperimentRow::alpha_hat);
  field(&ExperimentRow::alpha_neck_hat);
  field(&ExperimentRow::boxdim_hat);
  field(&ExperimentRow::box_r2);
}

}  // namespace

ExperimentReport dimension_experiment(const BlockMeasure& mu, const ExperimentSettings& st,
                                      const std::vector<std::uint64_t>& seeds) {
  mu.validate();
  if (seeds.empty()) throw ArgumentError("experiment needs at least one seed");
  const IfsFamily& family = *mu.family;
  ExperimentReport report;
  if (family.sigma_hi >= 0.5) {
    report.warnings.push_back("sigma_hi = " + format_double(family.sigma_hi) +
                              " is not below 1/2; the dimension formula is not guaranteed");
  }
  report.caveat =
      "dimension equalities hold almost surely in the tree and the translations; "
      "single-seed deviations are expected";
  auto classes = st.classes.empty() ? finest_classes(family) : st.classes;
  const bool fixed_tree = mu.templates.size() == 1;
  TreeEstimates fixed;
  bool have_fixed = false;
  for (std::uint64_t seed : seeds) {
    const NeckCodeTree t = sample_tree(mu, st.blocks, derive_seed(seed, 0));
    if (!fixed_tree || !have_fixed) {
      fixed = tree_estimates(t, st, derive_seed(seed, 3));
      have_fixed = true;
    }
    report.rows.push_back(
        ExperimentRow{seed, fixed.s0, fixed.alpha, fixed.alpha_neck, 0.0, 0.0});
    const auto scheme =
        sample_translations(family, classes, st.halfwidth, derive_seed(seed, 1), st.center);
    const auto cloud =
        generate_points(t, scheme, st.depth, st.max_points, derive_seed(seed, 2));
    const double extent = cloud_extent(cloud);
    auto& row = report.rows.back();
    if (extent > 0.0) {
      const auto box = box_dimension(cloud, st.scale_hi * extent, st.scale_lo * extent,
                                     st.n_scales);
      row.boxdim_hat = box.slope;
      row.box_r2 = box.r2;
    } else {
      row.box_r2 = 1.0;
    }
  }
  summarize(report);
  report.predicted = std::min(report.mean.s0_hat, static_cast<double>(family.dim));
  return report;
}

void write_points_csv(std::ostream& out, const PointCloud& cloud) {
  for (int j = 0; j < cloud.dim; ++j) out << (j ? "," : "") << 'x' << (j + 1);
  out << '\n';
  for (const auto& p : cloud.points) {
    for (int j = 0; j < cloud.dim; ++j) out << (j ? "," : "") << format_double(p[j]);
    out << '\n';
  }
}

void write_box_counts_csv(std::ostream& out, const BoxCountResult& result) {
  out << "scale,count\n";
  for (std::size_t i = 0; i < result.scales.size(); ++i) {
    out << format_double(result.scales[i]) << ',' << result.counts[i] << '\n';
  }
}

}  // namespace affcode
