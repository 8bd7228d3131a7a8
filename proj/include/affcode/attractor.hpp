#pragma once

// Translation schemes, truncated attractor point clouds and box counting.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "affcode/codetree.hpp"
#include "affcode/pressure.hpp"

namespace affcode {

// classes[λ][i] is the class of the map (λ, i); translations[c] is the shared
// translation of class c.
struct TranslationScheme {
  std::vector<std::vector<int>> classes;
  std::vector<Vector> translations;

  std::size_t class_count() const { return translations.size(); }
  // Throws SchemeError if two maps of one system share a class or an id is
  // out of range.
  void validate(const IfsFamily& family) const;
};

// Every (λ, i) its own class.
std::vector<std::vector<int>> finest_classes(const IfsFamily& family);
// Number of distinct ids in a class map (ids must be 0..A-1).
std::size_t class_count(const std::vector<std::vector<int>>& classes);

// Translations uniform on the cube center ± halfwidth in every coordinate.
TranslationScheme sample_translations(const IfsFamily& family,
                                      std::vector<std::vector<int>> classes,
                                      double box_halfwidth, std::uint64_t seed,
                                      double center = 0.0);

// Copy of the family with translations replaced; trans_bound is raised to
// cover the new translations if needed.
IfsFamily apply_scheme(const IfsFamily& family, const TranslationScheme& scheme);

struct PointCloud {
  int dim = 0;
  std::vector<Vector> points;
  int depth = 0;
  // σ̄^k·trans_bound/(1 - σ̄): distance bound to the attractor.
  double error_radius = 0.0;
  bool sampled = false;
};

// f_i(0) for all words of length k when there are at most max_points of them,
// otherwise for max_points uniform-descent paths.
PointCloud generate_points(const NeckCodeTree& t, int k, std::size_t max_points,
                           std::uint64_t seed);
// Same over the tree's family with a translation scheme applied.
PointCloud generate_points(const NeckCodeTree& t, const TranslationScheme& scheme, int k,
                           std::size_t max_points, std::uint64_t seed);

struct BoxCountResult {
  std::vector<double> scales;  // decreasing
  std::vector<std::size_t> counts;
  double slope = 0.0;
  double r2 = 0.0;
};

// Occupied-box counts on an axis-aligned grid anchored at the cloud's lower
// bounding-box corner, at n_scales geometric scales from scale_hi down to
// scale_lo, and the least-squares slope of log count against log(1/scale).
BoxCountResult box_dimension(const PointCloud& cloud, double scale_hi, double scale_lo,
                             int n_scales);

// Occupied boxes at one scale.
std::size_t box_count(const PointCloud& cloud, double scale);

struct ExperimentSettings {
  std::size_t blocks = 40;
  std::size_t necks = 12;           // L for the pressure zero
  std::size_t affinity_necks = 12;  // D for both affinity windows
  int depth = 12;                   // attractor truncation depth
  std::size_t max_points = 1000000;
  double tol = 1e-10;
  double affinity_tol = 1e-6;
  PressureOptions pressure;
  std::vector<std::vector<int>> classes;  // empty: finest
  double halfwidth = 1.0;
  double center = 0.0;
  // Box scales as fractions of the cloud's largest bounding-box side.
  double scale_hi = 0.1;
  double scale_lo = 0.003;
  int n_scales = 8;
};

struct ExperimentRow {
  std::uint64_t seed = 0;
  double s0_hat = 0.0;
  double alpha_hat = 0.0;
  double alpha_neck_hat = 0.0;
  double boxdim_hat = 0.0;
  double box_r2 = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  ExperimentRow mean;
  ExperimentRow stddev;  // sample standard deviation, 0 for one row
  double predicted = 0.0;  // min{mean s0_hat, d}
  std::vector<std::string> warnings;
  std::string caveat;
};

// Per seed: samples a tree (unless the measure has a single template) and a
// translation scheme, then computes the pressure zero, both affinity
// estimates and the box dimension of the truncated attractor.
ExperimentReport dimension_experiment(const BlockMeasure& mu, const ExperimentSettings& settings,
                                      const std::vector<std::uint64_t>& seeds);

void write_points_csv(std::ostream& out, const PointCloud& cloud);
void write_box_counts_csv(std::ostream& out, const BoxCountResult& result);

}  // namespace affcode
