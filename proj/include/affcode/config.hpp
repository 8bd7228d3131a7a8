#pragma once

// Experiment configuration files (JSON).  See README for the schema.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "affcode/attractor.hpp"
#include "affcode/codetree.hpp"
#include "affcode/family.hpp"
#include "affcode/pressure.hpp"

namespace affcode {

struct RunParams {
  std::size_t blocks = 40;
  std::size_t necks = 12;   // L
  std::size_t window = 2;   // R
  std::size_t affinity_necks = 12;  // D
  int depth = 12;
  std::size_t max_points = 1000000;
  std::vector<double> s = {0.5, 1.0, 1.5};
  double tol = 1e-10;
  double affinity_tol = 1e-6;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::uint64_t word_cap = kDefaultWordCap;
  std::size_t mc_samples = 100000;
  double scale_hi = 0.1;
  double scale_lo = 0.003;
  int n_scales = 8;
};

struct ExperimentConfig {
  std::string source;
  std::string hash;  // FNV-1a of the file bytes, 16 hex digits
  std::shared_ptr<const IfsFamily> family;
  BlockMeasure measure;
  std::vector<std::vector<int>> classes;  // empty: finest
  double halfwidth = 1.0;
  double center = 0.0;
  RunParams params;

  int dim() const { return family->dim; }
  std::size_t map_count() const;
  PressureOptions pressure_options() const;
  ExperimentSettings experiment_settings() const;
};

// One line per problem: "<field>: <message>" or "line L, column C: <message>".
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Throws ConfigValidationError listing every problem found, or ConfigError
// when the file cannot be read.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<text>");

std::string fnv1a_hex(const std::string& bytes);

}  // namespace affcode
