#include "affcode/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "affcode/svf.hpp"

namespace affcode {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

std::optional<double> parse_decimal(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = text.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& what) {
    problems.push_back((path.empty() ? std::string("/") : path) + ": " + what);
  }

  // Numbers may be JSON numbers, decimal strings or "p/q" fractions.
  std::optional<double> number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const auto text = j.get<std::string>();
      const auto slash = text.find('/');
      if (slash == std::string::npos) {
        if (auto v = parse_decimal(text); v && std::isfinite(*v)) return v;
      } else {
        const auto p = parse_decimal(std::string_view(text).substr(0, slash));
        const auto q = parse_decimal(std::string_view(text).substr(slash + 1));
        if (p && q && *q != 0.0 && std::isfinite(*p / *q)) return *p / *q;
      }
    }
    fail(path, "malformed number");
    return std::nullopt;
  }

  std::optional<std::uint64_t> unsigned_int(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
      fail(path, "must be non-negative");
      return std::nullopt;
    }
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (v >= 0.0 && v < 0x1.0p64 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
    }
    if (j.is_string()) {
      const auto text = j.get<std::string>();
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return v;
    }
    fail(path, "expected a non-negative integer");
    return std::nullopt;
  }

  const json* child(const json& j, const std::string& key, const std::string& path,
                    bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "/" + key, "missing field");
      return nullptr;
    }
    return &*it;
  }

  bool expect_array(const json& j, const std::string& path) {
    if (!j.is_array()) {
      fail(path, "expected an array");
      return false;
    }
    return true;
  }

  bool expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    return true;
  }

  void unknown_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::none_of(known.begin(), known.end(),
                       [&](const char* k) { return it.key() == k; })) {
        fail(path + "/" + it.key(), "unknown field");
      }
    }
  }
};

std::optional<Matrix> read_matrix(Reader& r, const json& j, int dim, const std::string& path) {
  std::vector<double> entries;
  bool ok = true;
  if (j.is_number() || j.is_string()) {
    if (dim != 1) {
      r.fail(path, "a scalar linear part requires dim = 1");
      return std::nullopt;
    }
    auto v = r.number(j, path);
    if (!v) return std::nullopt;
    entries.push_back(*v);
  } else if (j.is_array() && !j.empty() && j.front().is_array()) {
    if (j.size() != static_cast<std::size_t>(dim)) {
      r.fail(path, "expected " + std::to_string(dim) + " rows");
      return std::nullopt;
    }
    for (std::size_t row = 0; row < j.size(); ++row) {
      const auto rp = path + "/" + std::to_string(row);
      if (!j[row].is_array() || j[row].size() != static_cast<std::size_t>(dim)) {
        r.fail(rp, "expected a row of " + std::to_string(dim) + " entries");
        ok = false;
        continue;
      }
      for (std::size_t c = 0; c < j[row].size(); ++c) {
        auto v = r.number(j[row][c], rp + "/" + std::to_string(c));
        ok = ok && v.has_value();
        entries.push_back(v.value_or(0.0));
      }
    }
  } else if (j.is_array()) {
    if (j.size() != static_cast<std::size_t>(dim * dim)) {
      r.fail(path, "expected " + std::to_string(dim * dim) + " row-major entries");
      return std::nullopt;
    }
    for (std::size_t c = 0; c < j.size(); ++c) {
      auto v = r.number(j[c], path + "/" + std::to_string(c));
      ok = ok && v.has_value();
      entries.push_back(v.value_or(0.0));
    }
  } else {
    r.fail(path, "expected a matrix");
    return std::nullopt;
  }
  if (!ok) return std::nullopt;
  return Matrix::from_row_major(dim, entries);
}

std::optional<Vector> read_vector(Reader& r, const json& j, int dim, const std::string& path) {
  if (dim == 1 && (j.is_number() || j.is_string())) {
    auto v = r.number(j, path);
    if (!v) return std::nullopt;
    Vector out(1);
    out[0] = *v;
    return out;
  }
  if (!j.is_array() || j.size() != static_cast<std::size_t>(dim)) {
    r.fail(path, "expected a vector of " + std::to_string(dim) + " entries");
    return std::nullopt;
  }
  Vector out(dim);
  bool ok = true;
  for (int i = 0; i < dim; ++i) {
    auto v = r.number(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
    ok = ok && v.has_value();
    out[i] = v.value_or(0.0);
  }
  if (!ok) return std::nullopt;
  return out;
}

std::optional<int> read_label(Reader& r, const json& j, const std::vector<IfsSystem>& systems,
                              const std::string& path) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    for (std::size_t i = 0; i < systems.size(); ++i) {
      if (systems[i].name == name) return static_cast<int>(i);
    }
    r.fail(path, "unknown system \"" + name + "\"");
    return std::nullopt;
  }
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v >= 0 && v < static_cast<long long>(systems.size())) return static_cast<int>(v);
  }
  r.fail(path, "expected a system name or index");
  return std::nullopt;
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T>
void read_count(Reader& r, const json& params, const char* key, T& out, std::uint64_t min_value) {
  auto it = params.find(key);
  if (it == params.end()) return;
  const std::string path = std::string("/params/") + key;
  if (auto v = r.unsigned_int(*it, path)) {
    if (*v < min_value) {
      r.fail(path, "must be at least " + std::to_string(min_value));
    } else {
      out = static_cast<T>(*v);
    }
  }
}

void read_positive(Reader& r, const json& params, const char* key, double& out,
                   const std::string& base = "/params") {
  auto it = params.find(key);
  if (it == params.end()) return;
  const std::string path = base + "/" + key;
  if (auto v = r.number(*it, path)) {
    if (!(*v > 0.0)) {
      r.fail(path, "must be positive");
    } else {
      out = *v;
    }
  }
}

void read_params(Reader& r, const json& j, RunParams& p) {
  if (!r.expect_object(j, "/params")) return;
  r.unknown_keys(j, "/params",
                 {"blocks", "necks", "window", "affinity_necks", "depth", "max_points", "s",
                  "tol", "affinity_tol", "seed", "seeds", "word_cap", "mc_samples", "box"});
  read_count(r, j, "blocks", p.blocks, 1);
  read_count(r, j, "necks", p.necks, 1);
  read_count(r, j, "window", p.window, 1);
  read_count(r, j, "affinity_necks", p.affinity_necks, 1);
  read_count(r, j, "depth", p.depth, 0);
  read_count(r, j, "max_points", p.max_points, 1);
  read_count(r, j, "seed", p.seed, 0);
  read_count(r, j, "seeds", p.seeds, 1);
  read_count(r, j, "word_cap", p.word_cap, 1);
  read_count(r, j, "mc_samples", p.mc_samples, 1);
  read_positive(r, j, "tol", p.tol);
  read_positive(r, j, "affinity_tol", p.affinity_tol);
  if (auto it = j.find("s"); it != j.end()) {
    std::vector<double> grid;
    const json& sj = *it;
    if (sj.is_array()) {
      for (std::size_t i = 0; i < sj.size(); ++i) {
        const auto path = "/params/s/" + std::to_string(i);
        if (auto v = r.number(sj[i], path)) {
          if (*v < 0.0) r.fail(path, "must be non-negative");
          grid.push_back(*v);
        }
      }
      if (grid.empty()) r.fail("/params/s", "must not be empty");
    } else if (auto v = r.number(sj, "/params/s")) {
      if (*v < 0.0) r.fail("/params/s", "must be non-negative");
      grid.push_back(*v);
    }
    p.s = grid;
  }
  if (auto it = j.find("box"); it != j.end()) {
    const json& b = *it;
    if (r.expect_object(b, "/params/box")) {
      r.unknown_keys(b, "/params/box", {"scale_hi", "scale_lo", "n_scales"});
      read_positive(r, b, "scale_hi", p.scale_hi, "/params/box");
      read_positive(r, b, "scale_lo", p.scale_lo, "/params/box");
      if (auto n = b.find("n_scales"); n != b.end()) {
        if (auto v = r.unsigned_int(*n, "/params/box/n_scales")) {
          if (*v < 3) r.fail("/params/box/n_scales", "must be at least 3");
          else p.n_scales = static_cast<int>(*v);
        }
      }
      if (p.scale_lo >= p.scale_hi) r.fail("/params/box", "scale_lo must be below scale_hi");
    }
  }
  if (p.window > p.necks) r.fail("/params/window", "must not exceed necks");
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

std::size_t ExperimentConfig::map_count() const {
  std::size_t n = 0;
  for (const auto& sys : family->systems) n += sys.maps.size();
  return n;
}

PressureOptions ExperimentConfig::pressure_options() const {
  PressureOptions o;
  o.word_cap = params.word_cap;
  o.mc_samples = params.mc_samples;
  o.seed = params.seed;
  return o;
}

ExperimentSettings ExperimentConfig::experiment_settings() const {
  ExperimentSettings s;
  s.blocks = params.blocks;
  s.necks = params.necks;
  s.affinity_necks = params.affinity_necks;
  s.depth = params.depth;
  s.max_points = params.max_points;
  s.tol = params.tol;
  s.affinity_tol = params.affinity_tol;
  s.pressure = pressure_options();
  s.classes = classes;
  s.halfwidth = halfwidth;
  s.center = center;
  s.scale_hi = params.scale_hi;
  s.scale_lo = params.scale_lo;
  s.n_scales = params.n_scales;
  return s;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  Reader r;
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    if (auto pos = what.find("parse error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigValidationError({locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + what});
  }
  if (!root.is_object()) throw ConfigValidationError({"/: expected an object"});
  r.unknown_keys(root, "", {"dim", "bounds", "systems", "templates", "weights", "translations",
                            "params", "name", "description"});

  ExperimentConfig cfg;
  cfg.source = source;
  cfg.hash = fnv1a_hex(text);

  int dim = 0;
  if (const json* d = r.child(root, "dim", "", true)) {
    if (d->is_number_integer() && d->get<long long>() >= 1 && d->get<long long>() <= kMaxDim) {
      dim = d->get<int>();
    } else {
      r.fail("/dim", "must be an integer in 1.." + std::to_string(kMaxDim));
    }
  }
  if (dim == 0) throw ConfigValidationError(r.problems);

  // Systems.
  std::vector<IfsSystem> systems;
  bool maps_ok = true;
  if (const json* sj = r.child(root, "systems", "", true); sj && r.expect_array(*sj, "/systems")) {
    if (sj->empty()) r.fail("/systems", "needs at least one system");
    for (std::size_t li = 0; li < sj->size(); ++li) {
      const std::string sp = "/systems/" + std::to_string(li);
      const json& sys = (*sj)[li];
      IfsSystem out;
      out.name = std::to_string(li);
      if (!r.expect_object(sys, sp)) {
        maps_ok = false;
        systems.push_back(out);
        continue;
      }
      r.unknown_keys(sys, sp, {"name", "maps"});
      if (auto n = sys.find("name"); n != sys.end()) {
        if (n->is_string()) out.name = n->get<std::string>();
        else r.fail(sp + "/name", "expected a string");
      }
      const json* mj = r.child(sys, "maps", sp, true);
      if (mj && r.expect_array(*mj, sp + "/maps")) {
        if (mj->empty()) r.fail(sp + "/maps", "needs at least one map");
        for (std::size_t i = 0; i < mj->size(); ++i) {
          const std::string mp = sp + "/maps/" + std::to_string(i);
          const json& map = (*mj)[i];
          if (!r.expect_object(map, mp)) {
            maps_ok = false;
            continue;
          }
          r.unknown_keys(map, mp, {"linear", "translation"});
          AffineMap f = AffineMap::identity(dim);
          const json* lj = r.child(map, "linear", mp, true);
          auto lin = lj ? read_matrix(r, *lj, dim, mp + "/linear") : std::nullopt;
          if (lin) f.linear = *lin;
          else maps_ok = false;
          f.translation = Vector(dim);
          if (auto t = map.find("translation"); t != map.end()) {
            auto v = read_vector(r, *t, dim, mp + "/translation");
            if (v) f.translation = *v;
            else maps_ok = false;
          }
          out.maps.push_back(f);
        }
      } else {
        maps_ok = false;
      }
      for (const auto& other : systems) {
        if (other.name == out.name) r.fail(sp + "/name", "duplicate system name");
      }
      systems.push_back(std::move(out));
    }
  }
  if (!maps_ok || systems.empty() || !r.problems.empty()) throw ConfigValidationError(r.problems);

  // Bounds: tight unless declared.
  auto family = std::make_shared<IfsFamily>();
  family->dim = dim;
  family->systems = systems;
  family->sigma_lo = 1.0;
  family->sigma_hi = 0.0;
  for (std::size_t l = 0; l < systems.size(); ++l) {
    const auto& sys = systems[l];
    family->max_branch = std::max(family->max_branch, static_cast<int>(sys.maps.size()));
    for (std::size_t i = 0; i < sys.maps.size(); ++i) {
      const auto& m = sys.maps[i];
      family->trans_bound = std::max(family->trans_bound, m.translation.norm());
      if (!m.linear.all_finite() || !(std::abs(m.linear.determinant()) > Tolerances::kSingularDet)) {
        continue;
      }
      const auto spec = singular_values(m.linear);
      if (!(spec.largest() < 1.0)) {
        std::ostringstream msg;
        msg << "largest singular value " << spec.largest() << " is not below 1";
        r.fail("/systems/" + std::to_string(l) + "/maps/" + std::to_string(i), msg.str());
      }
      family->sigma_lo = std::min(family->sigma_lo, spec.smallest());
      family->sigma_hi = std::max(family->sigma_hi, spec.largest());
    }
  }
  if (!r.problems.empty()) throw ConfigValidationError(r.problems);
  if (const json* bj = r.child(root, "bounds", "", false); bj && r.expect_object(*bj, "/bounds")) {
    r.unknown_keys(*bj, "/bounds", {"sigma_lo", "sigma_hi", "trans_bound", "max_branch"});
    auto read_bound = [&](const char* key, double& out) {
      if (auto it = bj->find(key); it != bj->end()) {
        if (auto v = r.number(*it, std::string("/bounds/") + key)) out = *v;
      }
    };
    read_bound("sigma_lo", family->sigma_lo);
    read_bound("sigma_hi", family->sigma_hi);
    read_bound("trans_bound", family->trans_bound);
    if (auto it = bj->find("max_branch"); it != bj->end()) {
      if (auto v = r.unsigned_int(*it, "/bounds/max_branch")) {
        family->max_branch = static_cast<int>(std::min<std::uint64_t>(*v, 1u << 16));
      }
    }
  }
  const auto report = validate_family(*family);
  for (const auto& v : report.violations) {
    std::string path = "/bounds";
    if (v.label >= 0) {
      path = "/systems/" + std::to_string(v.label);
      if (v.index >= 0) path += "/maps/" + std::to_string(v.index);
    }
    r.fail(path, v.what);
  }
  if (!r.problems.empty()) throw ConfigValidationError(r.problems);
  cfg.family = family;

  // Templates.
  std::vector<std::shared_ptr<const BlockTemplate>> templates;
  if (const json* tj = r.child(root, "templates", "", false)) {
    if (r.expect_array(*tj, "/templates")) {
      if (tj->empty()) r.fail("/templates", "template set is empty");
      for (std::size_t ti = 0; ti < tj->size(); ++ti) {
        const std::string tp = "/templates/" + std::to_string(ti);
        const json& t = (*tj)[ti];
        if (!r.expect_object(t, tp)) continue;
        r.unknown_keys(t, tp, {"name", "levels", "depth", "nodes"});
        std::string name = std::to_string(ti);
        if (auto n = t.find("name"); n != t.end() && n->is_string()) name = n->get<std::string>();
        auto labels = [&](const json& arr, const std::string& path) {
          std::vector<int> out;
          bool ok = r.expect_array(arr, path);
          if (!ok) return std::optional<std::vector<int>>{};
          for (std::size_t i = 0; i < arr.size(); ++i) {
            auto l = read_label(r, arr[i], systems, path + "/" + std::to_string(i));
            ok = ok && l.has_value();
            out.push_back(l.value_or(0));
          }
          return ok ? std::optional<std::vector<int>>(out) : std::nullopt;
        };
        try {
          if (auto lv = t.find("levels"); lv != t.end()) {
            if (t.contains("nodes")) r.fail(tp, "give either levels or nodes, not both");
            auto ls = labels(*lv, tp + "/levels");
            if (ls && ls->empty()) r.fail(tp + "/levels", "template depth must be at least 1");
            else if (ls) {
              templates.push_back(std::make_shared<const BlockTemplate>(
                  BlockTemplate::from_levels(*family, *ls, name)));
            }
          } else if (auto nd = t.find("nodes"); nd != t.end()) {
            const json* dj = r.child(t, "depth", tp, true);
            auto depth = dj ? r.unsigned_int(*dj, tp + "/depth") : std::nullopt;
            auto ls = labels(*nd, tp + "/nodes");
            const std::uint64_t dv = depth.value_or(0);
            if (depth && dv < 1) r.fail(tp + "/depth", "must be at least 1");
            else if (depth && ls) {
              templates.push_back(std::make_shared<const BlockTemplate>(
                  BlockTemplate::from_nodes(*family, static_cast<int>(dv), *ls, name)));
            }
          } else {
            r.fail(tp, "missing field levels or nodes");
          }
        } catch (const Error& e) {
          r.fail(tp, e.what());
        }
      }
    }
  } else if (systems.size() == 1) {
    templates.push_back(
        std::make_shared<const BlockTemplate>(BlockTemplate::from_levels(*family, {0}, "0")));
  } else {
    r.fail("/templates", "missing field (required with more than one system)");
  }

  // Weights.
  std::vector<double> weights;
  if (const json* wj = r.child(root, "weights", "", false)) {
    if (r.expect_array(*wj, "/weights")) {
      for (std::size_t i = 0; i < wj->size(); ++i) {
        auto v = r.number((*wj)[i], "/weights/" + std::to_string(i));
        weights.push_back(v.value_or(0.0));
      }
      if (weights.size() != templates.size() && r.problems.empty()) {
        r.fail("/weights", "expected " + std::to_string(templates.size()) + " weights");
      }
    }
  } else {
    weights.assign(templates.size(), templates.empty() ? 0.0 : 1.0 / static_cast<double>(templates.size()));
  }
  if (!r.problems.empty()) throw ConfigValidationError(r.problems);
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) r.fail("/weights/" + std::to_string(i), "must be non-negative");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > Tolerances::kWeightSum) {
    std::ostringstream msg;
    msg << "weights sum to " << total << ", expected 1";
    r.fail("/weights", msg.str());
  }
  cfg.measure.family = family;
  cfg.measure.templates = templates;
  cfg.measure.weights = weights;
  if (r.problems.empty()) {
    try {
      cfg.measure.validate();
    } catch (const ConfigError& e) {
      r.fail("/templates", e.what());
    }
  }

  // Translation scheme.
  if (const json* tj = r.child(root, "translations", "", false);
      tj && r.expect_object(*tj, "/translations")) {
    r.unknown_keys(*tj, "/translations", {"classes", "halfwidth", "center"});
    if (auto it = tj->find("halfwidth"); it != tj->end()) {
      if (auto v = r.number(*it, "/translations/halfwidth")) {
        if (*v < 0.0) r.fail("/translations/halfwidth", "must be non-negative");
        cfg.halfwidth = *v;
      }
    }
    if (auto it = tj->find("center"); it != tj->end()) {
      if (auto v = r.number(*it, "/translations/center")) cfg.center = *v;
    }
    if (auto it = tj->find("classes"); it != tj->end()) {
      if (it->is_string() && it->get<std::string>() == "finest") {
        cfg.classes.clear();
      } else if (r.expect_array(*it, "/translations/classes")) {
        for (std::size_t li = 0; li < it->size(); ++li) {
          const auto& row = (*it)[li];
          auto& out = cfg.classes.emplace_back();
          if (!row.is_array()) {
            r.fail("/translations/classes/" + std::to_string(li), "expected an array");
            continue;
          }
          for (std::size_t i = 0; i < row.size(); ++i) {
            const auto path = "/translations/classes/" + std::to_string(li) + "/" + std::to_string(i);
            auto v = r.unsigned_int(row[i], path);
            out.push_back(static_cast<int>(v.value_or(0)));
          }
        }
        if (r.problems.empty()) {
          try {
            TranslationScheme probe;
            probe.classes = cfg.classes;
            probe.translations.assign(class_count(cfg.classes), Vector(dim));
            probe.validate(*family);
          } catch (const SchemeError& e) {
            r.fail("/translations/classes", e.what());
          }
        }
      }
    }
  }

  if (const json* pj = r.child(root, "params", "", false)) read_params(r, *pj, cfg.params);
  if (!r.problems.empty()) throw ConfigValidationError(r.problems);
  return cfg;
}

}  // namespace affcode
