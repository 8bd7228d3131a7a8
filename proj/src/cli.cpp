#include "affcode/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "affcode/attractor.hpp"
#include "affcode/config.hpp"
#include "affcode/decomposer.hpp"
#include "affcode/netmeasure.hpp"
#include "affcode/pressure.hpp"
#include "affcode/random.hpp"
#include "affcode/svf.hpp"

#ifndef AFFCODE_VERSION
#define AFFCODE_VERSION "0.0.0"
#endif

namespace affcode {

using nlohmann::ordered_json;

const char* version() { return AFFCODE_VERSION; }

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::optional<int> depth;
  std::optional<std::size_t> necks;
  std::optional<std::size_t> window;
  std::vector<double> s;
  std::optional<double> tol;
  std::string out;
  std::string box_out;
  bool neck_only = false;
};

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string word_string(const WordPath& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(w[i]);
  }
  return out.empty() ? "-" : out;
}

class Command {
 public:
  Command(const std::string& name, const Overrides& o, std::ostream& out)
      : name_(name), o_(o), stdout_(out) {
    cfg_ = parse_config(o.config);
    auto& p = cfg_.params;
    if (o.seed) p.seed = *o.seed;
    if (o.seeds) p.seeds = *o.seeds;
    if (o.depth) p.depth = *o.depth;
    if (o.necks) {
      p.necks = *o.necks;
      p.affinity_necks = *o.necks;
    }
    if (o.window) p.window = *o.window;
    if (!o.s.empty()) p.s = o.s;
    if (o.tol) {
      p.tol = *o.tol;
      p.affinity_tol = *o.tol;
    }
    if (p.window > p.necks) throw ArgumentError("window R must not exceed necks L");
    if (p.tol <= 0.0) throw ArgumentError("tolerance must be positive");
    for (double s : p.s) {
      if (s < 0.0) throw ArgumentError("s values must be non-negative");
    }
  }

  const ExperimentConfig& config() const { return cfg_; }
  RunParams& params() { return cfg_.params; }

  // Blocks needed by every command: necks L + R, D + 1 and the attractor depth.
  std::size_t blocks() const {
    const auto& p = cfg_.params;
    return std::max({p.blocks, p.necks + p.window, p.affinity_necks + 1,
                     static_cast<std::size_t>(std::max(p.depth, 1))});
  }

  NeckCodeTree tree(std::uint64_t seed) const {
    return sample_tree(cfg_.measure, blocks(), derive_seed(seed, 0));
  }

  ordered_json meta() const {
    ordered_json m;
    m["tool"] = "affcode";
    m["version"] = version();
    m["command"] = name_;
    m["config_hash"] = cfg_.hash;
    return m;
  }

  std::string csv_header() const {
    return std::string("# affcode ") + version() + " command=" + name_ +
           " config=" + cfg_.hash + "\n";
  }

  std::ostream& sink() {
    if (o_.out.empty()) return stdout_;
    if (!file_.is_open()) {
      file_.open(o_.out, std::ios::binary | std::ios::trunc);
      if (!file_) throw ArgumentError("cannot write " + o_.out);
    }
    return file_;
  }

  void emit_json(ordered_json body) {
    body["_meta"] = meta();
    sink() << body.dump(2) << '\n';
  }

  const Overrides& overrides() const { return o_; }

 private:
  std::string name_;
  const Overrides& o_;
  std::ostream& stdout_;
  std::ofstream file_;
  ExperimentConfig cfg_;
};

ordered_json params_json(const RunParams& p) {
  ordered_json j;
  j["blocks"] = p.blocks;
  j["necks"] = p.necks;
  j["window"] = p.window;
  j["affinity_necks"] = p.affinity_necks;
  j["depth"] = p.depth;
  j["s"] = p.s;
  j["tol"] = p.tol;
  j["affinity_tol"] = p.affinity_tol;
  j["seed"] = p.seed;
  j["word_cap"] = p.word_cap;
  j["mc_samples"] = p.mc_samples;
  return j;
}

ordered_json dimension_json(const DimensionEstimate& e) {
  ordered_json j;
  j["estimate"] = e.estimate();
  j["s_lo"] = e.s_lo;
  j["s_hi"] = e.s_hi;
  j["neck_index"] = e.neck_index;
  j["depth_used"] = e.depth_used;
  j["crossed"] = e.crossed;
  return j;
}

int cmd_validate(Command& c) {
  const auto& cfg = c.config();
  const auto& f = *cfg.family;
  ordered_json j;
  j["valid"] = true;
  j["dim"] = f.dim;
  j["systems"] = f.label_count();
  j["maps"] = cfg.map_count();
  j["templates"] = cfg.measure.templates.size();
  j["max_branch"] = f.max_branch;
  j["sigma_lo"] = f.sigma_lo;
  j["sigma_hi"] = f.sigma_hi;
  j["trans_bound"] = f.trans_bound;
  j["mean_first_neck"] = cfg.measure.mean_first_neck();
  if (f.sigma_hi >= 0.5) j["warning"] = "sigma_hi is not below 1/2";
  c.emit_json(j);
  return kExitOk;
}

int cmd_pressure(Command& c) {
  auto& p = c.params();
  const auto t = c.tree(p.seed);
  auto opts = c.config().pressure_options();
  auto& out = c.sink();
  out << c.csv_header();
  out << "# necks=" << p.necks << " seed=" << p.seed << " word_cap=" << p.word_cap
      << " mc_samples=" << p.mc_samples << '\n';
  out << "neck,level,s,log_sum,value,mc_stderr\n";
  for (std::size_t si = 0; si < p.s.size(); ++si) {
    opts.seed = derive_seed(p.seed, 100 + si);
    const auto curve = pressure_curve(t, p.s[si], p.necks, opts);
    for (std::size_t m = 0; m < curve.size(); ++m) {
      const auto& e = curve[m];
      out << (m + 1) << ',' << e.level << ',' << num(e.s) << ',' << num(e.log_sum) << ','
          << num(e.value) << ',' << (e.mc_stderr ? num(*e.mc_stderr) : "") << '\n';
    }
  }
  return kExitOk;
}

int cmd_zero(Command& c) {
  auto& p = c.params();
  const auto t = c.tree(p.seed);
  auto opts = c.config().pressure_options();
  opts.seed = derive_seed(p.seed, 3);
  const auto z = pressure_zero(t, p.necks, p.tol, opts);
  ordered_json j;
  j["s0_hat"] = z.s0_hat;
  j["lo"] = z.lo;
  j["hi"] = z.hi;
  j["level"] = z.level;
  j["neck_index"] = z.neck_index;
  j["exact"] = z.exact;
  j["degenerate"] = z.degenerate;
  j["params"] = params_json(p);
  c.emit_json(j);
  return kExitOk;
}

int cmd_affinity(Command& c) {
  auto& p = c.params();
  const auto t = c.tree(p.seed);
  ordered_json j;
  j["unrestricted"] = dimension_json(affinity_dim(t, p.affinity_necks, p.affinity_tol, false));
  j["neck"] = dimension_json(affinity_dim(t, p.affinity_necks, p.affinity_tol, true));
  j["params"] = params_json(p);
  c.emit_json(j);
  return kExitOk;
}

int cmd_cover(Command& c) {
  auto& p = c.params();
  const auto t = c.tree(p.seed);
  const bool neck_only = c.overrides().neck_only;
  const int max_index = neck_only ? static_cast<int>(p.affinity_necks) : t.neck(p.affinity_necks);
  auto& out = c.sink();
  out << c.csv_header();
  for (double s : p.s) {
    const auto sol = best_cover(t, s, 1, max_index, neck_only);
    out << "# s=" << num(s) << " window=[1," << max_index << "]"
        << (neck_only ? " necks" : " levels") << " nodes=" << sol.nodes.size()
        << " log_cost=" << num(sol.log_cost) << " seed=" << p.seed << '\n';
  }
  out << "s,word,length,log_phi\n";
  for (double s : p.s) {
    const auto sol = best_cover(t, s, 1, max_index, neck_only);
    for (const auto& w : sol.nodes) {
      out << num(s) << ',' << word_string(w) << ',' << w.size() << ','
          << num(log_phi(product_along(t, w).linear.log_spectrum(), s)) << '\n';
    }
  }
  return kExitOk;
}

int cmd_decompose(Command& c) {
  auto& p = c.params();
  const auto t = c.tree(p.seed);
  double s = 0.0;
  std::optional<DimensionEstimate> alpha;
  if (!c.overrides().s.empty()) {
    s = p.s.front();
  } else {
    alpha = affinity_dim(t, std::min(p.affinity_necks, p.necks), p.affinity_tol, false);
    s = alpha->s_hi + 0.1;
  }
  const auto d = decompose(t, p.necks, p.window, s);
  std::size_t c_class = 0;
  std::size_t h_class = 0;
  auto count = [&](auto& self, const TaggedSubtree& node) -> void {
    (node.tag.kind == SubtreeKind::kCClass ? c_class : h_class)++;
    for (const auto& [i, child] : node.children) self(self, child);
  };
  count(count, d.root);
  const auto bounds = subtree_bounds(t, d);
  const auto failed = std::count_if(bounds.begin(), bounds.end(),
                                    [](const SubtreeBound& b) { return !b.ok; });
  ordered_json j;
  j["L"] = d.L;
  j["R"] = d.R;
  j["s"] = s;
  if (alpha) j["alpha_hat_upper"] = alpha->s_hi;
  j["subtrees"] = d.subtree_count;
  j["c_class"] = c_class;
  j["h_class"] = h_class;
  std::vector<int> member;
  for (bool b : d.member) member.push_back(b ? 1 : 0);
  j["member"] = member;
  j["q_l"] = d.q_l;
  j["nonmember_fraction"] = d.nonmember_fraction;
  j["nonmember_depth_fraction"] = d.nonmember_depth_fraction;
  j["final_leaves"] = final_leaves(d).size();
  j["subtree_bounds_failed"] = failed;
  try {
    const auto star = verify_star(t, p.necks, p.window, s, p.word_cap);
    j["star"] = {{"lhs", star.lhs}, {"rhs", star.rhs}, {"ok", star.ok}};
  } catch (const InfeasibleError& e) {
    j["star"] = {{"skipped", e.what()}};
  }
  j["params"] = params_json(p);
  c.emit_json(j);
  return kExitOk;
}

int cmd_attractor(Command& c) {
  auto& p = c.params();
  const auto& cfg = c.config();
  const auto t = c.tree(p.seed);
  const auto classes = cfg.classes.empty() ? finest_classes(*cfg.family) : cfg.classes;
  const auto scheme =
      sample_translations(*cfg.family, classes, cfg.halfwidth, derive_seed(p.seed, 1), cfg.center);
  const auto cloud = generate_points(t, scheme, p.depth, p.max_points, derive_seed(p.seed, 2));
  auto& out = c.sink();
  out << c.csv_header();
  out << "# depth=" << p.depth << " seed=" << p.seed << " points=" << cloud.points.size()
      << (cloud.sampled ? " sampled" : " exhaustive") << " error_radius=" << num(cloud.error_radius)
      << '\n';
  write_points_csv(out, cloud);
  if (!c.overrides().box_out.empty()) {
    double extent = 0.0;
    for (int k = 0; k < cloud.dim; ++k) {
      double lo = INFINITY;
      double hi = -INFINITY;
      for (const auto& v : cloud.points) {
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
      }
      extent = std::max(extent, hi - lo);
    }
    if (!(extent > 0.0)) throw ResolutionError("degenerate cloud; no box scales");
    const auto box = box_dimension(cloud, p.scale_hi * extent, p.scale_lo * extent, p.n_scales);
    std::ofstream bf(c.overrides().box_out, std::ios::binary | std::ios::trunc);
    if (!bf) throw ArgumentError("cannot write " + c.overrides().box_out);
    bf << c.csv_header();
    bf << "# slope=" << num(box.slope) << " r2=" << num(box.r2) << '\n';
    write_box_counts_csv(bf, box);
  }
  return kExitOk;
}

int cmd_experiment(Command& c) {
  auto& p = c.params();
  const auto& cfg = c.config();
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < p.seeds; ++i) seeds.push_back(p.seed + i);
  auto settings = cfg.experiment_settings();
  settings.blocks = c.blocks();
  const auto r = dimension_experiment(cfg.measure, settings, seeds);
  auto& out = c.sink();
  out << c.csv_header();
  out << "# necks=" << p.necks << " affinity_necks=" << p.affinity_necks << " depth=" << p.depth
      << " seeds=" << p.seeds << " box=[" << num(p.scale_lo) << "," << num(p.scale_hi) << "]x"
      << p.n_scales << '\n';
  out << "# mean s0_hat=" << num(r.mean.s0_hat) << " alpha_hat=" << num(r.mean.alpha_hat)
      << " alpha_neck_hat=" << num(r.mean.alpha_neck_hat)
      << " boxdim_hat=" << num(r.mean.boxdim_hat) << '\n';
  out << "# sd s0_hat=" << num(r.stddev.s0_hat) << " boxdim_hat=" << num(r.stddev.boxdim_hat)
      << '\n';
  out << "# predicted min(s0_hat,d)=" << num(r.predicted) << '\n';
  for (const auto& w : r.warnings) out << "# warning: " << w << '\n';
  out << "# caveat: " << r.caveat << '\n';
  out << "seed,s0_hat,alpha_hat,alpha_neck_hat,boxdim_hat\n";
  for (const auto& row : r.rows) {
    out << row.seed << ',' << num(row.s0_hat) << ',' << num(row.alpha_hat) << ','
        << num(row.alpha_neck_hat) << ',' << num(row.boxdim_hat) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random affine code tree fractals: pressure zeros, cover measures and box "
               "dimension",
               "affcode"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  Overrides o;
  std::map<std::string, std::function<int(Command&)>> handlers{
      {"validate", cmd_validate},   {"pressure", cmd_pressure}, {"zero", cmd_zero},
      {"affinity", cmd_affinity},   {"cover", cmd_cover},       {"decompose", cmd_decompose},
      {"attractor", cmd_attractor}, {"experiment", cmd_experiment}};
  const std::map<std::string, std::string> help{
      {"validate", "check a configuration file"},
      {"pressure", "pressure quotients at necks N_1..N_L (CSV)"},
      {"zero", "zero of the pressure (JSON)"},
      {"affinity", "affinity dimension estimates for both cover windows (JSON)"},
      {"cover", "optimal antichain covers (CSV)"},
      {"decompose", "subtree decomposition summary and partition-sum bound (JSON)"},
      {"attractor", "truncated attractor points (CSV)"},
      {"experiment", "dimension estimates per translation seed (CSV)"}};
  for (const auto& [name, fn] : handlers) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("config", o.config, "configuration file")->required();
    auto set = [](auto& opt) { return [&opt](const auto& v) { opt = v; }; };
    sub->add_option_function<std::uint64_t>("--seed", set(o.seed), "base seed");
    sub->add_option_function<std::size_t>("--seeds", set(o.seeds), "number of seeds");
    sub->add_option_function<int>("--depth", set(o.depth), "attractor depth k");
    sub->add_option_function<std::size_t>("--necks", set(o.necks), "neck count L (and D)");
    sub->add_option_function<std::size_t>("--window", set(o.window), "window R");
    sub->add_option("--s", o.s, "exponent(s) s")->delimiter(',');
    sub->add_option_function<double>("--tol", set(o.tol), "bisection tolerance");
    sub->add_option("--out", o.out, "output file");
    if (name == "attractor") sub->add_option("--box-out", o.box_out, "box-count CSV");
    if (name == "cover") sub->add_flag("--neck-only", o.neck_only, "neck-level covers only");
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  const auto* sub = app.get_subcommands().front();
  try {
    Command c(sub->get_name(), o, out);
    return handlers.at(sub->get_name())(c);
  } catch (const ConfigValidationError& e) {
    err << "error: " << o.config << " is invalid\n";
    for (const auto& p : e.problems()) err << "  " << p << '\n';
    return kExitInvalid;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
}

}  // namespace affcode
