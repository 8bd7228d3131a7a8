#include "affcode/codetree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affcode/random.hpp"
#include "affcode/svf.hpp"

namespace affcode {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

}  // namespace

template <typename LabelFor>
BlockTemplate BlockTemplate::build(const IfsFamily& family, int depth, LabelFor label_for,
                                   std::string name) {
  if (depth < 1) throw ConfigError("block template depth must be at least 1");
  BlockTemplate t;
  t.name_ = std::move(name);
  t.depth_ = depth;
  t.nodes_.push_back(Node{-1, 0, 0, 0});
  t.level_sizes_.assign(static_cast<std::size_t>(depth) + 1, 0);
  t.level_sizes_[0] = 1;
  std::size_t internal = 0;
  // Breadth-first: nodes_ grows while we scan it.
  for (std::size_t v = 0; v < t.nodes_.size(); ++v) {
    const int d = t.nodes_[v].depth;
    if (d == depth) continue;
    const int label = label_for(internal++, d);
    const int m = family.branching(label);
    if (t.nodes_.size() + static_cast<std::size_t>(m) > kMaxNodes) {
      throw ConfigError("block template exceeds " + std::to_string(kMaxNodes) + " nodes");
    }
    t.nodes_[v].label = label;
    t.nodes_[v].children = m;
    t.nodes_[v].first_child = t.nodes_.size();
    for (int i = 0; i < m; ++i) t.nodes_.push_back(Node{-1, d + 1, 0, 0});
    t.level_sizes_[static_cast<std::size_t>(d) + 1] += static_cast<std::size_t>(m);
  }
  return t;
}

BlockTemplate BlockTemplate::from_levels(const IfsFamily& family,
                                         std::vector<int> level_labels, std::string name) {
  const int depth = static_cast<int>(level_labels.size());
  for (int label : level_labels) {
    if (label < 0 || label >= family.label_count()) {
      throw ConfigError("template references unknown label " + std::to_string(label));
    }
  }
  return build(
      family, depth,
      [&](std::size_t, int level) { return level_labels[static_cast<std::size_t>(level)]; },
      std::move(name));
}

BlockTemplate BlockTemplate::from_nodes(const IfsFamily& family, int depth,
                                        std::vector<int> bfs_labels, std::string name) {
  for (int label : bfs_labels) {
    if (label < 0 || label >= family.label_count()) {
      throw ConfigError("template references unknown label " + std::to_string(label));
    }
  }
  auto t = build(
      family, depth,
      [&](std::size_t i, int) {
        if (i >= bfs_labels.size()) {
          throw ConfigError("template needs more internal labels than the " +
                            std::to_string(bfs_labels.size()) + " given");
        }
        return bfs_labels[i];
      },
      std::move(name));
  const std::size_t internal = t.node_count() - t.leaf_count();
  if (internal != bfs_labels.size()) {
    throw ConfigError("template has " + std::to_string(internal) +
                      " internal nodes but " + std::to_string(bfs_labels.size()) +
                      " labels were given");
  }
  return t;
}

std::vector<int> BlockTemplate::internal_labels() const {
  std::vector<int> out;
  for (const auto& n : nodes_) {
    if (n.label >= 0) out.push_back(n.label);
  }
  return out;
}

NeckCodeTree::NeckCodeTree(std::shared_ptr<const IfsFamily> family,
                           std::vector<std::shared_ptr<const BlockTemplate>> blocks)
    : family_(std::move(family)), blocks_(std::move(blocks)) {
  if (!family_) throw ArgumentError("code tree needs a family");
  auto dets = std::make_shared<std::vector<std::vector<double>>>();
  for (const auto& sys : family_->systems) {
    auto& row = dets->emplace_back();
    for (const auto& m : sys.maps) {
      const double det = std::abs(m.linear.determinant());
      if (!(det > 0.0)) throw InvalidMatrixError("family contains a singular map");
      row.push_back(std::log(det));
    }
  }
  log_dets_ = std::move(dets);
  necks_.push_back(0);
  for (const auto& b : blocks_) {
    if (!b) throw ArgumentError("null block template");
    necks_.push_back(necks_.back() + b->depth());
  }
}

std::optional<std::size_t> NeckCodeTree::neck_index_of_level(int level) const {
  auto it = std::lower_bound(necks_.begin(), necks_.end(), level);
  if (it == necks_.end() || *it != level) return std::nullopt;
  return static_cast<std::size_t>(it - necks_.begin());
}

NeckCodeTree NeckCodeTree::shifted(std::size_t times) const {
  if (times > blocks_.size()) throw EmptyShiftError("cannot shift past the last block");
  NeckCodeTree out = *this;
  out.blocks_.erase(out.blocks_.begin(), out.blocks_.begin() + static_cast<std::ptrdiff_t>(times));
  out.necks_.assign(1, 0);
  for (const auto& b : out.blocks_) out.necks_.push_back(out.necks_.back() + b->depth());
  return out;
}

NeckCodeTree NeckCodeTree::with_family(std::shared_ptr<const IfsFamily> family) const {
  if (!family || family->label_count() != family_->label_count()) {
    throw ArgumentError("replacement family has a different label set");
  }
  for (int l = 0; l < family->label_count(); ++l) {
    if (family->branching(l) != family_->branching(l)) {
      throw ArgumentError("replacement family changes branching of label " + std::to_string(l));
    }
  }
  return NeckCodeTree(std::move(family), blocks_);
}

int NeckCodeTree::level(Position p) const {
  if (is_bottom(p)) return total_depth();
  return necks_[p.block] + blocks_[p.block]->node_depth(p.node);
}

int NeckCodeTree::label(Position p) const {
  if (is_bottom(p)) throw DepthError("no label below the materialized depth");
  return blocks_[p.block]->label(p.node);
}

int NeckCodeTree::branching(Position p) const {
  if (is_bottom(p)) throw DepthError("no children below the materialized depth");
  return blocks_[p.block]->branching(p.node);
}

NeckCodeTree::Position NeckCodeTree::child(Position p, int i) const {
  const auto& b = *blocks_[p.block];
  const std::size_t c = b.child(p.node, i);
  if (b.is_leaf(c)) return Position{p.block + 1, 0};
  return Position{p.block, c};
}

const AffineMap& NeckCodeTree::edge_map(Position p, int i) const {
  return family_->map(label(p), i);
}

double NeckCodeTree::edge_log_det(Position p, int i) const {
  return (*log_dets_)[static_cast<std::size_t>(label(p))][static_cast<std::size_t>(i)];
}

void BlockMeasure::validate() const {
  if (!family) throw ConfigError("block measure has no family");
  if (templates.empty()) throw ConfigError("block measure has no templates");
  if (weights.size() != templates.size()) {
    throw ConfigError("block measure needs one weight per template");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > Tolerances::kWeightSum) {
    throw ConfigError("weights sum to " + std::to_string(sum) + ", not 1");
  }
  for (const auto& t : templates) {
    if (!t) throw ConfigError("null template in block measure");
  }
}

double BlockMeasure::mean_first_neck() const {
  double e = 0.0;
  for (std::size_t i = 0; i < templates.size(); ++i) e += weights[i] * templates[i]->depth();
  return e;
}

NeckCodeTree sample_tree(const BlockMeasure& mu, std::size_t n_blocks, std::uint64_t seed) {
  mu.validate();
  if (n_blocks < 1) throw ConfigError("a code tree needs at least one block");
  Rng rng(seed);
  std::vector<std::shared_ptr<const BlockTemplate>> blocks;
  blocks.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t pick = mu.templates.size() - 1;
    for (std::size_t i = 0; i < mu.templates.size(); ++i) {
      cum += mu.weights[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    blocks.push_back(mu.templates[pick]);
  }
  return NeckCodeTree(mu.family, std::move(blocks));
}

NeckCodeTree shift(const NeckCodeTree& t) {
  if (t.block_count() < 2) throw EmptyShiftError("shift needs at least two blocks");
  return t.shifted(1);
}

std::uint64_t neck_word_count(const NeckCodeTree& t, std::size_t n, std::size_t m) {
  if (n >= m) throw ArgumentError("neck_word_count needs n < m");
  if (m > t.block_count()) {
    throw DepthError("neck index " + std::to_string(m) + " beyond " +
                     std::to_string(t.block_count()) + " blocks");
  }
  std::uint64_t count = 1;
  for (std::size_t b = n; b < m; ++b) count = saturating_mul(count, t.block(b).leaf_count());
  return count;
}

std::uint64_t word_count(const NeckCodeTree& t, int k) {
  if (k < 0 || k > t.total_depth()) {
    throw DepthError("word length " + std::to_string(k) + " outside materialized depth");
  }
  std::uint64_t count = 1;
  for (std::size_t b = 0; b < t.block_count(); ++b) {
    const int top = t.neck(b);
    const int bottom = t.neck(b + 1);
    if (k >= bottom) {
      count = saturating_mul(count, t.block(b).leaf_count());
    } else {
      if (k > top) count = saturating_mul(count, t.block(b).level_size(k - top));
      break;
    }
  }
  return count;
}

NeckCodeTree::Position position_of(const NeckCodeTree& t, std::span<const int> word) {
  auto pos = t.root();
  for (int sym : word) {
    if (t.is_bottom(pos)) throw DepthError("word longer than the materialized tree");
    if (sym < 0 || sym >= t.branching(pos)) throw ArgumentError("word is not in the tree");
    pos = t.child(pos, sym);
  }
  return pos;
}

bool contains_word(const NeckCodeTree& t, std::span<const int> word) {
  auto pos = t.root();
  for (int sym : word) {
    if (t.is_bottom(pos) || sym < 0 || sym >= t.branching(pos)) return false;
    pos = t.child(pos, sym);
  }
  return true;
}

WordProduct product_along(const NeckCodeTree& t, std::span<const int> word) {
  WordProduct out{ScaledProduct(t.dim()), Vector(t.dim())};
  auto pos = t.root();
  for (int sym : word) {
    if (t.is_bottom(pos) || sym < 0 || sym >= t.branching(pos)) {
      throw ArgumentError("word is not in the tree");
    }
    const AffineMap& f = t.edge_map(pos, sym);
    out.origin_image += out.linear.value() * f.translation;
    out.linear.right_multiply(f.linear, t.edge_log_det(pos, sym));
    pos = t.child(pos, sym);
  }
  return out;
}

}  // namespace affcode
