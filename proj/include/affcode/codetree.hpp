#pragma once

// Neck code trees built from inter-neck block templates.
//
// A tree is a sequence of blocks; block m spans levels N_m .. N_{m+1} (with
// N_0 = 0) and every node at level N_m roots a copy of the same block, so neck
// homogeneity holds by construction.  Words are 0-based symbol sequences.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affcode/errors.hpp"
#include "affcode/family.hpp"
#include "affcode/linalg.hpp"

namespace affcode {

using WordPath = std::vector<int>;

// Labels of a rooted tree of fixed depth; a node labeled λ has M_λ children.
class BlockTemplate {
 public:
  // Upper bound on template nodes.
  static constexpr std::size_t kMaxNodes = std::size_t{1} << 22;

  // Every node at level r gets level_labels[r]; depth = level_labels.size().
  static BlockTemplate from_levels(const IfsFamily& family, std::vector<int> level_labels,
                                   std::string name = {});
  // Internal nodes labeled in breadth-first order.
  static BlockTemplate from_nodes(const IfsFamily& family, int depth,
                                  std::vector<int> bfs_labels, std::string name = {});

  const std::string& name() const { return name_; }
  int depth() const { return depth_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const { return level_sizes_.back(); }
  // Number of template nodes at level r in [0, depth].
  std::size_t level_size(int r) const { return level_sizes_.at(static_cast<std::size_t>(r)); }

  bool is_leaf(std::size_t node) const { return nodes_[node].label < 0; }
  int label(std::size_t node) const { return nodes_[node].label; }
  int branching(std::size_t node) const { return nodes_[node].children; }
  int node_depth(std::size_t node) const { return nodes_[node].depth; }
  std::size_t child(std::size_t node, int i) const {
    return nodes_[node].first_child + static_cast<std::size_t>(i);
  }
  std::vector<int> internal_labels() const;

  friend bool operator==(const BlockTemplate& a, const BlockTemplate& b) {
    return a.depth_ == b.depth_ && a.internal_labels() == b.internal_labels();
  }

 private:
  struct Node {
    int label = -1;
    int depth = 0;
    int children = 0;
    std::size_t first_child = 0;
  };
  BlockTemplate() = default;
  template <typename LabelFor>
  static BlockTemplate build(const IfsFamily& family, int depth, LabelFor label_for,
                             std::string name);

  std::string name_;
  int depth_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::size_t> level_sizes_;
};

class NeckCodeTree {
 public:
  // A node: template node `node` inside block `block`.  block == block_count()
  // denotes the bottom of the materialized tree.
  struct Position {
    std::size_t block = 0;
    std::size_t node = 0;
  };

  NeckCodeTree(std::shared_ptr<const IfsFamily> family,
               std::vector<std::shared_ptr<const BlockTemplate>> blocks);

  const IfsFamily& family() const { return *family_; }
  const std::shared_ptr<const IfsFamily>& family_ptr() const { return family_; }
  int dim() const { return family_->dim; }

  std::size_t block_count() const { return blocks_.size(); }
  const BlockTemplate& block(std::size_t m) const { return *blocks_.at(m); }
  const std::vector<std::shared_ptr<const BlockTemplate>>& blocks() const { return blocks_; }

  // N_m for m in [0, block_count()], N_0 = 0.
  int neck(std::size_t m) const { return necks_.at(m); }
  // N_1, …, N_last.
  std::span<const int> necks() const { return std::span<const int>(necks_).subspan(1); }
  int total_depth() const { return necks_.back(); }
  // m with N_m == level, if level is a neck level (0 counts as N_0).
  std::optional<std::size_t> neck_index_of_level(int level) const;

  // Drops the first `times` blocks; necks become N_{m+times} - N_times.
  NeckCodeTree shifted(std::size_t times = 1) const;
  // Same labels and blocks over a family with identical branching.
  NeckCodeTree with_family(std::shared_ptr<const IfsFamily> family) const;

  Position root() const { return Position{0, 0}; }
  bool is_bottom(Position p) const { return p.block >= blocks_.size(); }
  int level(Position p) const;
  int label(Position p) const;
  int branching(Position p) const;
  Position child(Position p, int i) const;

  const AffineMap& edge_map(Position p, int i) const;
  double edge_log_det(Position p, int i) const;

 private:
  std::shared_ptr<const IfsFamily> family_;
  std::shared_ptr<const std::vector<std::vector<double>>> log_dets_;
  std::vector<std::shared_ptr<const BlockTemplate>> blocks_;
  std::vector<int> necks_;
};

// i.i.d. block measure: templates drawn with the given probabilities.
struct BlockMeasure {
  std::shared_ptr<const IfsFamily> family;
  std::vector<std::shared_ptr<const BlockTemplate>> templates;
  std::vector<double> weights;

  // Throws ConfigError when malformed.
  void validate() const;
  // E[N_1] = Σ w·depth.
  double mean_first_neck() const;
};

NeckCodeTree sample_tree(const BlockMeasure& mu, std::size_t n_blocks, std::uint64_t seed);

// Drops the first block.  Throws EmptyShiftError on a single-block tree.
NeckCodeTree shift(const NeckCodeTree& t);

// |Σ_*^ω(n, m)|: product of leaf counts of blocks n+1..m.  Saturates at
// UINT64_MAX.
std::uint64_t neck_word_count(const NeckCodeTree& t, std::size_t n, std::size_t m);
// Number of words of length k in the tree; saturates at UINT64_MAX.
std::uint64_t word_count(const NeckCodeTree& t, int k);

// Product along a word: linear part as a scaled product and f_word(0).
struct WordProduct {
  ScaledProduct linear;
  Vector origin_image;
  AffineMap map() const { return AffineMap{linear.value(), origin_image}; }
};

bool contains_word(const NeckCodeTree& t, std::span<const int> word);
// Throws ArgumentError if the word is not in the tree.
WordProduct product_along(const NeckCodeTree& t, std::span<const int> word);
NeckCodeTree::Position position_of(const NeckCodeTree& t, std::span<const int> word);

struct WordVisit {
  std::span<const int> symbols;
  const ScaledProduct& linear;
  const Vector& origin_image;
  AffineMap map() const { return AffineMap{linear.value(), origin_image}; }
};

namespace detail {

template <typename Fn>
void visit_words(const NeckCodeTree& t, NeckCodeTree::Position pos, int remaining,
                 std::vector<int>& symbols, const ScaledProduct& linear,
                 const Vector& origin, Fn& fn) {
  if (remaining == 0) {
    fn(WordVisit{std::span<const int>(symbols), linear, origin});
    return;
  }
  const int branches = t.branching(pos);
  const Matrix prefix_value = linear.value();
  for (int i = 0; i < branches; ++i) {
    const AffineMap& f = t.edge_map(pos, i);
    ScaledProduct next = linear;
    next.right_multiply(f.linear, t.edge_log_det(pos, i));
    Vector next_origin = origin + prefix_value * f.translation;
    symbols.push_back(i);
    visit_words(t, t.child(pos, i), remaining - 1, symbols, next, next_origin, fn);
    symbols.pop_back();
  }
}

}  // namespace detail

// Calls fn(const WordVisit&) for every word of length k, lexicographically.
// k = 0 yields the empty word with the identity.
template <typename Fn>
void for_each_word(const NeckCodeTree& t, int k, Fn&& fn) {
  if (k < 0 || k > t.total_depth()) {
    throw DepthError("word length " + std::to_string(k) + " outside materialized depth " +
                     std::to_string(t.total_depth()));
  }
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(k));
  ScaledProduct identity(t.dim());
  Vector origin(t.dim());
  detail::visit_words(t, t.root(), k, symbols, identity, origin, fn);
}

}  // namespace affcode
