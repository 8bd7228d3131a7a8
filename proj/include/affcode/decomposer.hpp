#pragma once

// Decomposition of the finite tree Σ(L) (all words of length N_L) into
// C-class subtrees (neck covers of cost < 1 over R necks) and H-class
// subtrees (full levels spanning runs of non-member shifts), together with
// the bound
//   S(N_L, s) <= M^{Q_L + N_L - N_{L-R}}.
//
// Membership of a shift index k is the predicate f_R(Ξ^k ω) < 1.  Because of
// neck homogeneity it depends on k only, so it is evaluated once per k.

#include <cstdint>
#include <memory>
#include <vector>

#include "affcode/codetree.hpp"

namespace affcode {

enum class SubtreeKind { kCClass, kHClass };

struct SubtreeTag {
  SubtreeKind kind = SubtreeKind::kHClass;
  std::size_t first_neck = 0;  // F(Γ)
  std::size_t last_neck = 0;   // L(Γ)
};

struct TaggedSubtree {
  SubtreeTag tag;
  WordPath root;  // absolute word of length N_{first_neck}
  // Leaf words relative to root; shared between all roots at the same neck.
  std::shared_ptr<const std::vector<WordPath>> leaves;
  // log Σ_leaves Φ^s of products relative to root.
  double log_cost = 0.0;
  // Next-generation subtrees, keyed by leaf index.
  std::vector<std::pair<std::size_t, TaggedSubtree>> children;
};

struct DecompositionTree {
  std::size_t L = 0;
  std::size_t R = 0;
  double s = 0.0;
  TaggedSubtree root;
  std::vector<bool> member;  // membership of Ξ^k ω, k = 0..L-1
  std::int64_t q_l = 0;
  // Share of shift indices k < L that failed membership, by count and
  // weighted by block depth (Q_L / N_L).
  double nonmember_fraction = 0.0;
  double nonmember_depth_fraction = 0.0;
  std::size_t subtree_count = 0;
};

// f_R(t) < 1.  Throws DepthError when t has fewer than R blocks.
bool membership(const NeckCodeTree& t, double s, std::size_t R);

// Requires 1 <= R <= L and at least L + R - 1 blocks (membership is needed
// for every shift index below L).
DecompositionTree decompose(const NeckCodeTree& t, std::size_t L, std::size_t R, double s);

// Q_L as recorded by the decomposition.
std::int64_t q_l(const DecompositionTree& d);

// Absolute words of the final leaves, lexicographic.
std::vector<WordPath> final_leaves(const DecompositionTree& d);

struct SubtreeBound {
  SubtreeTag tag;  // of the composite subtree's first generation
  WordPath root;
  std::size_t last_neck = 0;  // deepest neck reached by the composite
  double log_sum = 0.0;       // log Σ over final leaves of Φ^s relative to root
  double log_bound = 0.0;     // (Σ non-member block depths in the span)·log M
  bool ok = false;
};

// The per-subtree bound for every composite subtree of the decomposition.
std::vector<SubtreeBound> subtree_bounds(const NeckCodeTree& t, const DecompositionTree& d);

struct StarReport {
  double lhs = 0.0;  // log S(N_L, s)
  double rhs = 0.0;  // (Q_L + N_L - N_{L-R})·log M
  std::int64_t q_l = 0;
  bool ok = false;
};

StarReport verify_star(const NeckCodeTree& t, std::size_t L, std::size_t R, double s,
                       std::uint64_t word_cap = std::uint64_t{1} << 24);

}  // namespace affcode
