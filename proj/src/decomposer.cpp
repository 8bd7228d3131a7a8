#include "affcode/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "affcode/logsumexp.hpp"
#include "affcode/netmeasure.hpp"
#include "affcode/pressure.hpp"
#include "affcode/svf.hpp"

namespace affcode {

bool membership(const NeckCodeTree& t, double s, std::size_t R) {
  if (R < 1) throw ArgumentError("membership needs R >= 1");
  if (t.block_count() < R) {
    throw DepthError("membership needs " + std::to_string(R) + " blocks, tree has " +
                     std::to_string(t.block_count()));
  }
  return witness_c_r(t, s, R).has_value();
}

namespace {

class Decomposer {
 public:
  Decomposer(const NeckCodeTree& t, std::size_t L, std::size_t R, double s)
      : t_(t), L_(L), R_(R), s_(s), member_(L), cover_(L) {}

  bool member(std::size_t k) {
    if (!member_[k]) {
      auto w = witness_c_r(t_.shifted(k), s_, R_);
      member_[k] = w.has_value();
      if (w) {
        cover_[k] = std::make_shared<std::vector<WordPath>>(std::move(w->nodes));
        cover_cost_[k] = w->log_cost;
      }
    }
    return *member_[k];
  }

  TaggedSubtree build(std::size_t k, WordPath root) {
    ++count_;
    TaggedSubtree node;
    node.root = std::move(root);
    node.tag.first_neck = k;
    if (member(k)) {
      node.tag.kind = SubtreeKind::kCClass;
      node.leaves = cover_[k];
      node.log_cost = cover_cost_[k];
    } else {
      node.tag.kind = SubtreeKind::kHClass;
      std::size_t m = L_ - k;
      for (std::size_t j = 1; k + j < L_; ++j) {
        if (member(k + j)) {
          m = j;
          break;
        }
      }
      auto [leaves, cost] = level_words(k, m);
      node.leaves = leaves;
      node.log_cost = cost;
    }
    const int base = t_.neck(k);
    std::size_t last = k;
    for (std::size_t i = 0; i < node.leaves->size(); ++i) {
      const auto& leaf = (*node.leaves)[i];
      const std::size_t q = *t_.neck_index_of_level(base + static_cast<int>(leaf.size()));
      last = std::max(last, q);
      if (q + R_ <= L_) {
        WordPath child_root = node.root;
        child_root.insert(child_root.end(), leaf.begin(), leaf.end());
        node.children.emplace_back(i, build(q, std::move(child_root)));
      }
    }
    node.tag.last_neck = last;
    return node;
  }

  std::size_t count() const { return count_; }

 private:
  // All words of Ξ^k ω from neck 0 to neck m, with their log Φ^s sum.
  std::pair<std::shared_ptr<const std::vector<WordPath>>, double> level_words(std::size_t k,
                                                                              std::size_t m) {
    const auto key = std::make_pair(k, m);
    auto it = level_cache_.find(key);
    if (it != level_cache_.end()) return it->second;
    const auto shifted = t_.shifted(k);
    auto words = std::make_shared<std::vector<WordPath>>();
    LogSumExp acc;
    for_each_word(shifted, shifted.neck(m), [&](const WordVisit& w) {
      words->emplace_back(w.symbols.begin(), w.symbols.end());
      acc.add(log_phi(w.linear.log_spectrum(), s_));
    });
    auto entry = std::make_pair(std::shared_ptr<const std::vector<WordPath>>(words), acc.value());
    level_cache_.emplace(key, entry);
    return entry;
  }

  const NeckCodeTree& t_;
  std::size_t L_;
  std::size_t R_;
  double s_;
  std::size_t count_ = 0;
  std::vector<std::optional<bool>> member_;
  std::vector<std::shared_ptr<const std::vector<WordPath>>> cover_;
  std::map<std::size_t, double> cover_cost_;
  std::map<std::pair<std::size_t, std::size_t>,
           std::pair<std::shared_ptr<const std::vector<WordPath>>, double>>
      level_cache_;
};

void collect_final(const TaggedSubtree& node, std::vector<WordPath>& out) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < node.leaves->size(); ++i) {
    if (c < node.children.size() && node.children[c].first == i) {
      collect_final(node.children[c].second, out);
      ++c;
      continue;
    }
    WordPath w = node.root;
    const auto& leaf = (*node.leaves)[i];
    w.insert(w.end(), leaf.begin(), leaf.end());
    out.push_back(std::move(w));
  }
}

}  // namespace

DecompositionTree decompose(const NeckCodeTree& t, std::size_t L, std::size_t R, double s) {
  if (R < 1 || L < R) throw ArgumentError("decomposition needs 1 <= R <= L");
  if (!(s >= 0.0)) throw DomainError("s must be non-negative");
  if (t.block_count() + 1 < L + R) {
    throw DepthError("decomposition with L = " + std::to_string(L) + ", R = " +
                     std::to_string(R) + " needs " + std::to_string(L + R - 1) +
                     " blocks, tree has " + std::to_string(t.block_count()));
  }
  Decomposer dec(t, L, R, s);
  DecompositionTree out;
  out.L = L;
  out.R = R;
  out.s = s;
  out.root = dec.build(0, {});
  out.subtree_count = dec.count();
  out.member.resize(L);
  std::size_t misses = 0;
  for (std::size_t k = 0; k < L; ++k) {
    out.member[k] = dec.member(k);
    if (!out.member[k]) {
      ++misses;
      out.q_l += t.neck(k + 1) - t.neck(k);
    }
  }
  out.nonmember_fraction = static_cast<double>(misses) / static_cast<double>(L);
  out.nonmember_depth_fraction =
      static_cast<double>(out.q_l) / static_cast<double>(t.neck(L));
  return out;
}

std::int64_t q_l(const DecompositionTree& d) { return d.q_l; }

std::vector<WordPath> final_leaves(const DecompositionTree& d) {
  std::vector<WordPath> out;
  collect_final(d.root, out);
  return out;
}

std::vector<SubtreeBound> subtree_bounds(const NeckCodeTree& t, const DecompositionTree& d) {
  std::vector<SubtreeBound> out;
  const double log_m = std::log(static_cast<double>(t.family().max_branch));
  auto visit = [&](auto& self, const TaggedSubtree& node) -> void {
    for (const auto& [i, child] : node.children) self(self, child);
    std::vector<WordPath> leaves;
    collect_final(node, leaves);
    const std::size_t f = node.tag.first_neck;
    const auto shifted = t.shifted(f);
    const std::size_t prefix = node.root.size();
    SubtreeBound b;
    b.tag = node.tag;
    b.root = node.root;
    LogSumExp acc;
    for (const auto& w : leaves) {
      const std::span<const int> rel(w.data() + prefix, w.size() - prefix);
      acc.add(log_phi(product_along(shifted, rel).linear.log_spectrum(), d.s));
      b.last_neck = std::max(b.last_neck, *t.neck_index_of_level(static_cast<int>(w.size())));
    }
    b.log_sum = acc.value();
    std::int64_t exponent = 0;
    for (std::size_t k = f; k < b.last_neck; ++k) {
      if (!d.member[k]) exponent += t.neck(k + 1) - t.neck(k);
    }
    b.log_bound = static_cast<double>(exponent) * log_m;
    b.ok = b.log_sum <= b.log_bound + Tolerances::kStarSlack;
    out.push_back(std::move(b));
  };
  visit(visit, d.root);
  return out;
}

StarReport verify_star(const NeckCodeTree& t, std::size_t L, std::size_t R, double s,
                       std::uint64_t word_cap) {
  if (L < 1 || L > t.block_count()) throw DepthError("L outside the materialized necks");
  const int nl = t.neck(L);
  if (word_count(t, nl) > word_cap) {
    throw InfeasibleError("exact partition sum at N_L is above the word cap; try a smaller L");
  }
  const auto d = decompose(t, L, R, s);
  StarReport r;
  r.lhs = partition_sum(t, nl, s, word_cap);
  r.q_l = d.q_l;
  const double log_m = std::log(static_cast<double>(t.family().max_branch));
  r.rhs = static_cast<double>(d.q_l + nl - t.neck(L - R)) * log_m;
  r.ok = r.lhs <= r.rhs + Tolerances::kStarSlack;
  return r;
}

}  // namespace affcode
