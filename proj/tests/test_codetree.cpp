#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "affcode/codetree.hpp"
#include "affcode/svf.hpp"
#include "test_support.hpp"

using namespace affcode;

namespace {

// Label sequence of the subtree below a position, to a fixed depth, in DFS order.
void subtree_signature(const NeckCodeTree& t, NeckCodeTree::Position pos, int depth,
                       std::vector<int>& out) {
  if (depth == 0) return;
  out.push_back(t.label(pos));
  for (int i = 0; i < t.branching(pos); ++i) subtree_signature(t, t.child(pos, i), depth - 1, out);
}

}  // namespace

TEST_SUITE("codetree") {

TEST_CASE("templates from levels and from nodes") {
  Rng rng(1);
  auto f = testing::random_family(rng, 2, 2, 3);
  const int m0 = f->branching(0);
  const int m1 = f->branching(1);
  const auto a = BlockTemplate::from_levels(*f, {0, 1});
  CHECK(a.depth() == 2);
  CHECK(a.level_size(0) == 1);
  CHECK(a.level_size(1) == static_cast<std::size_t>(m0));
  CHECK(a.leaf_count() == static_cast<std::size_t>(m0 * m1));
  CHECK(a.node_count() == static_cast<std::size_t>(1 + m0 + m0 * m1));

  std::vector<int> labels{0};
  for (int i = 0; i < m0; ++i) labels.push_back(1);
  const auto b = BlockTemplate::from_nodes(*f, 2, labels);
  CHECK(a == b);
  labels.push_back(0);
  CHECK_THROWS_AS(BlockTemplate::from_nodes(*f, 2, labels), ConfigError);
  CHECK_THROWS_AS(BlockTemplate::from_levels(*f, {}), ConfigError);
  CHECK_THROWS_AS(BlockTemplate::from_levels(*f, {5}), Error);
}

TEST_CASE("block measure validation") {
  Rng rng(2);
  auto f = testing::random_family(rng, 2, 2, 2);
  BlockMeasure mu;
  mu.family = f;
  CHECK_THROWS_AS(mu.validate(), ConfigError);
  mu.templates.push_back(std::make_shared<const BlockTemplate>(BlockTemplate::from_levels(*f, {0})));
  mu.templates.push_back(std::make_shared<const BlockTemplate>(BlockTemplate::from_levels(*f, {1, 0})));
  mu.weights = {0.5, 0.4};
  CHECK_THROWS_AS(mu.validate(), ConfigError);
  mu.weights = {1.2, -0.2};
  CHECK_THROWS_AS(mu.validate(), ConfigError);
  mu.weights = {0.25, 0.75};
  CHECK_NOTHROW(mu.validate());
  CHECK(mu.mean_first_neck() == doctest::Approx(1.75));
  CHECK_THROWS_AS(sample_tree(mu, 0, 1), ConfigError);
}

TEST_CASE("sampling is seeded, i.i.d. and neck-homogeneous") {
  Rng rng(3);
  auto f = testing::random_family(rng, 2, 3, 3);
  auto mu = testing::random_measure(rng, f, 3, 3);
  const auto t1 = sample_tree(mu, 30, 77);
  const auto t2 = sample_tree(mu, 30, 77);
  const auto t3 = sample_tree(mu, 30, 78);
  bool same = true;
  bool differs = false;
  for (std::size_t m = 0; m < 30; ++m) {
    same = same && t1.blocks()[m] == t2.blocks()[m];
    differs = differs || t1.blocks()[m] != t3.blocks()[m];
  }
  CHECK(same);
  CHECK(differs);

  // Frequencies of a long sample.
  const auto big = sample_tree(mu, 20000, 5);
  std::map<const BlockTemplate*, int> counts;
  for (const auto& b : big.blocks()) ++counts[b.get()];
  for (std::size_t i = 0; i < mu.templates.size(); ++i) {
    const double p = mu.weights[i];
    const double freq = counts[mu.templates[i].get()] / 20000.0;
    CHECK(std::abs(freq - p) < 4.0 * std::sqrt(p * (1 - p) / 20000.0));
  }

  // Every node at neck level N_m roots the same labeled subtree down to N_{m+2}.
  const auto t = sample_tree(mu, 6, 9);
  for (std::size_t m = 0; m + 2 <= t.block_count(); ++m) {
    if (word_count(t, t.neck(m)) > 200) break;
    const int span = t.neck(m + 2) - t.neck(m);
    std::set<std::vector<int>> sigs;
    for_each_word(t, t.neck(m), [&](const WordVisit& w) {
      std::vector<int> sig;
      subtree_signature(t, position_of(t, w.symbols), span, sig);
      sigs.insert(sig);
    });
    CHECK(sigs.size() == 1);
  }
}

TEST_CASE("necks and shift") {
  Rng rng(4);
  auto f = testing::random_family(rng, 2, 2, 2);
  auto mu = testing::random_measure(rng, f, 3, 3);
  const auto t = sample_tree(mu, 8, 12);
  CHECK(t.neck(0) == 0);
  int acc = 0;
  for (std::size_t m = 0; m < t.block_count(); ++m) {
    acc += t.block(m).depth();
    CHECK(t.neck(m + 1) == acc);
    CHECK(t.neck_index_of_level(acc) == m + 1);
  }
  CHECK(t.necks().size() == t.block_count());
  CHECK(t.total_depth() == acc);

  const auto s = shift(t);
  CHECK(s.block_count() == t.block_count() - 1);
  for (std::size_t m = 0; m <= s.block_count(); ++m) CHECK(s.neck(m) == t.neck(m + 1) - t.neck(1));
  CHECK(t.shifted(3).neck(2) == t.neck(5) - t.neck(3));

  // The shifted tree is the subtree below any first-neck node.
  const int k = std::min(4, s.total_depth());
  std::vector<WordPath> below;
  for_each_word(t, t.neck(1) + k, [&](const WordVisit& w) {
    if (std::all_of(w.symbols.begin(), w.symbols.begin() + t.neck(1), [](int x) { return x == 0; })) {
      below.emplace_back(w.symbols.begin() + t.neck(1), w.symbols.end());
    }
  });
  CHECK(below == testing::all_words(s, k));

  NeckCodeTree single = sample_tree(mu, 1, 1);
  CHECK_THROWS_AS(shift(single), EmptyShiftError);
}

TEST_CASE("word counts and enumeration") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = testing::random_family(rng, 1 + rng.below(3), 3, 3);
    auto mu = testing::random_measure(rng, f, 2, 3);
    const auto t = sample_tree(mu, 5, trial);
    for (int k = 0; k <= std::min(t.total_depth(), 7); ++k) {
      const auto ref = testing::all_words(t, k);
      std::vector<WordPath> got;
      for_each_word(t, k, [&](const WordVisit& w) { got.emplace_back(w.symbols.begin(), w.symbols.end()); });
      CHECK(got == ref);
      CHECK(word_count(t, k) == ref.size());
      for (const auto& w : ref) CHECK(contains_word(t, w));
    }
    for (std::size_t n = 0; n < 3; ++n) {
      for (std::size_t m = n + 1; m <= 4; ++m) {
        std::uint64_t prod = 1;
        for (std::size_t b = n; b < m; ++b) prod *= t.block(b).leaf_count();
        CHECK(neck_word_count(t, n, m) == prod);
      }
    }
    CHECK(neck_word_count(t, 0, 1) == word_count(t, t.neck(1)));
    CHECK_THROWS_AS(neck_word_count(t, 2, 2), ArgumentError);
  }
}

TEST_CASE("word enumeration edge cases") {
  auto f = testing::cantor_family();
  const auto t = testing::homogeneous_tree(f, 4);
  int visits = 0;
  for_each_word(t, 0, [&](const WordVisit& w) {
    ++visits;
    CHECK(w.symbols.empty());
    CHECK(w.linear.value() == Matrix::identity(1));
  });
  CHECK(visits == 1);
  CHECK_THROWS_AS(for_each_word(t, 5, [](const WordVisit&) {}), DepthError);
  CHECK_THROWS_AS(for_each_word(t, -1, [](const WordVisit&) {}), DepthError);
  CHECK_FALSE(contains_word(t, WordPath{0, 2}));
  CHECK_THROWS_AS(product_along(t, WordPath{3}), ArgumentError);
  CHECK(word_count(testing::homogeneous_tree(f, 80), 80) == UINT64_MAX);
}

TEST_CASE("products along words match naive composition") {
  Rng rng(7);
  auto f = testing::random_family(rng, 3, 2, 3);
  auto mu = testing::random_measure(rng, f, 2, 2);
  const auto t = sample_tree(mu, 4, 3);
  const int k = std::min(5, t.total_depth());
  for_each_word(t, k, [&](const WordVisit& w) {
    const WordPath word(w.symbols.begin(), w.symbols.end());
    const Matrix ref = testing::naive_product(t, word);
    AffineMap composed = AffineMap::identity(3);
    auto pos = t.root();
    for (int sym : word) {
      composed = compose(composed, t.edge_map(pos, sym));
      pos = t.child(pos, sym);
    }
    const Matrix got = w.linear.value();
    const auto prod = product_along(t, word);
    for (int r = 0; r < 3; ++r) {
      CHECK(w.origin_image[r] == doctest::Approx(composed.translation[r]).epsilon(1e-12));
      CHECK(prod.origin_image[r] == doctest::Approx(composed.translation[r]).epsilon(1e-12));
      for (int c = 0; c < 3; ++c) {
        CHECK(got(r, c) == doctest::Approx(ref(r, c)).epsilon(1e-12));
      }
    }
    CHECK(w.linear.log_abs_det() == doctest::Approx(std::log(std::abs(ref.determinant()))).epsilon(1e-12));
  });
}

}  // TEST_SUITE
