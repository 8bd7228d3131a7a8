#include <doctest.h>

#include <cmath>

#include "affcode/decomposer.hpp"
#include "affcode/netmeasure.hpp"
#include "affcode/pressure.hpp"
#include "test_support.hpp"

using namespace affcode;

namespace {

NeckCodeTree random_tree(Rng& rng, std::size_t blocks, std::uint64_t seed) {
  auto f = testing::random_family(rng, 2, 2, 2, 0.2, 0.45);
  auto mu = testing::random_measure(rng, f, 2, 2);
  return sample_tree(mu, blocks, seed);
}

void check_final_leaves(const NeckCodeTree& t, const DecompositionTree& d) {
  const auto leaves = final_leaves(d);
  REQUIRE_FALSE(leaves.empty());
  std::size_t deepest = 0;
  for (const auto& w : leaves) {
    const auto q = t.neck_index_of_level(static_cast<int>(w.size()));
    REQUIRE(q.has_value());
    CHECK(*q + d.R > d.L);
    deepest = std::max(deepest, *q);
  }
  for (std::size_t i = 0; i + 1 < leaves.size(); ++i) {
    CHECK(leaves[i] < leaves[i + 1]);
    CHECK_FALSE(testing::is_prefix(leaves[i], leaves[i + 1]));
  }
  std::uint64_t total = 0;
  for (const auto& w : leaves) {
    const auto q = *t.neck_index_of_level(static_cast<int>(w.size()));
    CHECK(contains_word(t, w));
    total += q == deepest ? 1 : neck_word_count(t, q, deepest);
  }
  CHECK(total == word_count(t, t.neck(deepest)));
}

}  // namespace

TEST_SUITE("decomposer") {

TEST_CASE("membership is the f_R < 1 predicate") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_tree(rng, 6, trial);
    if (word_count(t, t.total_depth()) > 40000) continue;
    const double s = rng.uniform(0.3, 2.0);
    for (std::size_t R = 1; R <= 3; ++R) {
      CHECK(membership(t, s, R) == (f_n(t, s, R) < 1.0));
      CHECK(membership(t, s, R) == witness_c_r(t, s, R).has_value());
    }
  }
  const auto cantor = testing::homogeneous_tree(testing::cantor_family(), 3);
  CHECK_THROWS_AS(membership(cantor, 1.0, 4), DepthError);
  CHECK_THROWS_AS(membership(cantor, 1.0, 0), ArgumentError);
}

TEST_CASE("Q_L counts the depths of non-member shifts") {
  Rng rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const auto t = random_tree(rng, 9, trial);
    if (word_count(t, t.total_depth()) > 100000) continue;
    const std::size_t R = 2;
    const std::size_t L = 4 + static_cast<std::size_t>(rng.below(3));
    const double s = rng.uniform(0.5, 1.8);
    const auto d = decompose(t, L, R, s);
    std::int64_t q = 0;
    std::size_t misses = 0;
    for (std::size_t k = 0; k < L; ++k) {
      const bool m = f_n(t.shifted(k), s, R) < 1.0;
      CHECK(d.member[k] == m);
      if (!m) {
        q += t.block(k).depth();
        ++misses;
      }
    }
    CHECK(q_l(d) == q);
    CHECK(d.nonmember_fraction == doctest::Approx(static_cast<double>(misses) / L));
    CHECK(d.nonmember_depth_fraction == doctest::Approx(static_cast<double>(q) / t.neck(L)));
    check_final_leaves(t, d);
  }
}

TEST_CASE("subtree tags follow membership") {
  Rng rng(7);
  const auto t = random_tree(rng, 10, 11);
  const auto d = decompose(t, 6, 2, 1.0);
  std::size_t seen = 0;
  std::vector<const TaggedSubtree*> stack{&d.root};
  while (!stack.empty()) {
    const auto* n = stack.back();
    stack.pop_back();
    ++seen;
    CHECK(n->root.size() == static_cast<std::size_t>(t.neck(n->tag.first_neck)));
    CHECK((n->tag.kind == SubtreeKind::kCClass) == d.member[n->tag.first_neck]);
    if (n->tag.kind == SubtreeKind::kCClass) {
      CHECK(n->log_cost < 0.0);
      CHECK(n->tag.last_neck <= n->tag.first_neck + d.R);
    }
    CHECK(n->tag.last_neck > n->tag.first_neck);
    for (const auto& c : n->children) {
      CHECK(c.second.tag.first_neck >= n->tag.first_neck + 1);
      stack.push_back(&c.second);
    }
  }
  CHECK(seen == d.subtree_count);
}

TEST_CASE("Cantor tree above and below the zero") {
  const auto t = testing::homogeneous_tree(testing::cantor_family(), 12);
  const auto above = decompose(t, 6, 2, 0.8);
  CHECK(q_l(above) == 0);
  for (bool m : above.member) CHECK(m);
  CHECK(above.root.tag.kind == SubtreeKind::kCClass);
  check_final_leaves(t, above);

  const auto below = decompose(t, 6, 2, 0.5);
  CHECK(q_l(below) == 6);
  for (bool m : below.member) CHECK_FALSE(m);
  CHECK(below.root.tag.kind == SubtreeKind::kHClass);
  CHECK(below.subtree_count == 1);
  CHECK(final_leaves(below).size() == 64);

  const auto star = verify_star(t, 6, 2, 0.8);
  CHECK(star.ok);
  CHECK(star.lhs == doctest::Approx(6 * (std::log(2.0) - 0.8 * std::log(3.0))));
  CHECK(star.rhs == doctest::Approx(2 * std::log(2.0)));
}

TEST_CASE("star inequality and per-subtree bounds on random trees") {
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t R = 1 + static_cast<std::size_t>(rng.below(3));
    const std::size_t L = R + static_cast<std::size_t>(rng.below(5));
    const auto t = random_tree(rng, L + R + 2, 100 + trial);
    if (word_count(t, t.neck(L)) > 50000 || word_count(t, t.neck(L + R - 1)) > 200000) continue;
    const double s = rng.uniform(0.2, 2.2);
    const auto star = verify_star(t, L, R, s);
    CHECK(star.ok);
    CHECK(star.lhs == doctest::Approx(partition_sum(t, t.neck(L), s)));
    const auto d = decompose(t, L, R, s);
    CHECK(star.q_l == q_l(d));
    for (const auto& b : subtree_bounds(t, d)) {
      CHECK(b.ok);
      CHECK(b.log_sum <= b.log_bound + Tolerances::kInequalitySlack);
    }
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("decomposition preconditions") {
  const auto t = testing::homogeneous_tree(testing::cantor_family(), 6);
  CHECK_THROWS_AS(decompose(t, 2, 3, 1.0), ArgumentError);
  CHECK_THROWS_AS(decompose(t, 3, 0, 1.0), ArgumentError);
  CHECK_THROWS_AS(decompose(t, 5, 3, 1.0), DepthError);
  CHECK_NOTHROW(decompose(t, 4, 3, 1.0));
  CHECK_THROWS_AS(decompose(t, 3, 2, -1.0), DomainError);
  CHECK_THROWS_AS(verify_star(t, 7, 1, 1.0), DepthError);
  CHECK_THROWS_AS(verify_star(t, 6, 1, 1.0, 16), InfeasibleError);
}

}  // TEST_SUITE
