#include <doctest.h>

#include <cmath>
#include <numbers>

#include "affcode/netmeasure.hpp"
#include "affcode/svf.hpp"
#include "test_support.hpp"

using namespace affcode;

namespace {

std::vector<int> range(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

std::vector<int> neck_range(const NeckCodeTree& t, int lo, int hi) {
  std::vector<int> out;
  for (int m = lo; m <= hi; ++m) out.push_back(t.neck(static_cast<std::size_t>(m)));
  return out;
}

// Every bottom word has exactly one prefix in the cover.
bool is_partition(const NeckCodeTree& t, const std::vector<WordPath>& cover, int bottom) {
  for (std::size_t i = 0; i < cover.size(); ++i) {
    for (std::size_t j = 0; j < cover.size(); ++j) {
      if (i != j && testing::is_prefix(cover[i], cover[j])) return false;
    }
  }
  for (const auto& w : testing::all_words(t, bottom)) {
    int hits = 0;
    for (const auto& c : cover) hits += testing::is_prefix(c, w) ? 1 : 0;
    if (hits != 1) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("netmeasure") {

TEST_CASE("forced leaves and the root option") {
  IfsSystem sys;
  sys.maps.push_back(AffineMap{Matrix{{0.4}}, Vector{0.0}});
  sys.maps.push_back(AffineMap{Matrix{{0.4}}, Vector{0.5}});
  auto f = std::make_shared<const IfsFamily>(IfsFamily::with_tight_bounds(1, {sys}));
  const auto t = testing::homogeneous_tree(f, 1);
  const auto c = best_cover(t, 1.0, 1, 1, false);
  CHECK(c.cost == doctest::Approx(0.8));
  CHECK(c.nodes.size() == 2);
  const auto r = best_cover(t, 1.0, 0, 1, false);
  CHECK(r.cost == doctest::Approx(0.8));
  const auto root = best_cover(t, 0.0, 0, 1, false);
  CHECK(root.cost == doctest::Approx(1.0));
  REQUIRE(root.nodes.size() == 1);
  CHECK(root.nodes[0].empty());
  CHECK(root.constraint.min_index == 0);
}

TEST_CASE("cover DP equals the exhaustive antichain minimum") {
  Rng rng(123);
  for (int trial = 0; trial < 150; ++trial) {
    const auto t = testing::small_random_tree(rng, 12);
    const double s = rng.uniform(0.0, 2.5);
    const int bottom = t.total_depth();
    const int j = rng.below(bottom) + 1;
    const int top = j + rng.below(bottom - j + 1);
    const auto sol = best_cover(t, s, j, top, false);
    CHECK(std::abs(sol.log_cost - testing::brute_force_min(t, range(j, top), top, s)) <= 1e-10);
    CHECK(std::abs(sol.log_cost - testing::cover_log_cost(t, sol.nodes, s)) <= 1e-10);
    CHECK(is_partition(t, sol.nodes, top));
    for (const auto& w : sol.nodes) {
      CHECK(static_cast<int>(w.size()) >= j);
      CHECK(static_cast<int>(w.size()) <= top);
    }

    const int nb = static_cast<int>(t.block_count());
    const int jn = 1 + rng.below(nb);
    const auto neck = best_cover(t, s, jn, nb, true);
    CHECK(std::abs(neck.log_cost - testing::brute_force_min(t, neck_range(t, jn, nb), t.neck(nb), s)) <= 1e-10);
    for (const auto& w : neck.nodes) CHECK(t.neck_index_of_level(static_cast<int>(w.size())).has_value());
  }
}

TEST_CASE("f_n on the Cantor tree") {
  const auto t = testing::homogeneous_tree(testing::cantor_family(), 10);
  for (double s : {0.7, 1.0}) {
    const double q = 2.0 * std::pow(3.0, -s);
    for (std::size_t n = 1; n <= 10; ++n) CHECK(f_n(t, s, n) == doctest::Approx(std::pow(q, n)).epsilon(1e-12));
  }
  CHECK(f_n(t, 0.5, 6) == doctest::Approx(2.0 * std::pow(3.0, -0.5)).epsilon(1e-12));
  CHECK(f_n(t, 0.0, 4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(f_n(t, 1.0, 0), ArgumentError);
  CHECK_THROWS_AS(f_n(t, 1.0, 11), DepthError);

  const auto w = witness_c_r(t, 0.7, 8);
  REQUIRE(w.has_value());
  CHECK(w->cost == doctest::Approx(std::pow(2.0 * std::pow(3.0, -0.7), 8)).epsilon(1e-12));
  CHECK(w->nodes.size() == 256);
  CHECK_FALSE(witness_c_r(t, 0.6, 8).has_value());
  CHECK_FALSE(witness_c_r(t, 0.0, 3).has_value());
}

TEST_CASE("monotonicity and neck dominance") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = testing::random_family(rng, 2, 2, 3);
    auto mu = testing::random_measure(rng, f, 2, 2);
    const auto t = sample_tree(mu, 5, trial);
    const double s = rng.uniform(0.0, 2.0);
    const int nb = static_cast<int>(t.block_count());
    if (word_count(t, t.total_depth()) > 20000) continue;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= static_cast<std::size_t>(nb); ++n) {
      const double v = std::log(f_n(t, s, n));
      CHECK(v <= prev + 1e-12);
      prev = v;
      const double free = best_cover(t, s, t.neck(1), t.neck(n), false).log_cost;
      const double neck = best_cover(t, s, 1, static_cast<int>(n), true).log_cost;
      CHECK(neck >= free - 1e-12);
    }
    const int bottom = t.total_depth();
    for (int j = 1; j < bottom; ++j) {
      CHECK(best_cover(t, s, j + 1, bottom, false).log_cost >= best_cover(t, s, j, bottom, false).log_cost - 1e-12);
    }
    const CoverTree tree(t, CoverWindow{1, bottom, false});
    double last = tree.best_log_cost(0.0);
    for (int i = 1; i <= 30; ++i) {
      const double v = tree.best_log_cost(i * 0.1);
      CHECK(v < last);
      last = v;
    }
  }
}

TEST_CASE("affinity dimension of homogeneous systems") {
  const auto cantor = testing::homogeneous_tree(testing::cantor_family(), 12);
  const double c0 = std::log(2.0) / std::log(3.0);
  for (bool neck : {false, true}) {
    const auto e = affinity_dim(cantor, 12, 1e-8, neck);
    CHECK(e.crossed);
    CHECK(e.s_lo <= c0 + 1e-12);
    CHECK(e.s_hi >= c0 - 1e-12);
    CHECK(e.s_hi - e.s_lo <= 1e-8);
    CHECK(e.depth_used == 12);
    CHECK(e.neck_only == neck);
  }
  const auto diag = testing::homogeneous_tree(testing::diag_family(3, 0.5, 1.0 / 3.0), 9);
  const auto e = affinity_dim(diag, 9, 1e-7, false);
  const double d0 = 1.0 + std::log(1.5) / std::log(3.0);
  CHECK(e.s_lo <= d0 + 1e-9);
  CHECK(e.s_hi >= d0 - 1e-9);

  IfsSystem one;
  one.maps.push_back(AffineMap{Matrix{{0.5}}, Vector{0.0}});
  auto single = std::make_shared<const IfsFamily>(IfsFamily::with_tight_bounds(1, {one}));
  CHECK(affinity_dim(testing::homogeneous_tree(single, 4), 4, 1e-6, false).estimate() < 1e-6);
  CHECK_THROWS_AS(affinity_dim(cantor, 13, 1e-6, false), DepthError);
  CHECK_THROWS_AS(affinity_dim(cantor, 0, 1e-6, false), DepthError);
  CHECK_THROWS_AS(affinity_dim(cantor, 4, 0.0, false), ArgumentError);
}

TEST_CASE("neck and free estimates agree on random trees") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testing::random_family(rng, 2, 2, 2, 0.2, 0.45);
    auto mu = testing::random_measure(rng, f, 2, 2);
    const auto t = sample_tree(mu, 14, trial);
    if (word_count(t, t.total_depth()) > (1u << 16)) continue;
    const auto a = affinity_dim(t, 14, 1e-6, false);
    const auto b = affinity_dim(t, 14, 1e-6, true);
    CHECK(a.s_hi <= b.s_hi + 1e-6);
    CHECK(std::abs(a.estimate() - b.estimate()) < 0.1);
  }
}

TEST_CASE("sandwich inequality") {
  const auto cantor = testing::homogeneous_tree(testing::cantor_family(), 10);
  for (double s : {0.0, 0.5, 1.0}) {
    const auto r = sandwich_check(cantor, s, 2, 8);
    CHECK(r.ok);
    CHECK(r.log_lower <= r.log_value);
    if (s > 0.0) CHECK(r.log_lower < r.log_value);
  }
  const auto s0 = sandwich_check(cantor, 0.0, 2, 8);
  CHECK(s0.log_value == doctest::Approx(std::log(8.0)));
  CHECK(s0.log_shift_value == doctest::Approx(std::log(4.0)));

  Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = testing::random_family(rng, 2, 2, 3);
    auto mu = testing::random_measure(rng, f, 2, 2);
    const auto t = sample_tree(mu, 6, trial);
    if (word_count(t, t.total_depth()) > 50000) continue;
    for (double s : {0.5, 1.0, 1.5}) {
      const int n = rng.below(2);
      CHECK(sandwich_check(t, s, n, t.total_depth()).ok);
    }
  }
  CHECK_THROWS_AS(sandwich_check(testing::homogeneous_tree(testing::cantor_family(), 1), 1.0, 0, 1),
                  EmptyShiftError);
  CHECK_THROWS_AS(sandwich_check(cantor, 1.0, 5, 3), ArgumentError);
}

TEST_CASE("cover tree bookkeeping") {
  const auto t = testing::homogeneous_tree(testing::diag_family(3, 0.5, 0.3), 6);
  const CoverTree neck(t, CoverWindow{2, 4, true});
  CHECK(neck.depths() == std::vector<int>{0, 2, 3, 4});
  CHECK(neck.node_count() == 1 + 9 + 27 + 81);
  CHECK_THROWS_AS(CoverTree(t, CoverWindow{1, 6, false}, 100), InfeasibleError);
  CHECK_THROWS_AS(CoverTree(t, CoverWindow{3, 2, false}), ArgumentError);
  CHECK_THROWS_AS(CoverTree(t, CoverWindow{1, 7, false}), DepthError);
  CHECK_THROWS_AS(neck.best_log_cost(-1.0), DomainError);
}

}  // TEST_SUITE
