#include <doctest.h>

#include <cmath>
#include <limits>

#include "affcode/errors.hpp"
#include "affcode/family.hpp"
#include "affcode/linalg.hpp"
#include "affcode/logsumexp.hpp"
#include "affcode/svf.hpp"
#include "test_support.hpp"

using namespace affcode;
using testing::oracle_log_phi;

TEST_SUITE("svf") {

TEST_CASE("singular values of diagonal and rotated matrices") {
  const auto s = singular_values(Matrix::diagonal({0.3, -0.5}));
  CHECK(s.dim() == 2);
  CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.3).epsilon(1e-15));

  const double c = std::cos(0.7);
  const double sn = std::sin(0.7);
  const Matrix rot{{c, -sn}, {sn, c}};
  const auto r = singular_values(rot * Matrix::diagonal({0.25, 0.75}) * rot.transpose());
  CHECK(r[0] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(r[1] == doctest::Approx(0.25).epsilon(1e-13));

  CHECK(singular_values(Matrix{{-0.4}})[0] == doctest::Approx(0.4));
}

TEST_CASE("singular values match the characteristic polynomial in d = 2 and 3") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const Matrix t2 = testing::random_entries(rng, 2);
    if (std::abs(t2.determinant()) < 1e-3) continue;
    const auto ours = singular_values(t2);
    const auto ref = testing::oracle_sv2(t2);
    CHECK(ours[0] == doctest::Approx(ref[0]).epsilon(1e-12));
    CHECK(ours[1] == doctest::Approx(ref[1]).epsilon(1e-10));
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix t3 = testing::random_matrix(rng, 3, 0.1, 0.9);
    const auto ours = singular_values(t3);
    const auto ref = testing::oracle_sv3(t3);
    for (int i = 0; i < 3; ++i) CHECK(ours[i] == doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
  }
}

TEST_CASE("spectrum product equals |det| and is sorted") {
  Rng rng(5);
  for (int d = 1; d <= 4; ++d) {
    for (int trial = 0; trial < 200; ++trial) {
      const Matrix t = testing::random_matrix(rng, d, 0.05, 0.95);
      const auto s = singular_values(t);
      CHECK(s.product() == doctest::Approx(std::abs(t.determinant())).epsilon(Tolerances::kIdentityRel * 10));
      for (int i = 0; i + 1 < d; ++i) CHECK(s[i] >= s[i + 1]);
    }
  }
}

TEST_CASE("singular or non-finite matrices are rejected") {
  CHECK_THROWS_AS(singular_values(Matrix{{1.0, 2.0}, {2.0, 4.0}}), InvalidMatrixError);
  CHECK_THROWS_AS(singular_values(Matrix::diagonal({0.5, 0.0})), InvalidMatrixError);
  CHECK_THROWS_AS(singular_values(Matrix::diagonal({0.5, std::nan("")})), InvalidMatrixError);
  CHECK_THROWS_AS(phi(Matrix::diagonal({0.5, 0.0}), 0.0), InvalidMatrixError);
  CHECK_THROWS_AS(Matrix::from_row_major(2, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("phi closed forms") {
  const Matrix t = Matrix::diagonal({0.5, 1.0 / 3.0});
  CHECK(phi(t, 0.0) == doctest::Approx(1.0));
  CHECK(phi(t, 0.5) == doctest::Approx(std::sqrt(0.5)));
  CHECK(phi(t, 1.0) == doctest::Approx(0.5));
  CHECK(phi(t, 1.5) == doctest::Approx(0.5 * std::sqrt(1.0 / 3.0)));
  CHECK(phi(t, 2.0) == doctest::Approx(1.0 / 6.0));
  CHECK(phi(t, 3.0) == doctest::Approx(0.5 * (1.0 / 3.0) * (1.0 / 3.0)));
  CHECK(phi(Matrix{{0.25}}, 2.5) == doctest::Approx(std::pow(0.25, 2.5)));
  CHECK_THROWS_AS(phi(t, -0.1), DomainError);
  CHECK_THROWS_AS(log_phi(t, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("log phi agrees with the definition on random matrices") {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + rng.below(4);
    const Matrix t = testing::random_matrix(rng, d, 0.05, 0.95);
    const auto sv = singular_values(t);
    std::vector<double> v;
    for (int i = 0; i < d; ++i) v.push_back(sv[i]);
    const double s = rng.uniform(0.0, d + 1.5);
    CHECK(log_phi(t, s) == doctest::Approx(oracle_log_phi(v, s)).epsilon(1e-12));
  }
}

TEST_CASE("log phi is piecewise linear in s with integer breakpoints") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + rng.below(3);
    const Matrix t = testing::random_matrix(rng, d, 0.05, 0.95);
    for (int m = 0; m < d + 1; ++m) {
      const double a = log_phi(t, m);
      const double b = log_phi(t, m + 1);
      const double u = rng.uniform();
      CHECK(log_phi(t, m + u) == doctest::Approx((1 - u) * a + u * b).epsilon(1e-12));
    }
    const double left = log_phi(t, 1.0) - log_phi(t, 0.5);
    const double right = log_phi(t, 1.5) - log_phi(t, 1.0);
    CHECK(right < left);
  }
}

TEST_CASE("phi is submultiplicative with the lower product bound") {
  Rng rng(99);
  const double slack = Tolerances::kInequalitySlack;
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 1 + rng.below(4);
    const Matrix a = testing::random_matrix(rng, d, 0.05, 0.95);
    const Matrix b = testing::random_matrix(rng, d, 0.05, 0.95);
    const double s = rng.uniform(0.0, d);
    const double lab = log_phi(a * b, s);
    CHECK(lab <= log_phi(a, s) + log_phi(b, s) + slack);
    CHECK(lab >= log_phi(a, s) + s * std::log(singular_values(b).smallest()) - slack);
  }
}

TEST_CASE("beyond the ambient dimension phi is not submultiplicative") {
  Rng rng(99);
  int failures = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Matrix a = testing::random_matrix(rng, 2, 0.05, 0.95);
    const Matrix b = testing::random_matrix(rng, 2, 0.05, 0.95);
    if (log_phi(a * b, 3.0) > log_phi(a, 3.0) + log_phi(b, 3.0) + 1e-10) ++failures;
  }
  CHECK(failures > 0);
}

TEST_CASE("singular values of an upper triangular example") {
  const auto s = singular_values(Matrix{{0.3, 0.1}, {0.0, 0.2}});
  CHECK(s[0] == doctest::Approx(0.325662).epsilon(1e-6));
  CHECK(s[1] == doctest::Approx(0.184240).epsilon(1e-6));
  CHECK(s.product() == doctest::Approx(0.06).epsilon(1e-14));
  const auto id = singular_values(Matrix::identity(2));
  CHECK(id[0] == 1.0);
  CHECK(id[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("phi bounds") {
  const auto [lo, hi] = phi_bounds(1.5, 0.2, 0.4);
  CHECK(lo == doctest::Approx(std::pow(0.2, 1.5)));
  CHECK(hi == doctest::Approx(std::pow(0.4, 1.5)));
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix t = testing::random_matrix(rng, 3, 0.2, 0.4);
    const double s = rng.uniform(0.0, 3.0);
    const auto [l, h] = phi_bounds(s, 0.2, 0.4);
    const double v = phi(t, s);
    CHECK(v >= l * (1 - 1e-12));
    CHECK(v <= h * (1 + 1e-12));
  }
  CHECK_THROWS_AS(phi_bounds(1.0, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(phi_bounds(1.0, 0.5, 0.4), DomainError);
  CHECK_THROWS_AS(phi_bounds(-1.0, 0.2, 0.4), DomainError);
}

TEST_CASE("compose is function composition") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + rng.below(4);
    AffineMap f{testing::random_entries(rng, d), Vector(d)};
    AffineMap g{testing::random_entries(rng, d), Vector(d)};
    Vector x(d);
    for (int i = 0; i < d; ++i) {
      f.translation[i] = rng.uniform(-1, 1);
      g.translation[i] = rng.uniform(-1, 1);
      x[i] = rng.uniform(-1, 1);
    }
    const Vector lhs = compose(f, g)(x);
    const Vector rhs = f(g(x));
    for (int i = 0; i < d; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13));
  }
}

TEST_CASE("scaled products keep deep spectra") {
  Rng rng(17);
  std::vector<Matrix> factors;
  for (int i = 0; i < 400; ++i) factors.push_back(testing::random_matrix(rng, 3, 0.1, 0.5));
  ScaledProduct p(3);
  Matrix direct = Matrix::identity(3);
  double log_det = 0.0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    p.right_multiply(factors[i]);
    log_det += std::log(std::abs(factors[i].determinant()));
    if (i == 9) {
      for (std::size_t j = 0; j <= 9; ++j) direct = direct * factors[j];
      const auto ref = log_singular_values(direct);
      const auto got = p.log_spectrum();
      for (int k = 0; k < 3; ++k) {
        CHECK(got.values[static_cast<std::size_t>(k)] ==
              doctest::Approx(ref.values[static_cast<std::size_t>(k)]).epsilon(1e-10));
      }
    }
  }
  const auto spec = p.log_spectrum();
  CHECK(std::isfinite(spec.values[2]));
  CHECK(spec.values[0] + spec.values[1] + spec.values[2] == doctest::Approx(log_det).epsilon(1e-12));
  CHECK(spec.values[0] >= spec.values[1]);
  CHECK(spec.values[1] >= spec.values[2]);
  CHECK(p.log_scale() < -300.0);
}

TEST_CASE("log-sum-exp") {
  LogSumExp a;
  CHECK(a.value() == -std::numeric_limits<double>::infinity());
  double naive = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double x = std::sin(i) * 5.0;
    a.add(x);
    naive += std::exp(x);
  }
  CHECK(a.value() == doctest::Approx(std::log(naive)).epsilon(1e-14));
  LogSumExp big;
  big.add(-2000.0);
  big.add(-2000.0);
  CHECK(big.value() == doctest::Approx(-2000.0 + std::log(2.0)));
  LogSumExp b;
  b.add(1.0);
  LogSumExp c;
  c.add(2.0);
  b.merge(c);
  CHECK(b.value() == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0))));
}

TEST_CASE("family validation") {
  auto f = *testing::diag_family(3, 0.45, 0.3);
  CHECK(validate_family(f).ok());
  CHECK(f.sigma_hi == doctest::Approx(0.45));
  CHECK(f.sigma_lo == doctest::Approx(0.3));
  CHECK(f.max_branch == 3);

  auto wide = f;
  wide.sigma_hi = 0.4;
  const auto r = validate_family(wide);
  REQUIRE(r.violations.size() == 3);
  CHECK(r.violations[0].label == 0);
  CHECK(r.violations[0].what.find("sigma_hi") != std::string::npos);

  auto singular = f;
  singular.systems[0].maps[1].linear = Matrix::diagonal({0.3, 0.0});
  const auto rs = validate_family(singular);
  REQUIRE(rs.violations.size() == 1);
  CHECK(rs.violations[0].index == 1);
  CHECK(rs.violations[0].what.find("non-singular") != std::string::npos);

  auto far = f;
  far.systems[0].maps[2].translation = Vector{3.0, 4.0};
  far.trans_bound = 4.9;
  CHECK(validate_family(far).violations.size() == 1);

  auto crowded = f;
  crowded.max_branch = 2;
  CHECK_FALSE(validate_family(crowded).ok());

  auto no_contraction = f;
  no_contraction.sigma_hi = 1.0;
  CHECK_FALSE(validate_family(no_contraction).ok());
}

}  // TEST_SUITE
