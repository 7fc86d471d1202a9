#include <cmath>
#include <limits>

#include "doctest.h"
#include "test_util.hpp"
#include "turbo/linalg.hpp"

using namespace turbo;
using testutil::gaussian;

TEST_CASE_TEMPLATE("matmul small cases", T, float, double) {
  const Matrix<T> m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  CHECK(matmul(Matrix<T>::identity(3), m) == m);
  CHECK(matmul(m, Matrix<T>::identity(3)) == m);

  const Matrix<T> a{{1, 2}, {3, 4}};
  const Matrix<T> p{{0, 1}, {1, 0}};
  CHECK(matmul(a, p) == Matrix<T>{{2, 1}, {4, 3}});

  CHECK_THROWS_AS(matmul(a, Matrix<T>(3, 2)), DimensionError);
}

TEST_CASE("matmul matches naive triple loop") {
  SUBCASE("integer-valued entries: every partial sum is exact, so must the product be") {
    std::mt19937_64 eng(5);
    std::uniform_int_distribution<int> pick(-9, 9);
    for (int trial = 0; trial < 20; ++trial) {
      MatrixD a(5, 5), b(5, 5);
      for (auto& v : a.data()) v = pick(eng);
      for (auto& v : b.data()) v = pick(eng);
      CHECK(matmul(a, b) == testutil::naive_matmul(a, b));
    }
  }
  SUBCASE("gaussian entries agree to rounding") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const MatrixD a = gaussian(5, 5, seed);
      const MatrixD b = gaussian(5, 5, seed + 100);
      CHECK(testutil::max_abs_diff(matmul(a, b), testutil::naive_matmul(a, b)) < 1e-14);
    }
  }
  SUBCASE("rectangular and larger") {
    const MatrixD a = gaussian(37, 91, 1);
    const MatrixD b = gaussian(91, 23, 2);
    CHECK(testutil::rel_fro_diff(matmul(a, b), testutil::naive_matmul(a, b)) < 1e-14);
    const MatrixF af = a.cast<float>(), bf = b.cast<float>();
    CHECK(testutil::rel_fro_diff(matmul(af, bf), testutil::naive_matmul(af, bf)) < 1e-5);
  }
}

TEST_CASE("matmul is deterministic") {
  const MatrixF a = gaussian(300, 200, 3).cast<float>();
  const MatrixF b = gaussian(200, 250, 4).cast<float>();
  CHECK(matmul(a, b) == matmul(a, b));
}

TEST_CASE("transpose") {
  const MatrixD a = gaussian(4, 7, 9);
  CHECK(transpose(a) == testutil::naive_transpose(a));
  CHECK(transpose(transpose(a)) == a);
}

TEST_CASE("gram") {
  SUBCASE("orthogonal input gives identity") {
    const MatrixD q = testutil::random_orthogonal(16, 7);
    CHECK(testutil::max_abs_diff(gram(q), MatrixD::identity(16)) < 1e-10);
  }
  SUBCASE("diagonal") {
    CHECK(gram(MatrixD::diagonal({2.0, 0.5})) == MatrixD::diagonal({4.0, 0.25}));
  }
  SUBCASE("matches matmul(transpose(x), x)") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const MatrixD x = gaussian(8, 8, seed);
      const MatrixD g = gram(x);
      const MatrixD ref = matmul(transpose(x), x);
      // The mirrored lower triangle is taken from the same product.
      for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j <= i; ++j) CHECK(g(i, j) == ref(i, j));
      }
      CHECK(testutil::max_abs_diff(g, ref) < 1e-13);
    }
  }
  SUBCASE("symmetric to the bit, tall and float") {
    const MatrixF x = gaussian(300, 70, 12).cast<float>();
    const MatrixF g = gram(x);
    REQUIRE(g.rows() == 70);
    CHECK(g == transpose(g));
    CHECK(testutil::rel_fro_diff(g, testutil::naive_matmul(testutil::naive_transpose(x), x)) < 1e-5);
  }
  SUBCASE("overflow is reported") {
    MatrixF x(2, 2, 1e30f);
    CHECK_THROWS_AS(gram(x), NonFiniteError);
  }
}

TEST_CASE("frobenius norm and inner product") {
  CHECK(frobenius_norm(MatrixD(3, 4)) == 0.0);
  CHECK(frobenius_norm(MatrixD::identity(9)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(frobenius_norm(MatrixD{{3, 4}}) == 5.0);
  CHECK(frobenius_norm(MatrixF{{3, 4}}) == 5.0);
  const MatrixD a = gaussian(6, 5, 1), b = gaussian(6, 5, 2);
  double ref = 0;
  for (std::size_t k = 0; k < a.size(); ++k) ref += a.data()[k] * b.data()[k];
  CHECK(frobenius_inner(a, b) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(frobenius_inner(a, a) == doctest::Approx(std::pow(frobenius_norm(a), 2)).epsilon(1e-14));
}

TEST_CASE("scale_columns") {
  const MatrixD x{{1, 2}, {3, 4}};
  const std::vector<double> s{10, 0.5};
  CHECK(scale_columns(x, std::span<const double>(s)) == MatrixD{{10, 1}, {30, 2}});
  CHECK(scale_columns(x, std::span<const double>(s)) == matmul(x, MatrixD::diagonal(std::span<const double>(s))));
  const std::vector<double> bad{1};
  CHECK_THROWS_AS(scale_columns(x, std::span<const double>(bad)), DimensionError);
}

TEST_CASE("spectral_norm_estimate") {
  CHECK(spectral_norm_estimate(MatrixD::diagonal({3.0, 1.0}), 100) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(spectral_norm_estimate(testutil::random_orthogonal(20, 3), 10) == doctest::Approx(1.0).epsilon(1e-8));

  const MatrixD x = gaussian(32, 32, 77);
  const double sigma1 = svd(x).sigma.front();
  const double est = spectral_norm_estimate(x, 2000);
  CHECK(est <= sigma1 * (1 + 1e-12));
  CHECK(std::abs(est - sigma1) < 1e-6);

  double prev = 0.0;
  for (std::size_t iters : {1, 2, 5, 10, 50, 200}) {
    const double e = spectral_norm_estimate(x, iters, 5);
    CHECK(e >= prev);
    CHECK(e <= sigma1 * (1 + 1e-12));
    prev = e;
  }
  CHECK(spectral_norm_estimate(MatrixD(4, 4), 10) == 0.0);
}
