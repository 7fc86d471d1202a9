#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_util.hpp"
#include "turbo/linalg.hpp"

using namespace turbo;
using testutil::gaussian;

namespace {

void check_svd_invariants(const MatrixD& x, const SvdResult& r, double tol) {
  const std::size_t k = std::min(x.rows(), x.cols());
  REQUIRE(r.u.rows() == x.rows());
  REQUIRE(r.u.cols() == k);
  REQUIRE(r.vt.rows() == k);
  REQUIRE(r.vt.cols() == x.cols());
  REQUIRE(r.sigma.size() == k);
  for (std::size_t i = 0; i < k; ++i) {
    CHECK(r.sigma[i] >= 0.0);
    if (i > 0) CHECK(r.sigma[i] <= r.sigma[i - 1]);
  }
  CHECK(testutil::rel_fro_diff(testutil::compose(r.u, r.sigma, r.vt), x) < tol);
  const MatrixD utu = testutil::naive_matmul(testutil::naive_transpose(r.u), r.u);
  const MatrixD vvt = testutil::naive_matmul(r.vt, testutil::naive_transpose(r.vt));
  CHECK(testutil::max_abs_diff(utu, MatrixD::identity(k)) < tol);
  CHECK(testutil::max_abs_diff(vvt, MatrixD::identity(k)) < tol);
}

SvdOptions with(SvdMethod m) {
  SvdOptions o;
  o.method = m;
  return o;
}

}  // namespace

TEST_CASE("svd of diagonal and rotation") {
  const SvdResult d = svd(MatrixD::diagonal({3.0, 2.0}));
  CHECK(d.sigma == std::vector<double>{3.0, 2.0});
  CHECK(std::abs(std::abs(d.u(0, 0)) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(d.vt(1, 1)) - 1.0) < 1e-15);
  CHECK(std::abs(d.u(0, 1)) < 1e-15);

  const SvdResult r = svd(MatrixD{{0, -1}, {1, 0}});
  CHECK(r.sigma[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.sigma[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("svd reconstruction and orthogonality") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MatrixD x = gaussian(16, 16, seed);
    check_svd_invariants(x, svd(x), 1e-10);
  }
  check_svd_invariants(gaussian(40, 12, 9), svd(gaussian(40, 12, 9)), 1e-10);
  check_svd_invariants(gaussian(12, 40, 9), svd(gaussian(12, 40, 9)), 1e-10);
}

TEST_CASE("jacobi and divide-and-conquer agree") {
  for (std::size_t n : {24, 64, 150}) {
    const MatrixD x = gaussian(n, n, n);
    const SvdResult a = svd(x, with(SvdMethod::jacobi));
    const SvdResult b = svd(x, with(SvdMethod::divide_and_conquer));
    check_svd_invariants(x, a, 1e-10);
    check_svd_invariants(x, b, 1e-10);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.sigma[i] - b.sigma[i]) < 1e-11 * a.sigma[0]);
    const MatrixD qa = polar_factor_exact(x, with(SvdMethod::jacobi)).q;
    const MatrixD qb = polar_factor_exact(x, with(SvdMethod::divide_and_conquer)).q;
    CHECK(testutil::max_abs_diff(qa, qb) < 1e-9);
  }
}

TEST_CASE("singular values are invariant under orthogonal multiplication") {
  const MatrixD x = gaussian(30, 30, 4);
  const MatrixD l = testutil::random_orthogonal(30, 5);
  const MatrixD r = testutil::random_orthogonal(30, 6);
  const auto s0 = svd(x).sigma;
  const auto s1 = svd(testutil::naive_matmul(testutil::naive_matmul(l, x), r)).sigma;
  for (std::size_t i = 0; i < s0.size(); ++i) CHECK(std::abs(s0[i] - s1[i]) < 1e-9);
}

TEST_CASE("svd failures are explicit") {
  SvdOptions tight = with(SvdMethod::jacobi);
  tight.max_sweeps = 1;
  CHECK_THROWS_AS(svd(gaussian(30, 30, 1), tight), ConvergenceError);

  MatrixD x = gaussian(4, 4, 1);
  x(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(x), NonFiniteError);
}

TEST_CASE("polar factor fixed points") {
  const PolarFactor p = polar_factor_exact(MatrixD::diagonal({3.0, 2.0}));
  CHECK(testutil::max_abs_diff(p.q, MatrixD::identity(2)) < 1e-15);
  CHECK_FALSE(p.rank_deficient);
  CHECK(p.rank == 2);

  const MatrixD q = testutil::random_orthogonal(12, 3);
  CHECK(testutil::max_abs_diff(polar_factor_exact(q).q, q) < 1e-12);
}

TEST_CASE("polar factor beats random rotations") {
  // Q minimizes ||x - Omega||_F over orthogonal Omega.
  const MatrixD x{{1, 10}, {0, 1}};
  const MatrixD q = polar_factor_exact(x).q;
  auto dist = [&](const MatrixD& o) {
    double acc = 0;
    for (std::size_t k = 0; k < 4; ++k) acc += std::pow(x.data()[k] - o.data()[k], 2);
    return std::sqrt(acc);
  };
  const double best = dist(q);
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < 1000; ++k) {
    const double t = angle(eng);
    const double sign = k % 2 == 0 ? 1.0 : -1.0;  // rotations and reflections
    const MatrixD omega{{std::cos(t), -sign * std::sin(t)}, {std::sin(t), sign * std::cos(t)}};
    CHECK(best <= dist(omega) + 1e-12);
  }
  const MatrixD qtq = testutil::naive_matmul(testutil::naive_transpose(q), q);
  CHECK(testutil::max_abs_diff(qtq, MatrixD::identity(2)) < 1e-12);
}

TEST_CASE("polar factor is idempotent and orthogonal") {
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{20, 20}, {35, 10}, {10, 35}}) {
    const MatrixD x = gaussian(m, n, m * 31 + n);
    const MatrixD q = polar_factor_exact(x).q;
    CHECK(testutil::max_abs_diff(polar_factor_exact(q).q, q) < 1e-8);
    const MatrixD g = m >= n ? testutil::naive_matmul(testutil::naive_transpose(q), q)
                             : testutil::naive_matmul(q, testutil::naive_transpose(q));
    double dev = 0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) dev += std::pow(g(i, j) - (i == j), 2);
    }
    CHECK(std::sqrt(dev) < 1e-8);
  }
}

TEST_CASE("rank-deficient input gives a flagged pseudo-polar factor") {
  const MatrixD a = gaussian(10, 3, 1);
  const MatrixD b = gaussian(3, 10, 2);
  const PolarFactor p = polar_factor_exact(testutil::naive_matmul(a, b));
  CHECK(p.rank_deficient);
  CHECK(p.rank == 3);
  const PolarFactor z = polar_factor_exact(MatrixD(4, 4));
  CHECK(z.rank_deficient);
  CHECK(z.rank == 0);
}

TEST_CASE("positive column scaling keeps the polar factor a descent direction") {
  // For full-rank x and positive diagonal d, <x, polar(x d)> > 0.
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> pos(1e-3, 10.0);
  std::uniform_int_distribution<int> dim(2, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = static_cast<std::size_t>(dim(eng));
    const std::size_t n = static_cast<std::size_t>(dim(eng));
    const MatrixD x = gaussian(m, n, 1000 + trial);
    std::vector<double> d(n);
    for (auto& v : d) v = std::pow(pos(eng), 2.0);
    const MatrixD q = polar_factor_exact(scale_columns(x, std::span<const double>(d))).q;
    double inner = 0;
    for (std::size_t k = 0; k < x.size(); ++k) inner += x.data()[k] * q.data()[k];
    CHECK(inner > 0.0);
  }
}

TEST_CASE("float overload upcasts") {
  const MatrixD x = gaussian(9, 9, 21);
  const MatrixF xf = x.cast<float>();
  CHECK(polar_factor_exact(xf).q == polar_factor_exact(xf.cast<double>()).q);
}
