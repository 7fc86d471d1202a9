#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "turbo/matrix.hpp"

namespace turbo {

// Dense kernels. All functions are pure; results are bit-reproducible for a
// given build because products run single-threaded with a fixed blocking.

template <typename T>
Matrix<T> transpose(const Matrix<T>& x);

/// a * b. Throws DimensionError when a.cols() != b.rows().
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// x^T x, symmetric to the bit: the lower triangle is computed and mirrored.
/// Throws NonFiniteError if the product overflows.
template <typename T>
Matrix<T> gram(const Matrix<T>& x);

/// sqrt(sum x_ij^2), accumulated in double.
template <typename T>
double frobenius_norm(const Matrix<T>& x);

/// <a, b>_F = tr(a^T b), accumulated in double.
template <typename T>
double frobenius_inner(const Matrix<T>& a, const Matrix<T>& b);

/// x * diag(s): column j multiplied by s[j].
template <typename T>
Matrix<T> scale_columns(const Matrix<T>& x, std::span<const T> s);

/// Power-iteration lower bound on the largest singular value, run in double
/// on x^T x from a seeded Gaussian start. Non-decreasing in `iters`.
template <typename T>
double spectral_norm_estimate(const Matrix<T>& x, std::size_t iters, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// SVD / polar oracle. Always double precision.

enum class SvdMethod {
  automatic,           ///< Jacobi up to SvdOptions::jacobi_max_dim, divide-and-conquer above
  jacobi,              ///< one-sided (Hestenes) Jacobi
  divide_and_conquer,  ///< Eigen::BDCSVD
};

struct SvdOptions {
  SvdMethod method = SvdMethod::automatic;
  std::size_t max_sweeps = 60;
  std::size_t jacobi_max_dim = 128;
  /// Jacobi stops once every column pair has |cos angle| below this.
  double tolerance = 1e-13;
};

/// Thin SVD x = u * diag(sigma) * vt with k = min(rows, cols):
/// u is rows x k, vt is k x cols, sigma descending and non-negative.
struct SvdResult {
  MatrixD u;
  std::vector<double> sigma;
  MatrixD vt;
};

/// Throws ConvergenceError when Jacobi exceeds `max_sweeps`, NonFiniteError on
/// non-finite input.
SvdResult svd(const MatrixD& x, const SvdOptions& options = {});

struct PolarFactor {
  MatrixD q;
  std::size_t rank = 0;
  /// True when x is numerically rank deficient; q is then the pseudo-polar
  /// factor built from the same u/vt pairing.
  bool rank_deficient = false;
};

PolarFactor polar_factor_exact(const MatrixD& x, const SvdOptions& options = {});

template <typename T>
PolarFactor polar_factor_exact(const Matrix<T>& x, const SvdOptions& options = {}) {
  if constexpr (std::is_same_v<T, double>) {
    return polar_factor_exact(static_cast<const MatrixD&>(x), options);
  } else {
    return polar_factor_exact(x.template cast<double>(), options);
  }
}

}  // namespace turbo
