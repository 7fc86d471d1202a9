#pragma once

#include <cstddef>

#include "turbo/linalg.hpp"
#include "turbo/matrix.hpp"

namespace turbo {

// Error functionals. Inputs are upcast to double so that measurement never
// depends on the precision of the pipeline under test.

/// ||G - I||_F with G the Gram on the shorter side (x^T x for tall or square
/// x, x x^T for wide x).
template <typename T>
double ortho_error(const Matrix<T>& x);

/// ||approx - reference||_F / sqrt(min(rows, cols)).
template <typename T>
double polar_error(const Matrix<T>& approx, const MatrixD& reference_q);

/// Frobenius inner product <g, update>; the update is a strict descent
/// direction for g when this is positive. Zero for g = 0.
template <typename T>
double descent_alignment(const Matrix<T>& g, const Matrix<T>& update);

struct ErrorBreakdown {
  double polar_error = 0.0;   ///< ||result - Q||_F / sqrt(n)
  double ortho_error = 0.0;   ///< of the result
  double bias_error = 0.0;    ///< ||Q - Q_aol||_F / sqrt(n)
  double approx_error = 0.0;  ///< ||Q_aol - result||_F / sqrt(n)
  std::size_t n = 0;          ///< normalization dimension min(rows, cols)
};

/// Splits the polar error of an AOL-preconditioned pipeline into the bias of
/// the preconditioner and the remaining approximation error. `q_aol` must be
/// polar_factor_exact(aol_precondition(x0).x1); the exact factor of x0 is
/// computed here. Throws Error if the triangle inequality is violated beyond
/// 1e-6 (it cannot be, up to rounding).
template <typename T>
ErrorBreakdown decompose(const Matrix<T>& x0, const Matrix<T>& pipeline_result, const MatrixD& q_aol,
                         const SvdOptions& options = {});

/// Same as `decompose` with the exact polar factor of x0 already known.
/// For Frobenius pipelines pass q_aol = q (bias 0).
template <typename T>
ErrorBreakdown decompose_with_reference(const MatrixD& q, const MatrixD& q_aol,
                                        const Matrix<T>& pipeline_result);

}  // namespace turbo
