#pragma once

#include <optional>
#include <vector>

#include "turbo/matrix.hpp"

namespace turbo {

/// Positive per-column scaling. Frobenius preconditioning stores a single
/// broadcast scalar; AOL stores one value per column.
template <typename T>
struct ScalingVector {
  std::vector<T> values;
  bool broadcast = false;

  T operator[](std::size_t j) const { return broadcast ? values.front() : values[j]; }
};

template <typename T>
struct PreconditionResult {
  Matrix<T> x1;
  ScalingVector<T> scaling;
  /// Gram of x1 on its shorter side, present for AOL only. It comes from
  /// rescaling the cached input Gram, not from another product.
  std::optional<Matrix<T>> gram1;
  /// True when the input was wide and the scaling was applied to rows.
  bool transposed = false;
};

struct PreconditionOptions {
  /// When set, AOL row sums below this floor are clamped instead of rejected.
  /// Off by default; 1e-12 is the documented robustness setting.
  std::optional<double> clamp_floor;
};

/// x0 / ||x0||_F. Throws InvalidArgument for the zero matrix.
template <typename T>
PreconditionResult<T> frobenius_precondition(const Matrix<T>& x0);

/// s_i = 1 / sqrt(sum_j |a0_ij|). Throws InvalidArgument naming the first
/// column whose row sum is zero (unless a clamp floor is configured).
template <typename T>
ScalingVector<T> aol_scaling_vector(const Matrix<T>& a0, const PreconditionOptions& options = {});

/// s_i * a0_ij * s_j. Symmetric inputs give symmetric outputs to the bit.
template <typename T>
Matrix<T> rescale_gram(const Matrix<T>& a0, const ScalingVector<T>& s);

/// AOL rescaling with the Gram matrix handed over for reuse. Operates on the
/// shorter side: tall or square inputs get column scaling, wide inputs are
/// scaled by rows (equivalently, columns of the transpose).
template <typename T>
PreconditionResult<T> aol_precondition(const Matrix<T>& x0, const PreconditionOptions& options = {});

}  // namespace turbo
