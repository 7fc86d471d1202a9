#include "turbo/precondition.hpp"

#include <cmath>
#include <string>

#include "turbo/linalg.hpp"

namespace turbo {

template <typename T>
PreconditionResult<T> frobenius_precondition(const Matrix<T>& x0) {
  const double norm = frobenius_norm(x0);
  if (norm == 0.0) throw InvalidArgument("frobenius_precondition: zero matrix");
  if (!std::isfinite(norm)) throw NonFiniteError("frobenius norm", 0);
  const T s = static_cast<T>(1.0 / norm);
  PreconditionResult<T> out{x0, ScalingVector<T>{{s}, true}, std::nullopt, false};
  for (T& e : out.x1.data()) e *= s;
  return out;
}

template <typename T>
ScalingVector<T> aol_scaling_vector(const Matrix<T>& a0, const PreconditionOptions& options) {
  if (!a0.is_square()) throw DimensionError("aol_scaling_vector: Gram matrix must be square");
  ScalingVector<T> s;
  s.values.resize(a0.rows());
  for (std::size_t i = 0; i < a0.rows(); ++i) {
    double row_sum = 0.0;
    for (T v : a0.row(i)) row_sum += std::abs(static_cast<double>(v));
    if (!std::isfinite(row_sum)) throw NonFiniteError("AOL row sum", 0);
    if (row_sum <= 0.0 && !options.clamp_floor) {
      throw InvalidArgument("aol_scaling_vector: column " + std::to_string(i) +
                            " is zero (Gram row sum is 0)");
    }
    if (options.clamp_floor) row_sum = std::max(row_sum, *options.clamp_floor);
    s.values[i] = static_cast<T>(1.0 / std::sqrt(row_sum));
  }
  return s;
}

template <typename T>
Matrix<T> rescale_gram(const Matrix<T>& a0, const ScalingVector<T>& s) {
  if (!a0.is_square()) throw DimensionError("rescale_gram: Gram matrix must be square");
  if (!s.broadcast && s.values.size() != a0.rows()) {
    throw DimensionError("rescale_gram: " + std::to_string(s.values.size()) + " scales for a " +
                         std::to_string(a0.rows()) + "x" + std::to_string(a0.rows()) + " Gram");
  }
  const std::size_t n = a0.rows();
  bool symmetric = true;
  for (std::size_t i = 0; i < n && symmetric; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (a0(i, j) != a0(j, i)) {
        symmetric = false;
        break;
      }
    }
  }
  Matrix<T> out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const T si = s[i];
    const std::size_t j_end = symmetric ? i + 1 : n;
    for (std::size_t j = 0; j < j_end; ++j) out(i, j) = si * a0(i, j) * s[j];
  }
  if (symmetric) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) out(j, i) = out(i, j);
    }
  }
  return out;
}

template <typename T>
PreconditionResult<T> aol_precondition(const Matrix<T>& x0, const PreconditionOptions& options) {
  const bool wide = x0.rows() < x0.cols();
  const Matrix<T> tall = wide ? transpose(x0) : x0;
  const Matrix<T> a0 = gram(tall);
  ScalingVector<T> s = aol_scaling_vector(a0, options);
  Matrix<T> x1 = scale_columns(tall, std::span<const T>(s.values));
  Matrix<T> a1 = rescale_gram(a0, s);
  return PreconditionResult<T>{wide ? transpose(x1) : std::move(x1), std::move(s), std::move(a1), wide};
}

#define TURBO_INSTANTIATE(T)                                                                   \
  template PreconditionResult<T> frobenius_precondition(const Matrix<T>&);                    \
  template ScalingVector<T> aol_scaling_vector(const Matrix<T>&, const PreconditionOptions&); \
  template Matrix<T> rescale_gram(const Matrix<T>&, const ScalingVector<T>&);                 \
  template PreconditionResult<T> aol_precondition(const Matrix<T>&, const PreconditionOptions&);

TURBO_INSTANTIATE(float)
TURBO_INSTANTIATE(double)
#undef TURBO_INSTANTIATE

}  // namespace turbo
