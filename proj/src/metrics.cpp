#include "turbo/metrics.hpp"

#include <cmath>

namespace turbo {

namespace {

double distance(const MatrixD& a, const MatrixD& b) {
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

template <typename T>
MatrixD upcast(const Matrix<T>& x) {
  if constexpr (std::is_same_v<T, double>) {
    return x;
  } else {
    return x.template cast<double>();
  }
}

void require_same_shape(const MatrixD& a, const MatrixD& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

template <typename T>
double ortho_error(const Matrix<T>& x) {
  if (x.empty()) return 0.0;
  const MatrixD xd = upcast(x);
  const MatrixD g = x.rows() < x.cols() ? gram(transpose(xd)) : gram(xd);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const double d = g(i, j) - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

template <typename T>
double polar_error(const Matrix<T>& approx, const MatrixD& reference_q) {
  const MatrixD a = upcast(approx);
  require_same_shape(a, reference_q, "polar_error");
  const auto n = static_cast<double>(std::min(a.rows(), a.cols()));
  return n == 0.0 ? 0.0 : distance(a, reference_q) / std::sqrt(n);
}

template <typename T>
double descent_alignment(const Matrix<T>& g, const Matrix<T>& update) {
  return frobenius_inner(g, update);
}

template <typename T>
ErrorBreakdown decompose_with_reference(const MatrixD& q, const MatrixD& q_aol,
                                        const Matrix<T>& pipeline_result) {
  const MatrixD r = upcast(pipeline_result);
  require_same_shape(q, q_aol, "decompose");
  require_same_shape(q, r, "decompose");
  ErrorBreakdown out;
  out.n = std::min(q.rows(), q.cols());
  const double root_n = std::sqrt(static_cast<double>(out.n));
  out.polar_error = distance(r, q) / root_n;
  out.bias_error = distance(q, q_aol) / root_n;
  out.approx_error = distance(q_aol, r) / root_n;
  out.ortho_error = ortho_error(r);
  if (out.polar_error > out.bias_error + out.approx_error + 1e-6) {
    throw Error("decompose: triangle inequality violated");
  }
  return out;
}

template <typename T>
ErrorBreakdown decompose(const Matrix<T>& x0, const Matrix<T>& pipeline_result, const MatrixD& q_aol,
                         const SvdOptions& options) {
  const PolarFactor q = polar_factor_exact(upcast(x0), options);
  return decompose_with_reference(q.q, q_aol, pipeline_result);
}

#define TURBO_INSTANTIATE(T)                                                               \
  template double ortho_error(const Matrix<T>&);                                          \
  template double polar_error(const Matrix<T>&, const MatrixD&);                          \
  template double descent_alignment(const Matrix<T>&, const Matrix<T>&);                  \
  template ErrorBreakdown decompose_with_reference(const MatrixD&, const MatrixD&,        \
                                                   const Matrix<T>&);                     \
  template ErrorBreakdown decompose(const Matrix<T>&, const Matrix<T>&, const MatrixD&,   \
                                    const SvdOptions&);

TURBO_INSTANTIATE(float)
TURBO_INSTANTIATE(double)
#undef TURBO_INSTANTIATE

}  // namespace turbo
