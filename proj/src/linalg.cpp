#include "turbo/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

#include "eigen_map.hpp"

namespace turbo {

template <typename T>
Matrix<T> transpose(const Matrix<T>& x) {
  Matrix<T> out(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  }
  return out;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix<T> c(a.rows(), b.cols());
  if (a.cols() == 0) return c;
  detail::view(c).noalias() = detail::view(a) * detail::view(b);
  return c;
}

template <typename T>
Matrix<T> gram(const Matrix<T>& x) {
  if (x.empty()) throw DimensionError("gram: empty matrix");
  const std::size_t n = x.cols();
  Matrix<T> a(n, n);
  auto xv = detail::view(x);
  detail::view(a).noalias() = xv.transpose() * xv;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j);
  }
  if (!a.all_finite()) throw NonFiniteError("gram", 0);
  return a;
}

template <typename T>
double frobenius_norm(const Matrix<T>& x) {
  double acc = 0.0;
  for (T v : x.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

template <typename T>
double frobenius_inner(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("frobenius_inner: shape mismatch");
  }
  double acc = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    acc += static_cast<double>(da[i]) * static_cast<double>(db[i]);
  }
  return acc;
}

template <typename T>
Matrix<T> scale_columns(const Matrix<T>& x, std::span<const T> s) {
  if (s.size() != x.cols()) {
    throw DimensionError("scale_columns: " + std::to_string(s.size()) + " scales for " +
                         std::to_string(x.cols()) + " columns");
  }
  Matrix<T> out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= s[j];
  }
  return out;
}

template <typename T>
double spectral_norm_estimate(const Matrix<T>& x, std::size_t iters, std::uint64_t seed) {
  if (iters == 0) throw InvalidArgument("spectral_norm_estimate: iters must be >= 1");
  if (x.empty()) return 0.0;
  const Eigen::Index n = static_cast<Eigen::Index>(x.cols());
  const detail::RowMajor<double> xd = detail::view(x).template cast<double>();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();

  // For PSD x^T x the Rayleigh quotient of power iterates never decreases,
  // so the running value ||x v|| is monotone in iters and bounded by sigma_1.
  double estimate = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const Eigen::VectorXd xv = xd * v;
    estimate = std::max(estimate, xv.norm());
    Eigen::VectorXd w = xd.transpose() * xv;
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
  }
  return std::max(estimate, (xd * v).norm());
}

#define TURBO_INSTANTIATE(T)                                                          \
  template Matrix<T> transpose(const Matrix<T>&);                                    \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);                     \
  template Matrix<T> gram(const Matrix<T>&);                                         \
  template double frobenius_norm(const Matrix<T>&);                                  \
  template double frobenius_inner(const Matrix<T>&, const Matrix<T>&);               \
  template Matrix<T> scale_columns(const Matrix<T>&, std::span<const T>);            \
  template double spectral_norm_estimate(const Matrix<T>&, std::size_t, std::uint64_t);

TURBO_INSTANTIATE(float)
TURBO_INSTANTIATE(double)
#undef TURBO_INSTANTIATE

}  // namespace turbo
