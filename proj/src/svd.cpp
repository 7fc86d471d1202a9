#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigen_map.hpp"
#include "turbo/linalg.hpp"

namespace turbo {
namespace {

// Columns stored contiguously so that rotations touch two dense vectors.
using Columns = std::vector<std::vector<double>>;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void rotate(std::vector<double>& p, std::vector<double>& q, double c, double s) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double xp = p[i];
    const double xq = q[i];
    p[i] = c * xp - s * xq;
    q[i] = s * xp + c * xq;
  }
}

// Extends the columns flagged in `have` to an orthonormal set by Gram-Schmidt
// on the standard basis. Used for the null-space part of u.
void complete_basis(Columns& cols, const std::vector<bool>& have) {
  const std::size_t m = cols.empty() ? 0 : cols.front().size();
  std::size_t next_basis = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (have[j]) continue;
    for (; next_basis < m; ++next_basis) {
      std::vector<double> v(m, 0.0);
      v[next_basis] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          if (k == j || (!have[k] && k > j)) continue;
          const double proj = dot(v, cols[k]);
          for (std::size_t i = 0; i < m; ++i) v[i] -= proj * cols[k][i];
        }
      }
      const double nv = std::sqrt(dot(v, v));
      if (nv > 0.5) {
        for (double& e : v) e /= nv;
        cols[j] = std::move(v);
        ++next_basis;
        break;
      }
    }
  }
}

// One-sided Jacobi on a tall matrix (m >= n).
SvdResult jacobi_tall(const MatrixD& x, const SvdOptions& opt) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  Columns a(n, std::vector<double>(m));
  Columns v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) a[j][i] = x(i, j);
    v[j][j] = 1.0;
  }

  const double fro = frobenius_norm(x);
  // Columns shorter than this are numerically zero and never rotated.
  const double negligible = std::numeric_limits<double>::epsilon() * fro;
  const double negligible_sq = negligible * negligible;

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = dot(a[j], a[j]);

  // Rounding in an m-term dot product bounds how small a cosine can be measured.
  const double tol = std::max(opt.tolerance, static_cast<double>(m) * std::numeric_limits<double>::epsilon());

  bool converged = n < 2 || fro == 0.0;
  for (std::size_t sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
    double max_cos = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norms[p];
        const double beta = norms[q];
        if (alpha <= negligible_sq || beta <= negligible_sq) continue;
        const double gamma = dot(a[p], a[q]);
        const double cosine = std::abs(gamma) / std::sqrt(alpha * beta);
        max_cos = std::max(max_cos, cosine);
        if (cosine <= tol) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(a[p], a[q], c, s);
        rotate(v[p], v[q], c, s);
        norms[p] = dot(a[p], a[p]);
        norms[q] = dot(a[q], a[q]);
      }
    }
    converged = max_cos <= tol;
  }
  if (!converged) {
    throw ConvergenceError("one-sided Jacobi did not converge within " +
                           std::to_string(opt.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) sig[j] = std::sqrt(norms[j]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return sig[l] > sig[r]; });

  Columns ucols(n, std::vector<double>(m, 0.0));
  std::vector<bool> have(n, false);
  SvdResult out{MatrixD(m, n), std::vector<double>(n), MatrixD(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double s = sig[j] > negligible ? sig[j] : 0.0;
    out.sigma[k] = s;
    if (s > 0.0) {
      for (std::size_t i = 0; i < m; ++i) ucols[k][i] = a[j][i] / s;
      have[k] = true;
    }
    for (std::size_t i = 0; i < n; ++i) out.vt(k, i) = v[j][i];
  }
  complete_basis(ucols, have);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = ucols[k][i];
  }
  return out;
}

SvdResult divide_and_conquer(const MatrixD& x) {
  const Eigen::MatrixXd xd = detail::view(x);
  Eigen::BDCSVD<Eigen::MatrixXd> dec(xd, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw ConvergenceError("divide-and-conquer SVD failed to converge");
  }
  const std::size_t k = std::min(x.rows(), x.cols());
  SvdResult out{MatrixD(x.rows(), k), std::vector<double>(k), MatrixD(k, x.cols())};
  detail::view(out.u) = dec.matrixU();
  detail::view(out.vt) = dec.matrixV().transpose();
  for (std::size_t i = 0; i < k; ++i) out.sigma[i] = dec.singularValues()[static_cast<Eigen::Index>(i)];
  return out;
}

}  // namespace

SvdResult svd(const MatrixD& x, const SvdOptions& options) {
  if (x.empty()) throw DimensionError("svd: empty matrix");
  if (!x.all_finite()) throw NonFiniteError("svd input", 0);

  const std::size_t k = std::min(x.rows(), x.cols());
  SvdMethod method = options.method;
  if (method == SvdMethod::automatic) {
    method = k <= options.jacobi_max_dim ? SvdMethod::jacobi : SvdMethod::divide_and_conquer;
  }
  if (method == SvdMethod::divide_and_conquer) return divide_and_conquer(x);

  if (x.rows() >= x.cols()) return jacobi_tall(x, options);
  // Wide: factor the transpose and swap the roles of u and v.
  SvdResult t = jacobi_tall(transpose(x), options);
  return SvdResult{transpose(t.vt), std::move(t.sigma), transpose(t.u)};
}

PolarFactor polar_factor_exact(const MatrixD& x, const SvdOptions& options) {
  const SvdResult s = svd(x, options);
  PolarFactor out;
  out.q = matmul(s.u, s.vt);
  const double threshold = s.sigma.empty()
                               ? 0.0
                               : s.sigma.front() * static_cast<double>(std::max(x.rows(), x.cols())) *
                                     std::numeric_limits<double>::epsilon();
  out.rank = static_cast<std::size_t>(
      std::count_if(s.sigma.begin(), s.sigma.end(), [&](double v) { return v > threshold; }));
  out.rank_deficient = out.rank < s.sigma.size();
  return out;
}

}  // namespace turbo
