#pragma once

#include <Eigen/Core>

#include "turbo/matrix.hpp"

namespace turbo::detail {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<const RowMajor<T>> view(const Matrix<T>& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

template <typename T>
Eigen::Map<RowMajor<T>> view(Matrix<T>& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace turbo::detail
