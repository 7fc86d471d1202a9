#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "turbo/matrix.hpp"

namespace turbo {

// Text matrix format:
//   rows cols
//   v00 v01 ...
//   v10 v11 ...
// Values are whitespace separated in row-major order and written with 17
// significant digits, so a double round-trips exactly. '#' starts a comment.

MatrixD read_matrix(std::istream& in);
MatrixD read_matrix(const std::filesystem::path& path);

template <typename T>
void write_matrix(std::ostream& out, const Matrix<T>& m);

template <typename T>
void write_matrix(const std::filesystem::path& path, const Matrix<T>& m);

}  // namespace turbo
