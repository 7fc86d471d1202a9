#include "turbo/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "turbo/error.hpp"

namespace turbo {

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

std::vector<Token> tokenize(std::istream& in) {
  std::vector<Token> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    for (std::string tok; ss >> tok;) tokens.push_back({tok, line_no});
  }
  return tokens;
}

template <typename V>
V parse_token(const Token& t, const char* what) {
  V v{};
  auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size()) {
    throw ParseError(std::string("malformed ") + what + " '" + t.text + "'", t.line);
  }
  return v;
}

}  // namespace

MatrixD read_matrix(std::istream& in) {
  const std::vector<Token> tokens = tokenize(in);
  if (tokens.size() < 2) throw ParseError("missing 'rows cols' header", tokens.empty() ? 1 : tokens[0].line);
  const auto rows = parse_token<std::size_t>(tokens[0], "row count");
  const auto cols = parse_token<std::size_t>(tokens[1], "column count");
  const std::size_t expected = rows * cols;
  if (tokens.size() - 2 != expected) {
    const std::size_t line = tokens.back().line;
    throw ParseError("expected " + std::to_string(expected) + " values for " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", found " + std::to_string(tokens.size() - 2),
                     line);
  }
  std::vector<double> values;
  values.reserve(expected);
  for (std::size_t k = 2; k < tokens.size(); ++k) values.push_back(parse_token<double>(tokens[k], "value"));
  return MatrixD(rows, cols, std::move(values));
}

MatrixD read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file " + path.string(), 0);
  try {
    return read_matrix(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

template <typename T>
void write_matrix(std::ostream& out, const Matrix<T>& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(m(i, j)));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

template <typename T>
void write_matrix(const std::filesystem::path& path, const Matrix<T>& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write matrix file " + path.string());
  write_matrix(out, m);
  if (!out) throw Error("write failed for " + path.string());
}

template void write_matrix(std::ostream&, const Matrix<float>&);
template void write_matrix(std::ostream&, const Matrix<double>&);
template void write_matrix(const std::filesystem::path&, const Matrix<float>&);
template void write_matrix(const std::filesystem::path&, const Matrix<double>&);

}  // namespace turbo
