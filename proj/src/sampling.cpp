#include "turbo/sampling.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace turbo {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ParseError("expected a number, got '" + t + "'", 0);
  }
  return v;
}

}  // namespace

std::string Distribution::label() const {
  if (kind == Kind::normal) return "normal";
  return "stable(" + format_real(alpha) + "," + format_real(beta) + ")";
}

Distribution parse_distribution(const std::string& text) {
  const std::string t = trim(text);
  if (t == "normal") return Distribution::normal();
  if (t.rfind("stable(", 0) == 0 && t.back() == ')') {
    const std::string inner = t.substr(7, t.size() - 8);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) return Distribution::stable(parse_real(inner));
    return Distribution::stable(parse_real(inner.substr(0, comma)), parse_real(inner.substr(comma + 1)));
  }
  throw ParseError("unknown distribution '" + t + "' (expected normal or stable(alpha[,beta]))", 0);
}

void validate(const SampleSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) throw InvalidArgument("sample: dimensions must be positive");
  if (spec.batch == 0) throw InvalidArgument("sample: batch must be >= 1");
  if (spec.distribution.kind == Distribution::Kind::stable) {
    const double a = spec.distribution.alpha;
    const double b = spec.distribution.beta;
    if (!(a > 0.0 && a <= 2.0)) throw InvalidArgument("sample: alpha must lie in (0, 2]");
    if (!(b >= -1.0 && b <= 1.0)) throw InvalidArgument("sample: beta must lie in [-1, 1]");
  }
}

EntryStream::EntryStream(std::uint64_t seed, std::size_t index)
    : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)))) {}

double EntryStream::uniform() {
  // 53 random bits mapped to (0, 1); zero is excluded so logs stay finite.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double EntryStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double EntryStream::exponential() { return -std::log(uniform()); }

double EntryStream::stable(double alpha, double beta) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double v = std::numbers::pi * (uniform() - 0.5);
  const double w = exponential();

  if (alpha == 1.0) {
    // S1 and S0 coincide at unit scale for alpha = 1.
    const double shifted = half_pi + beta * v;
    return (shifted * std::tan(v) - beta * std::log(half_pi * w * std::cos(v) / shifted)) / half_pi;
  }

  const double zeta = -beta * std::tan(half_pi * alpha);
  const double xi = std::atan(-zeta) / alpha;
  const double scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  const double x1 = scale * std::sin(alpha * (v + xi)) / std::pow(std::cos(v), 1.0 / alpha) *
                    std::pow(std::cos(v - alpha * (v + xi)) / w, (1.0 - alpha) / alpha);
  // S1 -> S0 location shift.
  return x1 + zeta;
}

template <typename T>
Matrix<T> sample_one(const SampleSpec& spec, std::size_t index) {
  validate(spec);
  if (index >= spec.batch) throw InvalidArgument("sample_one: index outside batch");
  EntryStream stream(spec.seed, index);
  Matrix<T> m(spec.rows, spec.cols);
  for (T& e : m.data()) e = static_cast<T>(stream.draw(spec.distribution));
  return m;
}

template <typename T>
std::vector<Matrix<T>> sample(const SampleSpec& spec) {
  validate(spec);
  std::vector<Matrix<T>> out;
  out.reserve(spec.batch);
  for (std::size_t i = 0; i < spec.batch; ++i) out.push_back(sample_one<T>(spec, i));
  return out;
}

template Matrix<float> sample_one(const SampleSpec&, std::size_t);
template Matrix<double> sample_one(const SampleSpec&, std::size_t);
template std::vector<Matrix<float>> sample(const SampleSpec&);
template std::vector<Matrix<double>> sample(const SampleSpec&);

}  // namespace turbo
