#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "turbo/sampling.hpp"

using namespace turbo;

namespace {

// Asymptotic Kolmogorov survival function.
double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_p_value(double d, double effective_n) {
  const double s = std::sqrt(effective_n);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  const double ne = double(a.size()) * b.size() / (a.size() + b.size());
  return ks_p_value(d, ne);
}

double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return ks_p_value(d, n);
}

std::vector<double> entries(const SampleSpec& spec, std::size_t index = 0) {
  const MatrixD m = sample_one<double>(spec, index);
  return {m.data().begin(), m.data().end()};
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double s = 0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / (v.size() - 1);
}

double median_abs(std::vector<double> v) {
  for (auto& x : v) x = std::abs(x);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("normal sampler moments") {
  const auto v = entries({512, 512, Distribution::normal(), 7, 1});
  CHECK(std::abs(mean(v)) < 4.0 / 512.0);
  CHECK(std::abs(variance(v) - 1.0) < 0.02);
  CHECK(ks_one_sample(v, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) > 1e-3);
}

TEST_CASE("stable with alpha 2 is normal with variance 2") {
  const auto s = entries({512, 512, Distribution::stable(2.0), 8, 1});
  CHECK(std::abs(variance(s) - 2.0) < 0.04);
  auto n = entries({512, 512, Distribution::normal(), 9, 1});
  for (auto& x : n) x *= std::sqrt(2.0);
  CHECK(ks_two_sample(s, n) > 1e-3);
  CHECK(ks_one_sample(s, [](double x) { return 0.5 * std::erfc(-x / 2.0); }) > 1e-3);
}

TEST_CASE("stable with alpha 1 is standard Cauchy") {
  const auto v = entries({512, 512, Distribution::stable(1.0), 10, 1});
  // |X| for standard Cauchy has median tan(pi/4) = 1.
  CHECK(std::abs(median_abs(v) - 1.0) < 0.05);
  CHECK(ks_one_sample(v, [](double x) { return 0.5 + std::atan(x) / M_PI; }) > 1e-3);
}

TEST_CASE("stable with alpha 1/2 and beta 1 is a shifted Levy law") {
  // In the S0 parameterization X + 1 follows Levy(0, 1), whose CDF is
  // erfc(sqrt(1 / (2x))) for x > 0.
  auto v = entries({320, 320, Distribution::stable(0.5, 1.0), 11, 1});
  for (auto& x : v) x += 1.0;
  CHECK(*std::min_element(v.begin(), v.end()) > 0.0);
  CHECK(ks_one_sample(v, [](double x) { return x <= 0 ? 0.0 : std::erfc(std::sqrt(0.5 / x)); }) > 1e-3);
}

TEST_CASE("symmetric stable laws are symmetric") {
  for (double alpha : {0.8, 1.0, 1.5}) {
    CAPTURE(alpha);
    const auto v = entries({316, 317, Distribution::stable(alpha), 12, 1});  // ~1e5 draws
    auto flipped = entries({316, 317, Distribution::stable(alpha), 13, 1});
    for (auto& x : flipped) x = -x;
    CHECK(ks_two_sample(v, flipped) > 1e-3);
  }
}

TEST_CASE("heavier tails for smaller alpha") {
  auto q99 = [](std::vector<double> v) {
    for (auto& x : v) x = std::abs(x);
    std::sort(v.begin(), v.end());
    return v[v.size() * 99 / 100];
  };
  const double q10 = q99(entries({200, 200, Distribution::stable(1.0), 1, 1}));
  const double q15 = q99(entries({200, 200, Distribution::stable(1.5), 1, 1}));
  const double q20 = q99(entries({200, 200, Distribution::stable(2.0), 1, 1}));
  CHECK(q10 > q15);
  CHECK(q15 > q20);
}

TEST_CASE("sampling is deterministic and order independent") {
  const SampleSpec spec{17, 9, Distribution::stable(1.5), 42, 6};
  const auto batch = sample<double>(spec);
  REQUIRE(batch.size() == 6);
  CHECK(sample<double>(spec) == batch);
  for (std::size_t k = 6; k-- > 0;) CHECK(sample_one<double>(spec, k) == batch[k]);
  CHECK_FALSE(batch[0] == batch[1]);

  SampleSpec other = spec;
  other.seed = 43;
  CHECK_FALSE(sample_one<double>(other, 0) == batch[0]);

  const MatrixF f = sample_one<float>(spec, 3);
  CHECK(f == batch[3].cast<float>());
}

TEST_CASE("sample spec validation") {
  CHECK_THROWS_AS(validate({4, 4, Distribution::stable(0.0), 0, 1}), InvalidArgument);
  CHECK_THROWS_AS(validate({4, 4, Distribution::stable(2.5), 0, 1}), InvalidArgument);
  CHECK_THROWS_AS(validate({4, 4, Distribution::stable(1.5, 1.5), 0, 1}), InvalidArgument);
  CHECK_THROWS_AS(validate({4, 4, Distribution::normal(), 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(validate({0, 4, Distribution::normal(), 0, 1}), InvalidArgument);
  CHECK_NOTHROW(validate({4, 4, Distribution::stable(2.0, -1.0), 0, 1}));
  CHECK_THROWS_AS(sample<double>({4, 4, Distribution::stable(3.0), 0, 2}), InvalidArgument);
}

TEST_CASE("distribution labels round-trip") {
  CHECK(parse_distribution("normal") == Distribution::normal());
  CHECK(parse_distribution("stable(1.5)") == Distribution::stable(1.5, 0.0));
  CHECK(parse_distribution(" stable( 1.0 , -0.25 ) ") == Distribution::stable(1.0, -0.25));
  for (const auto& d : {Distribution::normal(), Distribution::stable(1.5), Distribution::stable(0.7, 0.3)}) {
    CHECK(parse_distribution(d.label()) == d);
  }
  CHECK_THROWS_AS(parse_distribution("cauchy"), ParseError);
  CHECK_THROWS_AS(parse_distribution("stable(x)"), ParseError);
  CHECK_THROWS_AS(parse_distribution("stable(1.5"), ParseError);
}

TEST_CASE("scalar stream primitives") {
  EntryStream s(1, 2);
  double lo = 1, hi = 0, esum = 0;
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    esum += s.exponential();
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(esum / 100000 - 1.0) < 0.02);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}
