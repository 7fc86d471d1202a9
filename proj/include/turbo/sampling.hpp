#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "turbo/matrix.hpp"

namespace turbo {

/// Entry law of a sampled matrix.
struct Distribution {
  enum class Kind { normal, stable };

  Kind kind = Kind::normal;
  /// Stable tail index in (0, 2]; ignored for normal.
  double alpha = 2.0;
  /// Stable skewness in [-1, 1]; ignored for normal.
  double beta = 0.0;

  static Distribution normal() { return {}; }
  static Distribution stable(double alpha, double beta = 0.0) { return {Kind::stable, alpha, beta}; }

  /// "normal" or "stable(alpha,beta)" with shortest round-trip formatting.
  std::string label() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Parses "normal", "stable(1.5)" or "stable(1.5, 0)". Throws ParseError.
Distribution parse_distribution(const std::string& text);

struct SampleSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Distribution distribution;
  std::uint64_t seed = 0;
  std::size_t batch = 1;
};

/// Throws InvalidArgument unless alpha in (0, 2], beta in [-1, 1], batch >= 1
/// and both dimensions are positive.
void validate(const SampleSpec& spec);

/// The `index`-th matrix of the batch. Each member draws from its own
/// substream seeded from (seed, index), so any subset can be produced in any
/// order with identical bytes.
///
/// Generator: std::mt19937_64 seeded with splitmix64(seed ^ splitmix64(index)).
/// Uniforms take the top 53 bits; normals use Box-Muller on (0,1] uniforms;
/// stable draws use Chambers-Mallows-Stuck in Nolan's S0 parameterization with
/// unit scale and zero location. Draws are made in double and then rounded.
template <typename T>
Matrix<T> sample_one(const SampleSpec& spec, std::size_t index);

template <typename T>
std::vector<Matrix<T>> sample(const SampleSpec& spec);

/// Scalar stream used by `sample_one`; exposed for distribution tests.
class EntryStream {
 public:
  EntryStream(std::uint64_t seed, std::size_t index);

  double uniform();          ///< in (0, 1)
  double normal();           ///< standard normal
  double exponential();      ///< rate 1
  double stable(double alpha, double beta);
  double draw(const Distribution& d) {
    return d.kind == Distribution::Kind::normal ? normal() : stable(d.alpha, d.beta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace turbo
