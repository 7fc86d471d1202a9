#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "turbo/matrix.hpp"
#include "turbo/precondition.hpp"

namespace turbo {

/// One quintic step p(x) = a x + b x^3 + c x^5 acting on singular values.
struct NsCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double apply(double sigma) const {
    const double s2 = sigma * sigma;
    return sigma * (a + s2 * (b + c * s2));
  }

  friend bool operator==(const NsCoefficients&, const NsCoefficients&) = default;
};

struct CoefficientSchedule {
  std::string name;
  std::vector<NsCoefficients> triples;

  std::size_t size() const noexcept { return triples.size(); }
  bool is_constant() const noexcept { return triples.size() == 1; }
};

/// Parses the schedule text format: one "a b c" triple per line, '#' starts a
/// comment, blank lines ignored. Throws ParseError (with line number) on a
/// malformed row or non-finite value, and on an empty table.
CoefficientSchedule parse_schedule(std::istream& in, std::string name);

/// Reads a schedule file; the schedule is named after the file stem.
CoefficientSchedule load_schedule(const std::filesystem::path& path);

/// The final `keep_last` triples, order preserved. Throws InvalidArgument
/// unless 1 <= keep_last <= schedule.size().
CoefficientSchedule truncate_schedule(const CoefficientSchedule& schedule, std::size_t keep_last);

/// Triples for an `iterations`-step run: a constant schedule repeats its
/// triple, a longer table keeps its last `iterations` rows. Throws
/// InvalidArgument when a non-constant table is too short.
std::vector<NsCoefficients> expand_schedule(const CoefficientSchedule& schedule, std::size_t iterations);

enum class Pipeline { muon, muon_plus, turbo };
enum class PreconditionerKind { frobenius, aol };

std::string_view to_string(Pipeline p);
std::string_view to_string(PreconditionerKind p);
/// Accepts "muon", "muon_plus" (or "muon+") and "turbo". Throws ParseError.
Pipeline parse_pipeline(std::string_view text);

constexpr PreconditionerKind preconditioner_of(Pipeline p) {
  return p == Pipeline::turbo ? PreconditionerKind::aol : PreconditionerKind::frobenius;
}

// ---------------------------------------------------------------------------

/// x <- (1 + beta) x - beta x x^T x, the cubic Bjorck-Bowie step that maps
/// sigma to (1 + beta) sigma - beta sigma^3 (fixing sigma = 1). Requires
/// ||x||_2 <= 1 for convergence. Throws InvalidArgument unless beta in [0, 0.5].
template <typename T>
Matrix<T> bjorck_step(const Matrix<T>& x, double beta);

/// Frobenius preconditioning followed by `iterations` Bjorck steps.
template <typename T>
Matrix<T> bjorck_orthogonalize(const Matrix<T>& x0, double beta, std::size_t iterations);

template <typename T>
struct NsStepResult {
  Matrix<T> x_next;
  std::size_t matmuls_used = 0;
};

/// One quintic Newton-Schulz step computed as
///   A = x^T x,  B = b A + c A A,  x_next = a x + x B.
/// The overload taking `gram_in` skips the first product (2 matmuls instead
/// of 3). Throws NonFiniteError naming the stage ("gram", "polynomial",
/// "update") when an intermediate overflows.
template <typename T>
NsStepResult<T> ns_step(const Matrix<T>& x, const NsCoefficients& coeffs);

template <typename T>
NsStepResult<T> ns_step(const Matrix<T>& x, const Matrix<T>& gram_in, const NsCoefficients& coeffs);

struct IterationDiagnostics {
  NsCoefficients applied;
  /// ||X_k^T X_k - I||_F of the iterate after this step, taken from the
  /// working-precision Gram. NaN when tracking is disabled.
  double ortho_error = 0.0;
  std::chrono::nanoseconds elapsed{0};
};

template <typename T>
struct OrthogonalizeReport {
  Matrix<T> result;
  Pipeline pipeline = Pipeline::muon;
  PreconditionerKind preconditioner = PreconditionerKind::frobenius;
  Precision precision = precision_of<T>();
  std::string schedule_name;
  std::size_t iterations_run = 0;
  /// Logical n^3 products. 3 per iteration for every pipeline: the AOL Gram
  /// doubles as the first iteration's Gram.
  std::size_t matmul_count = 0;
  std::vector<IterationDiagnostics> per_iteration;
};

struct OrthogonalizeOptions {
  /// Record ortho_error per iteration. Costs one extra (uncounted) Gram for
  /// the final iterate.
  bool track_ortho_error = true;
  /// Turbo only: hand the rescaled AOL Gram to the first step. When false the
  /// first step recomputes gram(x1), costing one more matmul.
  bool reuse_gram = true;
  PreconditionOptions precondition;
};

/// Runs a full pipeline:
///   muon       Frobenius scaling, constant triple repeated
///   muon_plus  Frobenius scaling, per-iteration triples
///   turbo      AOL scaling with the Gram handed to step 1, per-iteration triples
/// Wide inputs are transposed on entry and the result transposed back.
/// Throws InvalidArgument for iterations == 0, a muon schedule that is not
/// constant, or a table shorter than `iterations`; NonFiniteError on overflow.
template <typename T>
OrthogonalizeReport<T> orthogonalize(const Matrix<T>& x0, Pipeline pipeline,
                                     const CoefficientSchedule& schedule, std::size_t iterations,
                                     const OrthogonalizeOptions& options = {});

}  // namespace turbo
