#include "turbo/newton_schulz.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "eigen_map.hpp"
#include "turbo/linalg.hpp"

namespace turbo {

// ---------------------------------------------------------------------------
// Schedules

CoefficientSchedule parse_schedule(std::istream& in, std::string name) {
  CoefficientSchedule schedule{std::move(name), {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    if (fields.size() != 3) {
      throw ParseError("schedule row must hold 3 coefficients, found " + std::to_string(fields.size()),
                       line_no);
    }
    double v[3];
    for (int k = 0; k < 3; ++k) {
      const std::string& f = fields[static_cast<std::size_t>(k)];
      auto res = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
        throw ParseError("malformed coefficient '" + f + "'", line_no);
      }
      if (!std::isfinite(v[k])) throw ParseError("non-finite coefficient '" + f + "'", line_no);
    }
    schedule.triples.push_back({v[0], v[1], v[2]});
  }
  if (schedule.triples.empty()) throw ParseError("schedule '" + schedule.name + "' is empty", 0);
  return schedule;
}

CoefficientSchedule load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schedule file " + path.string(), 0);
  try {
    return parse_schedule(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

CoefficientSchedule truncate_schedule(const CoefficientSchedule& schedule, std::size_t keep_last) {
  if (keep_last == 0 || keep_last > schedule.size()) {
    throw InvalidArgument("truncate_schedule: keep_last=" + std::to_string(keep_last) +
                          " outside [1, " + std::to_string(schedule.size()) + "]");
  }
  CoefficientSchedule out{schedule.name, {}};
  out.triples.assign(schedule.triples.end() - static_cast<std::ptrdiff_t>(keep_last),
                     schedule.triples.end());
  return out;
}

std::vector<NsCoefficients> expand_schedule(const CoefficientSchedule& schedule, std::size_t iterations) {
  if (schedule.triples.empty()) throw InvalidArgument("expand_schedule: empty schedule");
  if (schedule.is_constant()) return std::vector<NsCoefficients>(iterations, schedule.triples.front());
  if (schedule.size() < iterations) {
    throw InvalidArgument("schedule '" + schedule.name + "' has " + std::to_string(schedule.size()) +
                          " triples, " + std::to_string(iterations) + " iterations requested");
  }
  return truncate_schedule(schedule, iterations).triples;
}

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::muon: return "muon";
    case Pipeline::muon_plus: return "muon_plus";
    case Pipeline::turbo: return "turbo";
  }
  return "?";
}

std::string_view to_string(PreconditionerKind p) {
  return p == PreconditionerKind::aol ? "aol" : "frobenius";
}

Pipeline parse_pipeline(std::string_view text) {
  if (text == "muon") return Pipeline::muon;
  if (text == "muon_plus" || text == "muon+") return Pipeline::muon_plus;
  if (text == "turbo") return Pipeline::turbo;
  throw ParseError("unknown pipeline '" + std::string(text) + "' (expected muon, muon_plus, turbo)", 0);
}

// ---------------------------------------------------------------------------
// Steps

namespace {

template <typename T>
void require_finite(const Matrix<T>& m, const char* stage, std::size_t iteration) {
  if (!m.all_finite()) throw NonFiniteError(stage, iteration);
}

template <typename T>
Matrix<T> checked_gram(const Matrix<T>& x, std::size_t iteration) {
  try {
    return gram(x);
  } catch (const NonFiniteError&) {
    throw NonFiniteError("gram", iteration);
  }
}

// B = b A + c A A, then a x + x B. Two matmuls.
template <typename T>
Matrix<T> apply_polynomial(const Matrix<T>& x, const Matrix<T>& a, const NsCoefficients& k,
                           std::size_t iteration) {
  Matrix<T> b = matmul(a, a);
  detail::view(b) = static_cast<T>(k.c) * detail::view(b) + static_cast<T>(k.b) * detail::view(a);
  require_finite(b, "polynomial", iteration);

  Matrix<T> next = matmul(x, b);
  detail::view(next) += static_cast<T>(k.a) * detail::view(x);
  require_finite(next, "update", iteration);
  return next;
}

template <typename T>
double gram_deviation(const Matrix<T>& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double d = static_cast<double>(a(i, j)) - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

template <typename T>
Matrix<T> bjorck_step(const Matrix<T>& x, double beta) {
  if (!(beta >= 0.0 && beta <= 0.5)) throw InvalidArgument("bjorck_step: beta must lie in [0, 0.5]");
  const Matrix<T> a = checked_gram(x, 0);
  Matrix<T> next = matmul(x, a);
  detail::view(next) =
      static_cast<T>(1.0 + beta) * detail::view(x) - static_cast<T>(beta) * detail::view(next);
  require_finite(next, "bjorck update", 0);
  return next;
}

template <typename T>
Matrix<T> bjorck_orthogonalize(const Matrix<T>& x0, double beta, std::size_t iterations) {
  Matrix<T> x = frobenius_precondition(x0).x1;
  for (std::size_t k = 0; k < iterations; ++k) x = bjorck_step(x, beta);
  return x;
}

template <typename T>
NsStepResult<T> ns_step(const Matrix<T>& x, const NsCoefficients& coeffs) {
  const Matrix<T> a = checked_gram(x, 0);
  return {apply_polynomial(x, a, coeffs, 0), 3};
}

template <typename T>
NsStepResult<T> ns_step(const Matrix<T>& x, const Matrix<T>& gram_in, const NsCoefficients& coeffs) {
  if (gram_in.rows() != x.cols() || gram_in.cols() != x.cols()) {
    throw DimensionError("ns_step: supplied Gram does not match x");
  }
  return {apply_polynomial(x, gram_in, coeffs, 0), 2};
}

template <typename T>
OrthogonalizeReport<T> orthogonalize(const Matrix<T>& x0, Pipeline pipeline,
                                     const CoefficientSchedule& schedule, std::size_t iterations,
                                     const OrthogonalizeOptions& options) {
  using clock = std::chrono::steady_clock;
  if (iterations == 0) throw InvalidArgument("orthogonalize: iterations must be >= 1");
  if (pipeline == Pipeline::muon && !schedule.is_constant()) {
    throw InvalidArgument("orthogonalize: muon expects a constant (single-triple) schedule, '" +
                          schedule.name + "' has " + std::to_string(schedule.size()));
  }
  if (x0.empty()) throw DimensionError("orthogonalize: empty matrix");
  require_finite(x0, "input", 0);
  const std::vector<NsCoefficients> triples = expand_schedule(schedule, iterations);

  OrthogonalizeReport<T> report;
  report.pipeline = pipeline;
  report.preconditioner = preconditioner_of(pipeline);
  report.schedule_name = schedule.name;
  report.per_iteration.reserve(iterations);

  const bool wide = x0.rows() < x0.cols();
  auto start = clock::now();

  Matrix<T> x;
  std::optional<Matrix<T>> handoff;
  if (report.preconditioner == PreconditionerKind::aol) {
    PreconditionResult<T> pre = aol_precondition(wide ? transpose(x0) : x0, options.precondition);
    x = std::move(pre.x1);
    report.matmul_count += 1;
    if (options.reuse_gram) handoff = std::move(pre.gram1);
  } else {
    x = frobenius_precondition(wide ? transpose(x0) : x0).x1;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < iterations; ++k) {
    const std::size_t iteration = k + 1;
    Matrix<T> a;
    if (handoff) {
      a = std::move(*handoff);
      handoff.reset();
    } else {
      a = checked_gram(x, iteration);
      report.matmul_count += 1;
    }
    if (k > 0 && options.track_ortho_error) {
      report.per_iteration.back().ortho_error = gram_deviation(a);
    }
    x = apply_polynomial(x, a, triples[k], iteration);
    report.matmul_count += 2;

    const auto now = clock::now();
    report.per_iteration.push_back({triples[k], nan, now - start});
    start = now;
  }
  if (options.track_ortho_error) {
    report.per_iteration.back().ortho_error = gram_deviation(checked_gram(x, iterations));
  }

  report.iterations_run = iterations;
  report.result = wide ? transpose(x) : std::move(x);
  return report;
}

#define TURBO_INSTANTIATE(T)                                                                     \
  template Matrix<T> bjorck_step(const Matrix<T>&, double);                                     \
  template Matrix<T> bjorck_orthogonalize(const Matrix<T>&, double, std::size_t);               \
  template NsStepResult<T> ns_step(const Matrix<T>&, const NsCoefficients&);                    \
  template NsStepResult<T> ns_step(const Matrix<T>&, const Matrix<T>&, const NsCoefficients&); \
  template OrthogonalizeReport<T> orthogonalize(const Matrix<T>&, Pipeline,                     \
                                                const CoefficientSchedule&, std::size_t,        \
                                                const OrthogonalizeOptions&);

TURBO_INSTANTIATE(float)
TURBO_INSTANTIATE(double)
#undef TURBO_INSTANTIATE

}  // namespace turbo
