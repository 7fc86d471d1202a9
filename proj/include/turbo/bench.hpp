#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "turbo/config.hpp"
#include "turbo/matrix.hpp"
#include "turbo/newton_schulz.hpp"
#include "turbo/sampling.hpp"

namespace turbo {

/// Directory holding the shipped schedule tables (data/schedules).
std::filesystem::path default_data_dir();

/// Default schedule file per pipeline: muon -> muon.txt, muon_plus and
/// turbo -> muon_plus.txt.
std::filesystem::path default_schedule_file(Pipeline p, const std::filesystem::path& data_dir);

struct SweepConfig {
  std::vector<std::size_t> sizes;
  std::vector<Distribution> distributions;
  std::vector<Pipeline> pipelines;
  std::vector<std::size_t> iteration_counts;
  std::map<Pipeline, std::filesystem::path> schedule_files;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  Precision precision = Precision::single;
  std::filesystem::path output_path;
  std::size_t size_cap = 2048;
  /// Permit sizes above size_cap (a warning is emitted).
  bool allow_large = false;
  /// Worker threads for independent trials; output order does not depend on it.
  std::size_t threads = 1;
};

/// Builds a SweepConfig from a parsed file. Relative paths resolve against
/// the file's directory. Throws ParseError for unknown keys or bad values.
SweepConfig sweep_config_from(const KeyValueConfig& kv);

/// Throws InvalidArgument for empty lists, zero sizes/iterations/batch, or
/// sizes above the cap without allow_large.
void validate(const SweepConfig& config);

struct BenchRecord {
  Pipeline pipeline = Pipeline::muon;
  std::size_t size = 0;
  Distribution distribution;
  std::size_t iterations = 0;
  std::size_t trial_index = 0;
  double polar_error = 0.0;
  double ortho_error = 0.0;
  double bias_error = 0.0;
  double approx_error = 0.0;
  std::size_t matmul_count = 0;
  double wall_time = 0.0;  ///< seconds spent in the pipeline
  Precision precision = Precision::single;
  std::string schedule_name;
  std::uint64_t seed = 0;
};

/// A trial (or one pipeline run within it) that produced no record.
struct TrialFailure {
  std::size_t size = 0;
  Distribution distribution;
  std::size_t trial_index = 0;
  /// Empty when the oracle failed, so the whole trial was skipped.
  std::string pipeline;
  std::size_t iterations = 0;
  bool oracle = false;
  std::string message;
};

struct SweepResult {
  std::vector<BenchRecord> records;
  std::vector<TrialFailure> failures;
  std::vector<std::string> warnings;
};

using RecordSink = std::function<void(const BenchRecord&)>;

/// Runs the full Cartesian sweep. Matrix `trial` of (size, distribution) is
/// sample_one({size, size, distribution, seed}, trial), so a record can be
/// regenerated from its own columns. Records are produced in the order
/// size, distribution, trial, pipeline, iterations and handed to `sink` as
/// soon as the trial completes (in that order, regardless of threads).
SweepResult run_sweep(const SweepConfig& config, const std::map<Pipeline, CoefficientSchedule>& schedules,
                      const RecordSink& sink = {});

/// Loads every schedule named in config (or the defaults) and checks that
/// each table is long enough for the largest iteration count.
std::map<Pipeline, CoefficientSchedule> load_sweep_schedules(const SweepConfig& config);

// ---------------------------------------------------------------------------
// CSV

/// Fixed column order of the records file.
extern const std::vector<std::string> kRecordColumns;

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRecord& r);
std::string to_json_line(const BenchRecord& r);
/// Skips blank and '#' lines; throws ParseError on a bad header or row.
std::vector<BenchRecord> read_records_csv(std::istream& in);
std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path);

/// Appends records to `<path>` (CSV) and `<path>.jsonl`, flushing after
/// every row.
class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& csv_path);
  void write(const BenchRecord& r);

 private:
  std::ofstream csv_;
  std::ofstream jsonl_;
};

// ---------------------------------------------------------------------------
// Summaries

struct Stat {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single value
};

Stat mean_std(const std::vector<double>& values);

struct SummaryRow {
  Pipeline pipeline = Pipeline::muon;
  std::size_t size = 0;
  Distribution distribution;
  std::size_t iterations = 0;
  std::size_t count = 0;
  Stat polar_error, ortho_error, bias_error, approx_error;
  double matmul_count = 0.0;
  double wall_time = 0.0;
};

/// One row per (pipeline, size, distribution, iterations) in order of first
/// appearance.
std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records);
void write_summary_text(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct ParetoPoint {
  std::size_t size = 0;
  Distribution distribution;
  Pipeline pipeline = Pipeline::muon;
  std::size_t iterations = 0;
  double matmul_count = 0.0;
  double polar_error = 0.0;  ///< group mean
  double wall_time = 0.0;    ///< group mean, secondary
  bool on_frontier = false;
};

/// Mean (matmul_count, polar_error) per (size, distribution, pipeline,
/// iterations). A point is on the frontier when no other point of the same
/// (size, distribution) has cost and error both no larger, one strictly.
/// Sorted by size, distribution (first appearance), pipeline, cost.
std::vector<ParetoPoint> pareto_points(const std::vector<BenchRecord>& records);
/// CSV with a leading '#' comment naming the cost axis.
void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& points);

/// pareto_points followed by write_pareto_csv.
void pareto_export(const std::vector<BenchRecord>& records, std::ostream& out);

}  // namespace turbo
