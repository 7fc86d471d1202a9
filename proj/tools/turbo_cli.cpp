// Command-line front end: benchmark sweeps, summaries, Pareto export, the toy
// trainer and one-off orthogonalization of a matrix file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "turbo/bench.hpp"
#include "turbo/linalg.hpp"
#include "turbo/matrix_io.hpp"
#include "turbo/metrics.hpp"
#include "turbo/trainer.hpp"

namespace {

enum Exit : int { kOk = 0, kConfigError = 1, kTrialFailures = 2, kOracleFailure = 3 };

using namespace turbo;

int cmd_sweep(const std::string& config_path, std::optional<std::size_t> threads) {
  SweepConfig config;
  std::map<Pipeline, CoefficientSchedule> schedules;
  try {
    config = sweep_config_from(KeyValueConfig::load(config_path));
    if (threads) config.threads = *threads;
    validate(config);
    schedules = load_sweep_schedules(config);
  } catch (const Error& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kConfigError;
  }

  for (auto s : config.sizes) {
    if (s > config.size_cap) std::cerr << "warning: size " << s << " is above the cap; oracle SVDs will be slow\n";
  }
  RecordWriter writer(config.output_path);
  const SweepResult result = run_sweep(config, schedules, [&](const BenchRecord& r) { writer.write(r); });

  std::cerr << "wrote " << result.records.size() << " records to " << config.output_path.string() << '\n';
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " failure(s):\n";
    for (const auto& f : result.failures) {
      std::cerr << "  size=" << f.size << " distribution=" << f.distribution.label() << " trial=" << f.trial_index;
      if (f.oracle) {
        std::cerr << " oracle";
      } else {
        std::cerr << " pipeline=" << f.pipeline << " iterations=" << f.iterations;
      }
      std::cerr << ": " << f.message << '\n';
    }
    return kTrialFailures;
  }
  return kOk;
}

int cmd_summarize(const std::string& csv, const std::string& csv_out) {
  std::vector<BenchRecord> records;
  try {
    records = read_records_csv(csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (records.empty()) {
    std::cerr << "error: " << csv << " holds no records\n";
    return kConfigError;
  }
  const auto rows = summarize(records);
  write_summary_text(std::cout, rows);
  if (!csv_out.empty()) {
    std::ofstream out(csv_out);
    write_summary_csv(out, rows);
  }
  return kOk;
}

int cmd_pareto(const std::string& csv, const std::string& out_path) {
  std::vector<BenchRecord> records;
  try {
    records = read_records_csv(csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (out_path.empty()) {
    pareto_export(records, std::cout);
  } else {
    std::ofstream out(out_path);
    pareto_export(records, out);
  }
  return kOk;
}

int cmd_train(const std::string& config_path, const std::string& out_path) {
  TrainerConfig config;
  std::vector<std::uint64_t> seeds;
  CoefficientSchedule schedule;
  try {
    const KeyValueConfig kv = KeyValueConfig::load(config_path);
    kv.reject_unknown({"layer_dims", "learning_rate", "momentum", "steps", "ns_iterations", "pipeline", "seed",
                       "seeds", "dataset", "samples", "separation", "batch_size", "precision", "schedule",
                       "data_dir"});
    config = trainer_config_from(kv);
    validate(config);
    seeds = kv.has("seeds") ? kv.get_u64s("seeds") : std::vector<std::uint64_t>{config.seed};
    std::filesystem::path data_dir = kv.get_string("data_dir", default_data_dir().string());
    if (data_dir.is_relative()) data_dir = kv.base_dir() / data_dir;
    std::filesystem::path file = default_schedule_file(config.pipeline, data_dir);
    if (kv.has("schedule")) {
      file = kv.get_string("schedule");
      if (file.is_relative()) file = kv.base_dir() / file;
    }
    schedule = load_schedule(file);
    expand_schedule(schedule, config.iterations());
  } catch (const Error& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kConfigError;
  }

  std::ofstream file_out;
  if (!out_path.empty()) file_out.open(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file_out;
  int code = kOk;
  for (auto seed : seeds) {
    config.seed = seed;
    try {
      out << to_json_line(train(config, schedule)) << '\n' << std::flush;
    } catch (const Error& e) {
      std::cerr << "seed " << seed << ": " << e.what() << '\n';
      code = kTrialFailures;
    }
  }
  return code;
}

struct OrthoArgs {
  std::string pipeline;
  std::size_t iters = 0;
  std::string in, out, schedule;
  std::string precision = "single";
  bool report = false;
};

template <typename T>
int run_orthogonalize(const MatrixD& x, Pipeline p, const CoefficientSchedule& s, const OrthoArgs& a) {
  Matrix<T> input = x.cast<T>();
  const OrthogonalizeReport<T> rep = orthogonalize(input, p, s, a.iters);
  write_matrix(a.out, rep.result);
  if (a.report) {
    std::cout << "pipeline " << to_string(p) << "  schedule " << s.name << "  iterations " << rep.iterations_run
              << "  matmuls " << rep.matmul_count << '\n';
    for (std::size_t k = 0; k < rep.per_iteration.size(); ++k) {
      std::cout << "  iteration " << k + 1 << "  ortho_error " << rep.per_iteration[k].ortho_error << '\n';
    }
    double polar = 0.0;
    try {
      polar = polar_error(rep.result, polar_factor_exact(x).q);
    } catch (const Error& e) {
      std::cerr << "oracle failure: " << e.what() << '\n';
      return kOracleFailure;
    }
    std::cout << "  polar_error " << polar << '\n';
  }
  return kOk;
}

int cmd_orthogonalize(const OrthoArgs& a) {
  Pipeline p;
  CoefficientSchedule schedule;
  MatrixD x;
  Precision precision;
  try {
    p = parse_pipeline(a.pipeline);
    precision = parse_precision(a.precision);
    schedule = load_schedule(a.schedule.empty() ? default_schedule_file(p, default_data_dir()) : std::filesystem::path(a.schedule));
    x = read_matrix(a.in);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return precision == Precision::single ? run_orthogonalize<float>(x, p, schedule, a)
                                        : run_orthogonalize<double>(x, p, schedule, a);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton-Schulz orthogonalization benchmarks and tools"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "benchmark sweeps and reports");
  bench->require_subcommand(1);

  std::string sweep_config;
  std::optional<std::size_t> threads;
  auto* sweep = bench->add_subcommand("sweep", "run a configured sweep, writing CSV and JSON lines");
  sweep->add_option("--config", sweep_config, "sweep config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--threads", threads, "worker threads (overrides the config)");

  std::string summarize_csv, summarize_out;
  auto* summ = bench->add_subcommand("summarize", "mean and std per (pipeline, size, distribution, iterations)");
  summ->add_option("csv", summarize_csv, "records CSV")->required()->check(CLI::ExistingFile);
  summ->add_option("--csv-out", summarize_out, "also write the summary as CSV");

  std::string pareto_csv, pareto_out;
  auto* pareto = bench->add_subcommand("pareto", "export cost/error frontier points");
  pareto->add_option("csv", pareto_csv, "records CSV")->required()->check(CLI::ExistingFile);
  pareto->add_option("--out", pareto_out, "output file (default stdout)");

  std::string train_config, train_out;
  auto* train = app.add_subcommand("train", "train the toy model, one JSON line per seed");
  train->add_option("--config", train_config, "trainer config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "output file (default stdout)");

  OrthoArgs oa;
  auto* ortho = app.add_subcommand("orthogonalize", "orthogonalize a matrix file");
  ortho->add_option("--pipeline", oa.pipeline, "muon, muon_plus or turbo")->required();
  ortho->add_option("--iters", oa.iters, "iteration count")->required()->check(CLI::PositiveNumber);
  ortho->add_option("--in", oa.in, "input matrix file")->required()->check(CLI::ExistingFile);
  ortho->add_option("--out", oa.out, "output matrix file")->required();
  ortho->add_option("--schedule", oa.schedule, "coefficient table (default: shipped table for the pipeline)");
  ortho->add_option("--precision", oa.precision, "single or double")->capture_default_str();
  ortho->add_flag("--report", oa.report, "print per-iteration errors and the polar error against the SVD oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sweep->parsed()) return cmd_sweep(sweep_config, threads);
    if (summ->parsed()) return cmd_summarize(summarize_csv, summarize_out);
    if (pareto->parsed()) return cmd_pareto(pareto_csv, pareto_out);
    if (train->parsed()) return cmd_train(train_config, train_out);
    if (ortho->parsed()) return cmd_orthogonalize(oa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
