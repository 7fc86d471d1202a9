#include "turbo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "turbo/metrics.hpp"
#include "turbo/precondition.hpp"

#ifndef TURBO_DEFAULT_DATA_DIR
#define TURBO_DEFAULT_DATA_DIR "data"
#endif

namespace turbo {

std::filesystem::path default_data_dir() { return TURBO_DEFAULT_DATA_DIR; }

std::filesystem::path default_schedule_file(Pipeline p, const std::filesystem::path& data_dir) {
  return data_dir / "schedules" / (p == Pipeline::muon ? "muon.txt" : "muon_plus.txt");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename F>
auto at_line(const KeyValueConfig& kv, std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    if (e.line() != 0) throw;
    throw ParseError(e.what(), kv.line_of(key));
  }
}

}  // namespace

SweepConfig sweep_config_from(const KeyValueConfig& kv) {
  kv.reject_unknown({"sizes", "distributions", "pipelines", "iterations", "batch", "seed", "precision", "output",
                     "size_cap", "allow_large", "threads", "data_dir"},
                    {"schedule."});
  SweepConfig c;
  c.sizes = kv.get_counts("sizes");
  for (const auto& d : kv.get_list("distributions")) {
    c.distributions.push_back(at_line(kv, "distributions", [&] { return parse_distribution(d); }));
  }
  for (const auto& p : kv.get_list("pipelines")) {
    c.pipelines.push_back(at_line(kv, "pipelines", [&] { return parse_pipeline(p); }));
  }
  c.iteration_counts = kv.get_counts("iterations");
  c.batch = kv.get_count("batch", c.batch);
  c.seed = kv.get_u64("seed", c.seed);
  if (kv.has("precision")) {
    c.precision = at_line(kv, "precision", [&] { return parse_precision(kv.get_string("precision")); });
  }
  c.output_path = kv.get_string("output", "records.csv");
  if (c.output_path.is_relative()) c.output_path = kv.base_dir() / c.output_path;
  c.size_cap = kv.get_count("size_cap", c.size_cap);
  c.allow_large = kv.get_bool("allow_large", c.allow_large);
  c.threads = kv.get_count("threads", c.threads);

  std::filesystem::path data_dir = kv.get_string("data_dir", default_data_dir().string());
  if (data_dir.is_relative()) data_dir = kv.base_dir() / data_dir;
  for (Pipeline p : c.pipelines) c.schedule_files[p] = default_schedule_file(p, data_dir);
  for (const auto& [name, path] : kv.with_prefix("schedule.")) {
    const std::string key = "schedule." + name;
    const Pipeline p = at_line(kv, key, [&] { return parse_pipeline(name); });
    std::filesystem::path file = path;
    if (file.is_relative()) file = kv.base_dir() / file;
    c.schedule_files[p] = file;
  }
  return c;
}

void validate(const SweepConfig& c) {
  if (c.sizes.empty() || c.distributions.empty() || c.pipelines.empty() || c.iteration_counts.empty()) {
    throw InvalidArgument("sweep config: sizes, distributions, pipelines and iterations must be non-empty");
  }
  if (c.batch == 0) throw InvalidArgument("sweep config: batch must be >= 1");
  for (auto s : c.sizes) {
    if (s == 0) throw InvalidArgument("sweep config: sizes must be positive");
    if (s > c.size_cap && !c.allow_large) {
      throw InvalidArgument("sweep config: size " + std::to_string(s) + " exceeds the cap of " +
                            std::to_string(c.size_cap) + " (set allow_large = true to override)");
    }
  }
  for (auto k : c.iteration_counts) {
    if (k == 0) throw InvalidArgument("sweep config: iteration counts must be >= 1");
  }
  for (const auto& d : c.distributions) validate(SampleSpec{1, 1, d, 0, 1});
}

std::map<Pipeline, CoefficientSchedule> load_sweep_schedules(const SweepConfig& c) {
  const std::size_t max_iters = *std::max_element(c.iteration_counts.begin(), c.iteration_counts.end());
  std::map<Pipeline, CoefficientSchedule> out;
  for (Pipeline p : c.pipelines) {
    auto it = c.schedule_files.find(p);
    const auto path = it != c.schedule_files.end() ? it->second : default_schedule_file(p, default_data_dir());
    CoefficientSchedule s = load_schedule(path);
    if (p == Pipeline::muon && !s.is_constant()) {
      throw InvalidArgument("schedule " + path.string() + ": muon needs a single constant triple");
    }
    if (!s.is_constant() && s.size() < max_iters) {
      throw InvalidArgument("schedule " + path.string() + " has " + std::to_string(s.size()) +
                            " triples but " + std::to_string(max_iters) + " iterations are requested");
    }
    out.emplace(p, std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Job {
  std::size_t size;
  Distribution distribution;
  std::size_t trial;
};

struct TrialOutput {
  std::vector<BenchRecord> records;
  std::vector<TrialFailure> failures;
};

template <typename T>
TrialOutput run_trial(const SweepConfig& c, const std::map<Pipeline, CoefficientSchedule>& schedules,
                      const Job& job) {
  using clock = std::chrono::steady_clock;
  TrialOutput out;
  const SampleSpec spec{job.size, job.size, job.distribution, c.seed, c.batch};
  const Matrix<T> x0 = sample_one<T>(spec, job.trial);

  MatrixD q;
  std::optional<MatrixD> q_aol;
  try {
    const MatrixD x0d = x0.template cast<double>();
    q = polar_factor_exact(x0d).q;
    if (std::find(c.pipelines.begin(), c.pipelines.end(), Pipeline::turbo) != c.pipelines.end()) {
      q_aol = polar_factor_exact(aol_precondition(x0d).x1).q;
    }
  } catch (const Error& e) {
    out.failures.push_back({job.size, job.distribution, job.trial, "", 0, true, e.what()});
    return out;
  }

  OrthogonalizeOptions opts;
  opts.track_ortho_error = false;
  for (Pipeline p : c.pipelines) {
    const CoefficientSchedule& schedule = schedules.at(p);
    for (std::size_t iters : c.iteration_counts) {
      try {
        const auto start = clock::now();
        OrthogonalizeReport<T> rep = orthogonalize(x0, p, schedule, iters, opts);
        const std::chrono::duration<double> wall = clock::now() - start;
        const ErrorBreakdown e = decompose_with_reference(q, p == Pipeline::turbo ? *q_aol : q, rep.result);
        BenchRecord r;
        r.pipeline = p;
        r.size = job.size;
        r.distribution = job.distribution;
        r.iterations = iters;
        r.trial_index = job.trial;
        r.polar_error = e.polar_error;
        r.ortho_error = e.ortho_error;
        r.bias_error = e.bias_error;
        r.approx_error = e.approx_error;
        r.matmul_count = rep.matmul_count;
        r.wall_time = wall.count();
        r.precision = precision_of<T>();
        r.schedule_name = schedule.name;
        r.seed = c.seed;
        out.records.push_back(std::move(r));
      } catch (const Error& e) {
        out.failures.push_back(
            {job.size, job.distribution, job.trial, std::string(to_string(p)), iters, false, e.what()});
      }
    }
  }
  return out;
}

TrialOutput dispatch(const SweepConfig& c, const std::map<Pipeline, CoefficientSchedule>& schedules,
                     const Job& job) {
  return c.precision == Precision::single ? run_trial<float>(c, schedules, job)
                                          : run_trial<double>(c, schedules, job);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const std::map<Pipeline, CoefficientSchedule>& schedules,
                      const RecordSink& sink) {
  validate(config);
  for (Pipeline p : config.pipelines) {
    if (schedules.find(p) == schedules.end()) {
      throw InvalidArgument("run_sweep: no schedule for pipeline " + std::string(to_string(p)));
    }
  }
  SweepResult result;
  for (auto s : config.sizes) {
    if (s > config.size_cap) {
      result.warnings.push_back("size " + std::to_string(s) + " exceeds the default cap of " +
                                std::to_string(config.size_cap) + "; the SVD oracle will be slow");
    }
  }

  std::vector<Job> jobs;
  for (auto size : config.sizes) {
    for (const auto& d : config.distributions) {
      for (std::size_t t = 0; t < config.batch; ++t) jobs.push_back({size, d, t});
    }
  }

  auto emit = [&](TrialOutput&& out) {
    for (auto& r : out.records) {
      if (sink) sink(r);
      result.records.push_back(std::move(r));
    }
    for (auto& f : out.failures) result.failures.push_back(std::move(f));
  };

  const std::size_t workers = std::min(std::max<std::size_t>(config.threads, 1), jobs.size());
  if (workers <= 1) {
    for (const auto& job : jobs) emit(dispatch(config, schedules, job));
    return result;
  }

  // Workers fill slots in any order; the caller drains them in job order.
  std::vector<std::optional<TrialOutput>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::condition_variable ready;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
        std::optional<TrialOutput> out;
        try {
          out = dispatch(config, schedules, jobs[k]);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          out = TrialOutput{};
        }
        std::lock_guard lock(mu);
        slots[k] = std::move(out);
        ready.notify_all();
      }
    });
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return slots[k].has_value(); });
    TrialOutput out = std::move(*slots[k]);
    slots[k].reset();
    lock.unlock();
    emit(std::move(out));
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

// ---------------------------------------------------------------------------
// CSV

const std::vector<std::string> kRecordColumns = {
    "pipeline",     "size",        "distribution", "alpha",     "beta",      "iterations",
    "trial_index",  "polar_error", "ortho_error",  "bias_error", "approx_error", "matmul_count",
    "wall_time",    "precision",   "schedule_name", "seed"};

void write_csv_header(std::ostream& out) {
  for (std::size_t k = 0; k < kRecordColumns.size(); ++k) out << (k ? "," : "") << kRecordColumns[k];
  out << '\n';
}

void write_csv_row(std::ostream& out, const BenchRecord& r) {
  const bool stable = r.distribution.kind == Distribution::Kind::stable;
  out << to_string(r.pipeline) << ',' << r.size << ',' << (stable ? "stable" : "normal") << ','
      << (stable ? fmt(r.distribution.alpha) : "") << ',' << (stable ? fmt(r.distribution.beta) : "") << ','
      << r.iterations << ',' << r.trial_index << ',' << fmt(r.polar_error) << ',' << fmt(r.ortho_error) << ','
      << fmt(r.bias_error) << ',' << fmt(r.approx_error) << ',' << r.matmul_count << ',' << fmt(r.wall_time)
      << ',' << to_string(r.precision) << ',' << r.schedule_name << ',' << r.seed << '\n';
}

std::string to_json_line(const BenchRecord& r) {
  nlohmann::ordered_json j;
  j["pipeline"] = std::string(to_string(r.pipeline));
  j["size"] = r.size;
  j["distribution"] = r.distribution.kind == Distribution::Kind::stable ? "stable" : "normal";
  if (r.distribution.kind == Distribution::Kind::stable) {
    j["alpha"] = r.distribution.alpha;
    j["beta"] = r.distribution.beta;
  } else {
    j["alpha"] = nullptr;
    j["beta"] = nullptr;
  }
  j["iterations"] = r.iterations;
  j["trial_index"] = r.trial_index;
  j["polar_error"] = r.polar_error;
  j["ortho_error"] = r.ortho_error;
  j["bias_error"] = r.bias_error;
  j["approx_error"] = r.approx_error;
  j["matmul_count"] = r.matmul_count;
  j["wall_time"] = r.wall_time;
  j["precision"] = std::string(to_string(r.precision));
  j["schedule_name"] = r.schedule_name;
  j["seed"] = r.seed;
  return j.dump();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename V>
V field_as(const std::string& text, const char* column, std::size_t line) {
  V v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(std::string("bad ") + column + " value '" + text + "'", line);
  }
  return v;
}

}  // namespace

std::vector<BenchRecord> read_records_csv(std::istream& in) {
  std::vector<BenchRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto f = split_csv(line);
    if (!header_seen) {
      if (f != kRecordColumns) throw ParseError("unexpected CSV header", line_no);
      header_seen = true;
      continue;
    }
    if (f.size() != kRecordColumns.size()) {
      throw ParseError("expected " + std::to_string(kRecordColumns.size()) + " fields, found " +
                           std::to_string(f.size()),
                       line_no);
    }
    BenchRecord r;
    try {
      r.pipeline = parse_pipeline(f[0]);
      r.precision = parse_precision(f[13]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.size = field_as<std::size_t>(f[1], "size", line_no);
    if (f[2] == "stable") {
      r.distribution = Distribution::stable(field_as<double>(f[3], "alpha", line_no),
                                            field_as<double>(f[4], "beta", line_no));
    } else if (f[2] != "normal") {
      throw ParseError("unknown distribution '" + f[2] + "'", line_no);
    }
    r.iterations = field_as<std::size_t>(f[5], "iterations", line_no);
    r.trial_index = field_as<std::size_t>(f[6], "trial_index", line_no);
    r.polar_error = field_as<double>(f[7], "polar_error", line_no);
    r.ortho_error = field_as<double>(f[8], "ortho_error", line_no);
    r.bias_error = field_as<double>(f[9], "bias_error", line_no);
    r.approx_error = field_as<double>(f[10], "approx_error", line_no);
    r.matmul_count = field_as<std::size_t>(f[11], "matmul_count", line_no);
    r.wall_time = field_as<double>(f[12], "wall_time", line_no);
    r.schedule_name = f[14];
    r.seed = field_as<std::uint64_t>(f[15], "seed", line_no);
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("missing CSV header", 0);
  return records;
}

std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open records file " + path.string(), 0);
  try {
    return read_records_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

RecordWriter::RecordWriter(const std::filesystem::path& csv_path)
    : csv_(csv_path), jsonl_(std::filesystem::path(csv_path).concat(".jsonl")) {
  if (!csv_ || !jsonl_) throw Error("cannot open output files next to " + csv_path.string());
  write_csv_header(csv_);
  csv_.flush();
}

void RecordWriter::write(const BenchRecord& r) {
  write_csv_row(csv_, r);
  jsonl_ << to_json_line(r) << '\n';
  csv_.flush();
  jsonl_.flush();
  if (!csv_ || !jsonl_) throw Error("write failed");
}

// ---------------------------------------------------------------------------
// Summaries

Stat mean_std(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
  struct Group {
    SummaryRow row;
    std::vector<double> polar, ortho, bias, approx;
    double matmul = 0.0, wall = 0.0;
  };
  std::vector<Group> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.row.pipeline == r.pipeline && g.row.size == r.size && g.row.distribution == r.distribution &&
             g.row.iterations == r.iterations;
    });
    if (it == groups.end()) {
      Group g;
      g.row.pipeline = r.pipeline;
      g.row.size = r.size;
      g.row.distribution = r.distribution;
      g.row.iterations = r.iterations;
      groups.push_back(std::move(g));
      it = groups.end() - 1;
    }
    it->polar.push_back(r.polar_error);
    it->ortho.push_back(r.ortho_error);
    it->bias.push_back(r.bias_error);
    it->approx.push_back(r.approx_error);
    it->matmul += static_cast<double>(r.matmul_count);
    it->wall += r.wall_time;
  }
  std::vector<SummaryRow> rows;
  for (auto& g : groups) {
    const auto n = static_cast<double>(g.polar.size());
    g.row.count = g.polar.size();
    g.row.polar_error = mean_std(g.polar);
    g.row.ortho_error = mean_std(g.ortho);
    g.row.bias_error = mean_std(g.bias);
    g.row.approx_error = mean_std(g.approx);
    g.row.matmul_count = g.matmul / n;
    g.row.wall_time = g.wall / n;
    rows.push_back(g.row);
  }
  return rows;
}

void write_summary_text(std::ostream& out, const std::vector<SummaryRow>& rows) {
  auto pm = [](const Stat& s) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(3) << s.mean << " +- " << s.std;
    return ss.str();
  };
  out << std::left << std::setw(10) << "pipeline" << std::right << std::setw(6) << "size" << "  " << std::left
      << std::setw(16) << "distribution" << std::right << std::setw(6) << "iters" << std::setw(6) << "n"
      << std::setw(24) << "polar_error" << std::setw(24) << "ortho_error" << std::setw(24) << "bias_error"
      << std::setw(24) << "approx_error" << std::setw(9) << "matmuls" << std::setw(12) << "wall_s" << '\n';
  for (const auto& r : rows) {
    std::ostringstream wall;
    wall << std::scientific << std::setprecision(3) << r.wall_time;
    out << std::left << std::setw(10) << to_string(r.pipeline) << std::right << std::setw(6) << r.size << "  "
        << std::left << std::setw(16) << r.distribution.label() << std::right << std::setw(6) << r.iterations
        << std::setw(6) << r.count << std::setw(24) << pm(r.polar_error) << std::setw(24) << pm(r.ortho_error)
        << std::setw(24) << pm(r.bias_error) << std::setw(24) << pm(r.approx_error) << std::setw(9)
        << fmt(r.matmul_count) << std::setw(12) << wall.str() << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "pipeline,size,distribution,iterations,count,polar_error_mean,polar_error_std,ortho_error_mean,"
         "ortho_error_std,bias_error_mean,bias_error_std,approx_error_mean,approx_error_std,matmul_count_mean,"
         "wall_time_mean\n";
  for (const auto& r : rows) {
    out << to_string(r.pipeline) << ',' << r.size << ',' << '"' << r.distribution.label() << '"' << ','
        << r.iterations << ',' << r.count << ',' << fmt(r.polar_error.mean) << ',' << fmt(r.polar_error.std)
        << ',' << fmt(r.ortho_error.mean) << ',' << fmt(r.ortho_error.std) << ',' << fmt(r.bias_error.mean)
        << ',' << fmt(r.bias_error.std) << ',' << fmt(r.approx_error.mean) << ',' << fmt(r.approx_error.std)
        << ',' << fmt(r.matmul_count) << ',' << fmt(r.wall_time) << '\n';
  }
}

std::vector<ParetoPoint> pareto_points(const std::vector<BenchRecord>& records) {
  std::vector<Distribution> dist_order;
  for (const auto& r : records) {
    if (std::find(dist_order.begin(), dist_order.end(), r.distribution) == dist_order.end()) {
      dist_order.push_back(r.distribution);
    }
  }
  auto dist_rank = [&](const Distribution& d) {
    return std::find(dist_order.begin(), dist_order.end(), d) - dist_order.begin();
  };

  std::vector<ParetoPoint> points;
  for (const auto& s : summarize(records)) {
    ParetoPoint p;
    p.size = s.size;
    p.distribution = s.distribution;
    p.pipeline = s.pipeline;
    p.iterations = s.iterations;
    p.matmul_count = s.matmul_count;
    p.polar_error = s.polar_error.mean;
    p.wall_time = s.wall_time;
    points.push_back(p);
  }
  for (auto& p : points) {
    p.on_frontier = std::none_of(points.begin(), points.end(), [&](const ParetoPoint& o) {
      if (o.size != p.size || !(o.distribution == p.distribution)) return false;
      const bool no_worse = o.matmul_count <= p.matmul_count && o.polar_error <= p.polar_error;
      const bool better = o.matmul_count < p.matmul_count || o.polar_error < p.polar_error;
      return no_worse && better;
    });
  }
  std::stable_sort(points.begin(), points.end(), [&](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.size != b.size) return a.size < b.size;
    const auto da = dist_rank(a.distribution), db = dist_rank(b.distribution);
    if (da != db) return da < db;
    if (a.pipeline != b.pipeline) return a.pipeline < b.pipeline;
    if (a.matmul_count != b.matmul_count) return a.matmul_count < b.matmul_count;
    return a.iterations < b.iterations;
  });
  return points;
}

void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& points) {
  out << "# cost axis: matmul_count (logical n^3 products per pipeline run); wall_time is a secondary, "
         "hardware-dependent column\n";
  out << "size,distribution,pipeline,iterations,matmul_count,polar_error,wall_time,on_frontier\n";
  for (const auto& p : points) {
    out << p.size << ',' << '"' << p.distribution.label() << '"' << ',' << to_string(p.pipeline) << ','
        << p.iterations << ',' << fmt(p.matmul_count) << ',' << fmt(p.polar_error) << ',' << fmt(p.wall_time)
        << ',' << (p.on_frontier ? 1 : 0) << '\n';
  }
}

void pareto_export(const std::vector<BenchRecord>& records, std::ostream& out) {
  write_pareto_csv(out, pareto_points(records));
}

}  // namespace turbo
