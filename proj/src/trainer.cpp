#include "turbo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "turbo/linalg.hpp"
#include "turbo/sampling.hpp"

namespace turbo {

Dataset generate_dataset(std::uint64_t seed, std::size_t classes, std::size_t dim, std::size_t samples,
                         double separation) {
  if (classes < 2) throw InvalidArgument("generate_dataset: need at least 2 classes");
  if (dim < classes) throw InvalidArgument("generate_dataset: dim must be >= classes for simplex means");
  if (samples < 2) throw InvalidArgument("generate_dataset: need at least 2 samples");

  const double centroid = separation / static_cast<double>(classes);
  EntryStream noise(seed, 0);
  MatrixD x(samples, dim);
  std::vector<std::size_t> y(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    y[i] = i % classes;
    for (std::size_t j = 0; j < dim; ++j) {
      double mean = j < classes ? -centroid : 0.0;
      if (j == y[i]) mean += separation;
      x(i, j) = mean + noise.normal();
    }
  }

  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(splitmix64(seed ^ 0x5eedULL));
  std::shuffle(order.begin(), order.end(), engine);

  const std::size_t n_train = std::max<std::size_t>(1, samples * 4 / 5);
  Dataset d;
  d.classes = classes;
  d.train_x = MatrixD(n_train, dim);
  d.val_x = MatrixD(samples - n_train, dim);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t src = order[k];
    const bool train = k < n_train;
    MatrixD& dst = train ? d.train_x : d.val_x;
    const std::size_t row = train ? k : k - n_train;
    std::copy(x.row(src).begin(), x.row(src).end(), dst.row(row).begin());
    (train ? d.train_y : d.val_y).push_back(y[src]);
  }
  return d;
}

void validate(const TrainerConfig& c) {
  if (c.layer_dims.size() < 2) throw InvalidArgument("layer_dims needs at least input and output sizes");
  if (std::find(c.layer_dims.begin(), c.layer_dims.end(), 0) != c.layer_dims.end()) {
    throw InvalidArgument("layer_dims entries must be positive");
  }
  if (!(c.learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be >= 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  if (c.steps == 0) throw InvalidArgument("steps must be >= 1");
  if (c.batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (c.dataset != "gaussian_mixture") throw InvalidArgument("unknown dataset '" + c.dataset + "'");
  if (c.layer_dims.back() < 2) throw InvalidArgument("need at least 2 output classes");
  if (c.layer_dims.front() < c.layer_dims.back()) {
    throw InvalidArgument("gaussian_mixture needs input dim >= number of classes");
  }
  if (c.samples < 5) throw InvalidArgument("samples must be >= 5");
}

TrainerConfig trainer_config_from(const KeyValueConfig& kv) {
  TrainerConfig c;
  if (kv.has("layer_dims")) c.layer_dims = kv.get_counts("layer_dims");
  c.learning_rate = kv.get_real("learning_rate", c.learning_rate);
  c.momentum = kv.get_real("momentum", c.momentum);
  c.steps = kv.get_count("steps", c.steps);
  c.ns_iterations = kv.get_count("ns_iterations", c.ns_iterations);
  if (kv.has("pipeline")) {
    try {
      c.pipeline = parse_pipeline(kv.get_string("pipeline"));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), kv.line_of("pipeline"));
    }
  }
  c.seed = kv.get_u64("seed", c.seed);
  c.dataset = kv.get_string("dataset", c.dataset);
  c.samples = kv.get_count("samples", c.samples);
  c.separation = kv.get_real("separation", c.separation);
  c.batch_size = kv.get_count("batch_size", c.batch_size);
  if (kv.has("precision")) {
    try {
      c.precision = parse_precision(kv.get_string("precision"));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), kv.line_of("precision"));
    }
  }
  return c;
}

namespace {

// Orthogonalized weight updates have entry RMS kUpdateRms * learning_rate.
constexpr double kUpdateRms = 0.2;

struct Layer {
  MatrixD w;  // out x in
  std::vector<double> b;
  MatrixD w_momentum;
  std::vector<double> b_momentum;
};

struct Forward {
  std::vector<MatrixD> activations;  // input, hidden..., logits
  std::vector<MatrixD> pre;          // pre-activations per layer
};

Forward forward(const std::vector<Layer>& net, const MatrixD& x) {
  Forward f;
  f.activations.push_back(x);
  for (std::size_t l = 0; l < net.size(); ++l) {
    MatrixD z = matmul(f.activations.back(), transpose(net[l].w));
    for (std::size_t i = 0; i < z.rows(); ++i) {
      for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += net[l].b[j];
    }
    MatrixD h = z;
    if (l + 1 < net.size()) {
      for (auto& v : h.data()) v = std::max(v, 0.0);
    }
    f.pre.push_back(std::move(z));
    f.activations.push_back(std::move(h));
  }
  return f;
}

// Row-wise softmax in place; returns the mean cross-entropy.
double softmax_xent(MatrixD& logits, const std::vector<std::size_t>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& v : row) sum += (v = std::exp(v - mx));
    for (auto& v : row) v /= sum;
    loss -= std::log(std::max(row[y[i]], 1e-300));
  }
  return loss / static_cast<double>(logits.rows());
}

double dataset_loss(const std::vector<Layer>& net, const MatrixD& x, const std::vector<std::size_t>& y) {
  MatrixD logits = forward(net, x).activations.back();
  return softmax_xent(logits, y);
}

double accuracy(const std::vector<Layer>& net, const MatrixD& x, const std::vector<std::size_t>& y) {
  if (x.rows() == 0) return 0.0;
  const MatrixD logits = forward(net, x).activations.back();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += pred == y[i];
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

template <typename T>
MatrixD orthogonalized(const MatrixD& m, const TrainerConfig& c, const CoefficientSchedule& schedule) {
  OrthogonalizeOptions opts;
  opts.track_ortho_error = false;
  if constexpr (std::is_same_v<T, double>) {
    return orthogonalize(m, c.pipeline, schedule, c.iterations(), opts).result;
  } else {
    return orthogonalize(m.cast<T>(), c.pipeline, schedule, c.iterations(), opts).result.template cast<double>();
  }
}

}  // namespace

TrainReport train(const TrainerConfig& config, const CoefficientSchedule& schedule) {
  validate(config);
  const auto& dims = config.layer_dims;
  const Dataset data = generate_dataset(config.seed, dims.back(), dims.front(), config.samples, config.separation);

  std::vector<Layer> net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    EntryStream init(splitmix64(config.seed ^ 0x1417ULL), l);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    Layer layer{MatrixD(dims[l + 1], dims[l]), std::vector<double>(dims[l + 1], 0.0),
                MatrixD(dims[l + 1], dims[l]), std::vector<double>(dims[l + 1], 0.0)};
    for (auto& v : layer.w.data()) v = scale * init.normal();
    net.push_back(std::move(layer));
  }

  TrainReport report;
  report.pipeline = config.pipeline;
  report.ns_iterations = config.iterations();
  report.seed = config.seed;

  std::mt19937_64 batch_engine(splitmix64(config.seed ^ 0xba7cULL));
  std::uniform_int_distribution<std::size_t> pick(0, data.train_x.rows() - 1);
  const std::size_t dim = dims.front();
  MatrixD xb(config.batch_size, dim);
  std::vector<std::size_t> yb(config.batch_size);

  std::size_t above = 0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const double loss = dataset_loss(net, data.train_x, data.train_y);
    if (!std::isfinite(loss)) throw DivergenceError("training loss became non-finite at step " + std::to_string(step));
    report.loss_curve.push_back(loss);
    above = loss > 10.0 * report.loss_curve.front() ? above + 1 : 0;
    if (above >= 50) {
      throw DivergenceError("training diverged: loss above 10x its initial value for 50 steps (step " +
                            std::to_string(step) + ")");
    }

    for (std::size_t i = 0; i < config.batch_size; ++i) {
      const std::size_t k = pick(batch_engine);
      std::copy(data.train_x.row(k).begin(), data.train_x.row(k).end(), xb.row(i).begin());
      yb[i] = data.train_y[k];
    }

    Forward f = forward(net, xb);
    MatrixD delta = f.activations.back();
    softmax_xent(delta, yb);
    for (std::size_t i = 0; i < delta.rows(); ++i) delta(i, yb[i]) -= 1.0;
    for (auto& v : delta.data()) v /= static_cast<double>(config.batch_size);

    double min_alignment = std::numeric_limits<double>::infinity();
    for (std::size_t l = net.size(); l-- > 0;) {
      Layer& layer = net[l];
      const MatrixD grad_w = matmul(transpose(delta), f.activations[l]);
      std::vector<double> grad_b(layer.b.size(), 0.0);
      for (std::size_t i = 0; i < delta.rows(); ++i) {
        for (std::size_t j = 0; j < delta.cols(); ++j) grad_b[j] += delta(i, j);
      }
      if (l > 0) {
        MatrixD back = matmul(delta, layer.w);
        const MatrixD& z = f.pre[l - 1];
        for (std::size_t k = 0; k < back.size(); ++k) {
          if (z.data()[k] <= 0.0) back.data()[k] = 0.0;
        }
        delta = std::move(back);
      }

      auto mw = layer.w_momentum.data();
      for (std::size_t k = 0; k < mw.size(); ++k) mw[k] = config.momentum * mw[k] + grad_w.data()[k];
      if (frobenius_norm(layer.w_momentum) > 0.0) {
        const MatrixD o = config.precision == Precision::single
                              ? orthogonalized<float>(layer.w_momentum, config, schedule)
                              : orthogonalized<double>(layer.w_momentum, config, schedule);
        min_alignment = std::min(min_alignment, frobenius_inner(layer.w_momentum, o));
        const double step_size = kUpdateRms * config.learning_rate *
                                 std::sqrt(static_cast<double>(layer.w.rows() * layer.w.cols())) /
                                 frobenius_norm(o);
        for (std::size_t k = 0; k < o.size(); ++k) layer.w.data()[k] -= step_size * o.data()[k];
      }
      for (std::size_t j = 0; j < layer.b.size(); ++j) {
        layer.b_momentum[j] = config.momentum * layer.b_momentum[j] + grad_b[j];
        layer.b[j] -= config.learning_rate * layer.b_momentum[j];
      }
    }
    report.per_step_alignment.push_back(min_alignment);
  }
  report.loss_curve.push_back(dataset_loss(net, data.train_x, data.train_y));
  report.final_accuracy = accuracy(net, data.val_x, data.val_y);
  return report;
}

std::string to_json_line(const TrainReport& r) {
  nlohmann::json j;
  j["pipeline"] = std::string(to_string(r.pipeline));
  j["ns_iterations"] = r.ns_iterations;
  j["seed"] = r.seed;
  j["initial_loss"] = r.initial_loss();
  j["final_loss"] = r.final_loss();
  j["final_accuracy"] = r.final_accuracy;
  j["loss_curve"] = r.loss_curve;
  j["per_step_alignment"] = r.per_step_alignment;
  return j.dump();
}

}  // namespace turbo
