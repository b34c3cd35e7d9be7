#include "gridfault/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "gridfault/error.hpp"

namespace gridfault {

Eigen::SparseMatrix<double> propagation_matrix(const Adjacency& adj, Propagation kind) {
  if (kind == Propagation::Raw) return adj.to_sparse();
  const auto n = adj.order();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj.degree(i) + 1));
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.emplace_back(static_cast<int>(i), static_cast<int>(i), inv_sqrt[i] * inv_sqrt[i]);
    for (auto j : adj.neighbors(i)) t.emplace_back(static_cast<int>(i), static_cast<int>(j), inv_sqrt[i] * inv_sqrt[j]);
  }
  Eigen::SparseMatrix<double> m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

LayerCache forward_layers(const Eigen::SparseMatrix<double>& propagation,
                          const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& input,
                          bool relu_last) {
  LayerCache c;
  const auto layers = weights.size();
  c.inputs.reserve(layers);
  c.propagated.reserve(layers);
  c.preact.reserve(layers);
  Eigen::MatrixXd z = input;
  for (std::size_t k = 0; k < layers; ++k) {
    c.inputs.push_back(z);
    c.propagated.push_back(propagation * z);
    c.preact.push_back(c.propagated.back() * weights[k]);
    z = (k + 1 < layers || relu_last) ? Eigen::MatrixXd(c.preact.back().cwiseMax(0.0)) : c.preact.back();
  }
  c.output = std::move(z);
  return c;
}

void backward_layers(const Eigen::SparseMatrix<double>& propagation, const std::vector<Eigen::MatrixXd>& weights,
                     const LayerCache& cache, const Eigen::MatrixXd& output_grad, bool relu_last,
                     std::vector<Eigen::MatrixXd>& grads) {
  const auto layers = weights.size();
  Eigen::MatrixXd upstream = output_grad;
  for (std::size_t k = layers; k-- > 0;) {
    if (k + 1 < layers || relu_last)
      upstream = (cache.preact[k].array() > 0.0).select(upstream, 0.0);
    grads[k].noalias() += cache.propagated[k].transpose() * upstream;
    if (k > 0) upstream = propagation.transpose() * (upstream * weights[k].transpose());
  }
}

std::vector<Eigen::MatrixXd> glorot_weights(const std::vector<int>& widths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const double limit = std::sqrt(6.0 / (widths[k] + widths[k + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(widths[k], widths[k + 1]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t GnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  return n;
}

void validate_widths(const std::vector<int>& widths, std::size_t input_width) {
  std::vector<std::string> v;
  if (widths.size() < 2) v.push_back("need at least an input and an output width");
  if (!widths.empty() && widths.front() != static_cast<int>(input_width))
    v.push_back("input width must be " + std::to_string(input_width) + ", got " + std::to_string(widths.front()));
  if (!widths.empty() && widths.back() != 1) v.push_back("final width must be 1, got " + std::to_string(widths.back()));
  for (int w : widths)
    if (w <= 0) v.push_back("layer widths must be positive");
  if (!v.empty()) throw ValidationError(std::move(v));
}

GnnModel init_model(const std::vector<int>& widths, const Adjacency& adj, std::uint64_t seed,
                    const ModelOptions& options) {
  validate_widths(widths);
  if (options.mask_bus < 1 || static_cast<std::size_t>(options.mask_bus) > adj.order())
    throw ValidationError({"mask bus " + std::to_string(options.mask_bus) + " is not a node of the graph"});
  GnnModel m;
  m.widths = widths;
  m.weights = glorot_weights(widths, seed);
  m.propagation_kind = options.propagation;
  m.propagation = propagation_matrix(adj, options.propagation);
  m.mask_node = static_cast<std::size_t>(options.mask_bus - 1);
  m.standardizer = Standardizer::identity(static_cast<std::size_t>(widths.front()));
  return m;
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ForwardResult forward(const GnnModel& model, const FeatureMatrix& standardized) {
  const auto cache = forward_layers(model.propagation, model.weights, standardized, false);
  ForwardResult r;
  r.layers.reserve(model.layer_count());
  for (std::size_t k = 1; k < cache.inputs.size(); ++k) r.layers.push_back(cache.inputs[k]);
  r.layers.push_back(cache.output);
  for (std::size_t k = 0; k < r.layers.size(); ++k)
    if (!r.layers[k].allFinite()) throw NumericalError("non-finite activations in layer " + std::to_string(k + 1));
  r.logit = cache.output(static_cast<Eigen::Index>(model.mask_node), 0);
  r.probability = sigmoid(r.logit);
  return r;
}

double predict(const GnnModel& model, const FeatureMatrix& raw) {
  return forward(model, model.standardizer.apply(raw)).probability;
}

double bce_loss(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size())
    throw Error("bce_loss: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw Error("bce_loss: empty input");
  double sum = 0.0;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const double x = std::clamp(predictions[n], kBceEpsilon, 1.0 - kBceEpsilon);
    sum += labels[n] * std::log(x) + (1.0 - labels[n]) * std::log(1.0 - x);
  }
  return -sum / static_cast<double>(predictions.size());
}

Gradients backward(const GnnModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw Error("backward: empty batch");
  Gradients g;
  for (const auto& w : model.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const auto mask = static_cast<Eigen::Index>(model.mask_node);
  double loss = 0.0;
  for (const auto& ex : batch) {
    const auto cache = forward_layers(model.propagation, model.weights, ex.input, false);
    const double p = sigmoid(cache.output(mask, 0));
    const double x = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
    loss -= ex.label * std::log(x) + (1.0 - ex.label) * std::log(1.0 - x);
    Eigen::MatrixXd out_grad = Eigen::MatrixXd::Zero(cache.output.rows(), cache.output.cols());
    out_grad(mask, 0) = (p - ex.label) * inv_n;
    backward_layers(model.propagation, model.weights, cache, out_grad, false, g.weights);
  }
  g.loss = loss * inv_n;
  return g;
}

void validate_train_config(const TrainConfig& config) {
  std::vector<std::string> v;
  if (config.epochs <= 0) v.push_back("epochs must be > 0");
  if (!(config.learning_rate > 0.0)) v.push_back("learning rate must be > 0");
  if (!(config.adam.beta1 >= 0.0 && config.adam.beta1 < 1.0) || !(config.adam.beta2 >= 0.0 && config.adam.beta2 < 1.0))
    v.push_back("Adam betas must lie in [0, 1)");
  if (!(config.adam.epsilon > 0.0)) v.push_back("Adam epsilon must be > 0");
  if (!v.empty()) throw ValidationError(std::move(v));
}

Adam::Adam(const std::vector<Eigen::MatrixXd>& shapes, double learning_rate, const AdamOptions& options)
    : lr_(learning_rate), opt_(options) {
  for (const auto& s : shapes) {
    m_.push_back(Eigen::MatrixXd::Zero(s.rows(), s.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(s.rows(), s.cols()));
  }
}

void Adam::step(std::vector<Eigen::MatrixXd>& weights, const std::vector<Eigen::MatrixXd>& grads,
                const std::vector<bool>& trainable) {
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!trainable[k]) continue;
    m_[k] = opt_.beta1 * m_[k] + (1.0 - opt_.beta1) * grads[k];
    v_[k] = opt_.beta2 * v_[k] + (1.0 - opt_.beta2) * grads[k].cwiseAbs2();
    weights[k].array() -= lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + opt_.epsilon);
  }
}

double accuracy_from_predictions(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) throw Error("accuracy: size mismatch");
  if (probabilities.empty()) throw Error("accuracy: empty sample set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += (probabilities[i] > 0.5 ? 1 : 0) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double evaluate(const GnnModel& model, const Dataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error("evaluate: empty sample set");
  std::vector<double> probs;
  std::vector<int> labels;
  for (auto i : indices) {
    probs.push_back(predict(model, dataset.samples[i].features));
    labels.push_back(dataset.samples[i].label);
  }
  return accuracy_from_predictions(probs, labels);
}

TrainReport train(GnnModel& model, const Dataset& dataset, const TrainConfig& config) {
  return train_layers(model, dataset, config, std::vector<bool>(model.layer_count(), true));
}

TrainReport train_layers(GnnModel& model, const Dataset& dataset, const TrainConfig& config,
                         const std::vector<bool>& trainable) {
  validate_train_config(config);
  if (trainable.size() != model.layer_count()) throw Error("trainable mask does not match layer count");
  const auto start = std::chrono::steady_clock::now();

  model.standardizer = config.standardize ? Standardizer::fit(dataset)
                                           : Standardizer::identity(static_cast<std::size_t>(model.widths.front()));
  const auto train_idx = dataset.indices(Split::Train);
  const auto test_idx = dataset.indices(Split::Test);
  if (test_idx.empty()) throw Error("train: dataset has no test samples");
  std::vector<Example> train_set, test_set;
  for (auto i : train_idx)
    train_set.push_back({model.standardizer.apply(dataset.samples[i].features), double(dataset.samples[i].label)});
  for (auto i : test_idx)
    test_set.push_back({model.standardizer.apply(dataset.samples[i].features), double(dataset.samples[i].label)});

  TrainReport report;
  report.parameter_count = model.parameter_count();
  for (std::size_t k = 0; k < model.layer_count(); ++k)
    if (trainable[k]) report.trainable_parameters += static_cast<std::size_t>(model.weights[k].size());

  Adam adam(model.weights, config.learning_rate, config.adam);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const bool full_batch = config.batch_size == 0 || config.batch_size >= train_set.size();
  std::vector<Example> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (full_batch) {
      const auto g = backward(model, train_set);
      adam.step(model.weights, g.weights, trainable);
      ++report.optimizer_steps;
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t s = 0; s < order.size(); s += config.batch_size) {
        batch.clear();
        for (std::size_t k = s; k < std::min(order.size(), s + config.batch_size); ++k)
          batch.push_back(train_set[order[k]]);
        const auto g = backward(model, batch);
        adam.step(model.weights, g.weights, trainable);
        ++report.optimizer_steps;
      }
    }

    std::vector<double> probs, labels;
    for (const auto& ex : train_set) {
      probs.push_back(forward(model, ex.input).probability);
      labels.push_back(ex.label);
    }
    const double loss = bce_loss(probs, labels);
    if (!std::isfinite(loss)) throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    std::vector<double> test_probs;
    std::vector<int> test_labels;
    for (const auto& ex : test_set) {
      test_probs.push_back(forward(model, ex.input).probability);
      test_labels.push_back(static_cast<int>(ex.label));
    }
    report.loss.push_back(loss);
    report.accuracy.push_back(accuracy_from_predictions(test_probs, test_labels));
  }
  report.final_accuracy = report.accuracy.back();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<AblationVariant> default_ablation_variants() {
  return {{"A", {kFeatureCount, 12, 18, 12, 6, 1}},
          {"B", {kFeatureCount, 6, 2, 1}},
          {"C", {kFeatureCount, 32, 64, 32, 6, 1}}};
}

std::vector<AblationRow> ablation_run(const Dataset& dataset, const Adjacency& adj, const TrainConfig& config,
                                      const ModelOptions& options, const std::vector<AblationVariant>& variants) {
  std::vector<std::future<AblationRow>> pending;
  for (const auto& v : variants) {
    pending.push_back(std::async(std::launch::async, [&dataset, &adj, &config, &options, v] {
      GnnModel model = init_model(v.widths, adj, config.seed, options);
      AblationRow row;
      row.variant = v;
      row.report = train(model, dataset, config);
      row.accuracy = row.report.final_accuracy;
      row.parameter_count = model.parameter_count();
      row.wall_seconds = row.report.wall_seconds;
      return row;
    }));
  }
  std::vector<AblationRow> rows;
  for (auto& p : pending) rows.push_back(p.get());
  return rows;
}

}  // namespace gridfault
