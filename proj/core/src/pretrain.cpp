#include "gridfault/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gridfault/error.hpp"

namespace gridfault {

namespace {

using Pair = std::pair<std::size_t, std::size_t>;

Pair ordered(std::size_t a, std::size_t b) { return a < b ? Pair{a, b} : Pair{b, a}; }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Pair draw_non_edge(const Adjacency& adj, const std::set<Pair>& excluded, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, adj.order() - 1);
  for (;;) {
    const auto a = pick(rng), b = pick(rng);
    if (a == b || adj.connected(a, b)) continue;
    const auto p = ordered(a, b);
    if (excluded.count(p)) continue;
    return p;
  }
}

}  // namespace

LinkSplit sample_link_prediction_pairs(const Adjacency& adj, const LinkSplitOptions& options) {
  if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0))
    throw ValidationError({"holdout fraction must lie in (0, 1)"});
  if (options.negative_ratio == 0) throw ValidationError({"negative ratio must be >= 1"});
  if (!is_connected(adj)) throw ValidationError({"link prediction needs a connected graph"});

  auto edges = adj.edges();
  const auto n = adj.order();
  const auto holdout = static_cast<std::size_t>(std::ceil(options.holdout_fraction * edges.size() - 1e-9));
  const auto non_edges = n * (n - 1) / 2 - edges.size();
  if (holdout * options.negative_ratio > non_edges)
    throw ValidationError({"not enough non-edges for the requested negative ratio"});

  std::mt19937_64 rng(options.seed);
  LinkSplit split{adj, {}};
  std::size_t rejections = 0;
  while (split.samples.size() < holdout) {
    auto live = split.pruned.edges();
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    const auto [a, b] = live[pick(rng)];
    split.pruned.remove_edge(a, b);
    if (is_connected(split.pruned)) {
      split.samples.push_back({a, b, 1});
      continue;
    }
    split.pruned.add_edge(a, b);
    if (++rejections > options.max_rejections)
      throw Error("could not hold out " + std::to_string(holdout) + " edges without disconnecting the graph");
  }

  std::set<Pair> taken;
  for (std::size_t k = 0; k < holdout * options.negative_ratio; ++k) {
    const auto p = draw_non_edge(adj, taken, rng);
    taken.insert(p);
    split.samples.push_back({p.first, p.second, 0});
  }
  return split;
}

Eigen::MatrixXd structural_features(const Adjacency& adj, std::size_t columns) {
  if (columns < 2) throw Error("structural features need at least two columns");
  const auto n = static_cast<Eigen::Index>(adj.order());
  std::size_t max_degree = 1;
  for (std::size_t i = 0; i < adj.order(); ++i) max_degree = std::max(max_degree, adj.degree(i));
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(columns));
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(adj.degree(static_cast<std::size_t>(i))) / static_cast<double>(max_degree);
    x(i, 1) = 1.0;
  }
  if (columns == 2 || n < 2) return x;

  // Remaining columns: smallest nontrivial eigenvectors of the normalized
  // Laplacian, sign fixed so the largest-magnitude entry is positive.
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (adj.connected(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        lap(i, j) = -1.0 / std::sqrt(static_cast<double>(adj.degree(static_cast<std::size_t>(i)) *
                                                         adj.degree(static_cast<std::size_t>(j))));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  const auto extra = std::min<Eigen::Index>(static_cast<Eigen::Index>(columns) - 2, n - 1);
  for (Eigen::Index c = 0; c < extra; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(c + 1);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    if (v(arg) < 0) v = -v;
    x.col(c + 2) = v;
  }
  return x;
}

Eigen::MatrixXd trunk_embeddings(const Eigen::SparseMatrix<double>& propagation,
                                 const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& input) {
  return forward_layers(propagation, weights, input, false).output;
}

double link_score(const Eigen::MatrixXd& embeddings, std::size_t i, std::size_t j) {
  return sigmoid(embeddings.row(static_cast<Eigen::Index>(i)).dot(embeddings.row(static_cast<Eigen::Index>(j))));
}

double ranking_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error("ranking_auc: size mismatch");
  double wins = 0.0;
  std::size_t pos = 0, neg = 0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (labels[a] != 1) continue;
    ++pos;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      if (labels[b] != 0) continue;
      wins += scores[a] > scores[b] ? 1.0 : (scores[a] == scores[b] ? 0.5 : 0.0);
    }
  }
  for (int l : labels) neg += l == 0;
  if (pos == 0 || neg == 0) throw Error("ranking_auc needs both classes");
  return wins / static_cast<double>(pos * neg);
}

PretrainedTrunk pretrain_link_prediction(const std::vector<int>& trunk_widths, const LinkSplit& split,
                                         const Adjacency& full, const PretrainConfig& config) {
  if (trunk_widths.size() < 2) throw ValidationError({"trunk needs at least one layer"});
  if (config.epochs <= 0 || !(config.learning_rate > 0.0))
    throw ValidationError({"pretraining needs epochs > 0 and learning rate > 0"});

  PretrainedTrunk trunk;
  trunk.widths = trunk_widths;
  trunk.propagation = config.propagation;
  trunk.weights = glorot_weights(trunk_widths, config.seed);

  const auto prop = propagation_matrix(split.pruned, config.propagation);
  const auto input = structural_features(split.pruned, static_cast<std::size_t>(trunk_widths.front()));
  const auto positives = split.pruned.edges();

  std::set<Pair> reserved;
  for (const auto& s : split.samples) reserved.insert(ordered(s.i, s.j));

  Adam adam(trunk.weights, config.learning_rate, config.adam);
  const std::vector<bool> all(trunk.weights.size(), true);
  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);

  std::vector<Pair> pairs;
  std::vector<double> labels;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    pairs.assign(positives.begin(), positives.end());
    labels.assign(positives.size(), 1.0);
    std::set<Pair> drawn = reserved;
    for (std::size_t k = 0; k < positives.size(); ++k) {
      const auto p = draw_non_edge(full, drawn, rng);
      drawn.insert(p);
      pairs.push_back(p);
      labels.push_back(0.0);
    }

    const auto cache = forward_layers(prop, trunk.weights, input, false);
    const auto& h = cache.output;
    Eigen::MatrixXd grad_h = Eigen::MatrixXd::Zero(h.rows(), h.cols());
    const double inv_n = 1.0 / static_cast<double>(pairs.size());
    double loss = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto a = static_cast<Eigen::Index>(pairs[k].first), b = static_cast<Eigen::Index>(pairs[k].second);
      const double p = sigmoid(h.row(a).dot(h.row(b)));
      const double x = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
      loss -= labels[k] * std::log(x) + (1.0 - labels[k]) * std::log(1.0 - x);
      const double g = (p - labels[k]) * inv_n;
      grad_h.row(a) += g * h.row(b);
      grad_h.row(b) += g * h.row(a);
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) throw NumericalError("non-finite pretraining loss at epoch " + std::to_string(epoch));
    trunk.loss.push_back(loss);

    std::vector<Eigen::MatrixXd> grads;
    for (const auto& w : trunk.weights) grads.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    backward_layers(prop, trunk.weights, cache, grad_h, false, grads);
    adam.step(trunk.weights, grads, all);
  }

  const auto h = trunk_embeddings(prop, trunk.weights, input);
  std::vector<double> scores;
  std::vector<int> truth;
  for (const auto& s : split.samples) {
    scores.push_back(link_score(h, s.i, s.j));
    truth.push_back(s.label);
  }
  trunk.holdout_auc = ranking_auc(scores, truth);
  return trunk;
}

FinetuneResult finetune_downstream(const PretrainedTrunk& trunk, const Dataset& dataset, const Adjacency& adj,
                                   const TrainConfig& config, const FinetuneOptions& options) {
  auto widths = trunk.widths;
  widths.push_back(1);
  FinetuneResult out;
  out.model = init_model(widths, adj, config.seed, options.model);
  for (std::size_t k = 0; k < trunk.weights.size(); ++k) {
    if (trunk.weights[k].rows() != out.model.weights[k].rows() || trunk.weights[k].cols() != out.model.weights[k].cols())
      throw ValidationError({"trunk layer " + std::to_string(k + 1) + " does not match the head widths"});
    out.model.weights[k] = trunk.weights[k];
  }
  std::vector<bool> trainable(out.model.layer_count(), !options.freeze_trunk);
  trainable.back() = true;
  out.report = train_layers(out.model, dataset, config, trainable);
  return out;
}

}  // namespace gridfault
