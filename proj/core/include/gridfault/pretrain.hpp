#pragma once

// Self-supervised link prediction over the grid graph. The trunk is the
// classifier stack without its 1-wide head; pair (i, j) scores
// sigmoid(h_i . h_j) on the trunk's node embeddings.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/gnn.hpp"

namespace gridfault {

struct LinkSample {
  std::size_t i = 0;
  std::size_t j = 0;
  int label = 0;  // 1: held-out real edge, 0: sampled non-edge

  bool operator==(const LinkSample&) const = default;
};

struct LinkSplitOptions {
  double holdout_fraction = 0.1;
  std::size_t negative_ratio = 1;
  std::size_t max_rejections = 1000;
  std::uint64_t seed = 7;
};

struct LinkSplit {
  Adjacency pruned;
  std::vector<LinkSample> samples;  // held-out positives first, then negatives
};

/// Removes ceil(fraction * E) edges without disconnecting the graph and pairs
/// them with sampled non-edges of the original graph.
LinkSplit sample_link_prediction_pairs(const Adjacency& adj, const LinkSplitOptions& options = {});

/// Normalized degree in column 0, a constant 1 in column 1, Laplacian
/// eigenvector coordinates in the remaining columns.
Eigen::MatrixXd structural_features(const Adjacency& adj, std::size_t columns = kFeatureCount);

struct PretrainConfig {
  int epochs = 200;
  double learning_rate = 1e-2;
  AdamOptions adam;
  std::uint64_t seed = 7;
  Propagation propagation = Propagation::Raw;
};

struct PretrainedTrunk {
  std::vector<int> widths;  // input width first, embedding width last
  std::vector<Eigen::MatrixXd> weights;
  Propagation propagation = Propagation::Raw;
  std::vector<double> loss;  // per epoch
  double holdout_auc = 0.5;

  std::size_t embedding_width() const { return static_cast<std::size_t>(widths.back()); }
};

/// Embeddings of every node: the last trunk layer before its activation.
Eigen::MatrixXd trunk_embeddings(const Eigen::SparseMatrix<double>& propagation,
                                 const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& input);

double link_score(const Eigen::MatrixXd& embeddings, std::size_t i, std::size_t j);

/// Rank AUC of positives over negatives; ties count one half.
double ranking_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Trains on the pruned graph's edges against fresh non-edges each epoch.
/// Non-edges listed in `split.samples` are never drawn for training.
PretrainedTrunk pretrain_link_prediction(const std::vector<int>& trunk_widths, const LinkSplit& split,
                                         const Adjacency& full, const PretrainConfig& config = {});

struct FinetuneOptions {
  bool freeze_trunk = false;
  ModelOptions model;
};

struct FinetuneResult {
  GnnModel model;
  TrainReport report;
};

/// Fresh head on top of the trunk, trained on the fault dataset.
FinetuneResult finetune_downstream(const PretrainedTrunk& trunk, const Dataset& dataset, const Adjacency& adj,
                                   const TrainConfig& config, const FinetuneOptions& options = {});

}  // namespace gridfault
