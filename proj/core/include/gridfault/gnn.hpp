#pragma once

// Graph network layers of the form Z_{k+1} = act(G Z_k W_k), trained against
// a masked sigmoid/binary-cross-entropy objective on one monitored node.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gridfault/features.hpp"
#include "gridfault/topology.hpp"

namespace gridfault {

enum class Propagation {
  Raw,                  // binary adjacency, zero diagonal
  SymmetricNormalized,  // D^-1/2 (A + I) D^-1/2
};

Eigen::SparseMatrix<double> propagation_matrix(const Adjacency& adj, Propagation kind);

// ---------------------------------------------------------------------------
// Layer stack shared by the classifier and the link-prediction trunk.

struct LayerCache {
  std::vector<Eigen::MatrixXd> inputs;      // Z_k fed to layer k (inputs[0] = Z_0)
  std::vector<Eigen::MatrixXd> propagated;  // G Z_k
  std::vector<Eigen::MatrixXd> preact;      // G Z_k W_k
  Eigen::MatrixXd output;                   // Z_L
};

/// Runs every layer; ReLU after each layer except the last unless `relu_last`.
LayerCache forward_layers(const Eigen::SparseMatrix<double>& propagation,
                          const std::vector<Eigen::MatrixXd>& weights, const Eigen::MatrixXd& input,
                          bool relu_last);

/// Accumulates dLoss/dW_k into `grads` given dLoss/dZ_L.
void backward_layers(const Eigen::SparseMatrix<double>& propagation, const std::vector<Eigen::MatrixXd>& weights,
                     const LayerCache& cache, const Eigen::MatrixXd& output_grad, bool relu_last,
                     std::vector<Eigen::MatrixXd>& grads);

/// Glorot-uniform weights for consecutive widths.
std::vector<Eigen::MatrixXd> glorot_weights(const std::vector<int>& widths, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct GnnModel {
  std::vector<int> widths;               // input width first, final width 1
  std::vector<Eigen::MatrixXd> weights;  // widths[k] x widths[k+1]
  Propagation propagation_kind = Propagation::Raw;
  Eigen::SparseMatrix<double> propagation;
  std::size_t mask_node = 14;  // 0-based; bus 15
  Standardizer standardizer;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
};

struct ModelOptions {
  int mask_bus = 15;
  Propagation propagation = Propagation::Raw;
};

/// Throws ValidationError for widths that do not start at the feature count or end at 1.
void validate_widths(const std::vector<int>& widths, std::size_t input_width = kFeatureCount);

GnnModel init_model(const std::vector<int>& widths, const Adjacency& adj, std::uint64_t seed,
                    const ModelOptions& options = {});

struct ForwardResult {
  double logit = 0.0;
  double probability = 0.5;
  std::vector<Eigen::MatrixXd> layers;  // Z_1 .. Z_L
};

/// Input must already be standardized. Throws naming the layer on non-finite values.
ForwardResult forward(const GnnModel& model, const FeatureMatrix& standardized);
/// Standardizes with the model's stored vectors, then runs forward.
double predict(const GnnModel& model, const FeatureMatrix& raw);

inline constexpr double kBceEpsilon = 1e-12;

double bce_loss(std::span<const double> predictions, std::span<const double> labels);

struct Example {
  FeatureMatrix input;  // standardized
  double label = 0.0;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  double loss = 0.0;  // mean BCE over the batch
};

/// Exact gradients of the mean masked BCE over the batch.
Gradients backward(const GnnModel& model, std::span<const Example> batch);

// ---------------------------------------------------------------------------

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-4;
  AdamOptions adam;
  std::uint64_t seed = 7;
  /// 0 trains full-batch; otherwise seeded shuffled minibatches of this size.
  std::size_t batch_size = 8;
  /// Off leaves features unscaled (identity standardizer).
  bool standardize = true;
};

void validate_train_config(const TrainConfig& config);

struct TrainReport {
  std::vector<double> loss;      // training loss after each epoch
  std::vector<double> accuracy;  // test accuracy after each epoch
  double final_accuracy = 0.0;
  double wall_seconds = 0.0;
  std::size_t parameter_count = 0;
  std::size_t trainable_parameters = 0;
  std::size_t optimizer_steps = 0;

  /// Deterministic part only (wall time excluded).
  bool same_curves(const TrainReport& o) const {
    return loss == o.loss && accuracy == o.accuracy && final_accuracy == o.final_accuracy;
  }
};

/// Minimal Adam over a list of weight matrices.
class Adam {
 public:
  Adam(const std::vector<Eigen::MatrixXd>& shapes, double learning_rate, const AdamOptions& options);
  void step(std::vector<Eigen::MatrixXd>& weights, const std::vector<Eigen::MatrixXd>& grads,
            const std::vector<bool>& trainable);

 private:
  double lr_;
  AdamOptions opt_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
};

/// Fits the standardizer on the training split, then trains with Adam.
TrainReport train(GnnModel& model, const Dataset& dataset, const TrainConfig& config);
/// As train, updating only layers flagged in `trainable`. The model's
/// standardizer is refitted on the training split.
TrainReport train_layers(GnnModel& model, const Dataset& dataset, const TrainConfig& config,
                         const std::vector<bool>& trainable);

/// Fraction of samples whose thresholded probability (> 0.5) matches the label.
double evaluate(const GnnModel& model, const Dataset& dataset, std::span<const std::size_t> indices);
double accuracy_from_predictions(std::span<const double> probabilities, std::span<const int> labels);

struct AblationVariant {
  std::string name;
  std::vector<int> widths;  // including the input width
};

std::vector<AblationVariant> default_ablation_variants();

struct AblationRow {
  AblationVariant variant;
  double accuracy = 0.0;
  std::size_t parameter_count = 0;
  double wall_seconds = 0.0;
  TrainReport report;
};

/// Trains every variant under one config; variants run concurrently.
std::vector<AblationRow> ablation_run(const Dataset& dataset, const Adjacency& adj, const TrainConfig& config,
                                      const ModelOptions& options = {},
                                      const std::vector<AblationVariant>& variants = default_ablation_variants());

}  // namespace gridfault
