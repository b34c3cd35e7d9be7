#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/simulator.hpp"

namespace gridfault {

/// Column layout of a node-feature matrix (one row per bus).
enum FeatureColumn : int {
  kVmag = 0,
  kVang,
  kExcitation,  // |E'| of the machine on the bus, 0 elsewhere
  kPowerAngle,  // rotor angle of the machine on the bus, 0 elsewhere
  kActivePower,
  kReactivePower,
  kVmagMean,
  kVmagVar,
  kVangMean,
  kVangVar,
  kFeatureCount
};

using FeatureMatrix = Eigen::MatrixXd;  // buses x kFeatureCount

/// Instantaneous quantities at `t_index` plus centered-window mean and
/// population variance of Vmag and Vang. The window truncates at the series
/// ends. Throws on an even window or an out-of-range index.
FeatureMatrix window_features(const ScenarioTrace& trace, std::size_t t_index, std::size_t window = 5);

struct Provenance {
  std::size_t scenario = 0;
  std::size_t time_index = 0;
  double time = 0.0;
};

struct Sample {
  FeatureMatrix features;
  int label = 0;  // 1 while the monitored bus is faulted
  Provenance provenance;
};

struct DatasetRecipe {
  std::size_t window = 5;
  /// Scenario (by clearing time) whose post-clearing samples form the negative class.
  double negative_clearing = 0.74;
  /// Expected class counts; a mismatch is a hard error. Unset skips the check.
  std::optional<std::size_t> expected_positive = 320;
  std::optional<std::size_t> expected_negative = 927;
};

enum class Split { Train, Test };

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Split> split;

  std::size_t size() const { return samples.size(); }
  std::size_t count(Split s) const;
  std::size_t positives() const;
  std::vector<std::size_t> indices(Split s) const;
};

/// Positive samples: every fault-on index of every scenario. Negative samples:
/// every index from clearing onward in the designated scenario. Ordered by
/// scenario, then time. The split is filled by split_dataset.
Dataset assemble_dataset(const std::vector<ScenarioTrace>& traces, const DatasetRecipe& recipe = {});

/// Consecutive groups of three: first two train, third test. A trailing
/// partial group goes to train.
void split_dataset(Dataset& dataset);
std::vector<Split> split_assignment(std::size_t size);

/// Per-column z-scoring fitted over all rows of the training samples.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 1 where a column is constant

  static Standardizer identity(std::size_t columns);
  static Standardizer fit(const Dataset& dataset);
  FeatureMatrix apply(const FeatureMatrix& raw) const;
  bool operator==(const Standardizer& o) const { return mean == o.mean && scale == o.scale; }
};

}  // namespace gridfault
