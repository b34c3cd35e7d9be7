#pragma once

// Run configuration: a key = value text file split into [sections].
//
//   [scenario]
//   clearing_times = 0.70, 0.72, 0.74, 0.76, 0.78
//
// '#' starts a comment. Unknown sections or keys are validation errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridfault/correlation.hpp"
#include "gridfault/gnn.hpp"
#include "gridfault/pretrain.hpp"
#include "gridfault/simulator.hpp"

namespace gridfault {

struct RunConfig {
  // [paths]
  std::filesystem::path case_file;  // empty: the built-in default case
  std::filesystem::path work_dir = "gridfault-out";

  // [scenario]
  int fault_bus = 15;
  double fault_start = 0.1;
  std::vector<double> clearing_times{0.70, 0.72, 0.74, 0.76, 0.78};
  double horizon = 10.0;
  double step = 0.01;
  double damping = 300.0;

  // [features]
  std::size_t window = 5;
  bool standardize = true;
  double negative_clearing = 0.74;

  // [model]
  std::vector<int> widths{kFeatureCount, 12, 18, 12, 6, 1};
  std::uint64_t seed = 7;
  int epochs = 50;
  double learning_rate = 1e-4;
  std::size_t batch_size = 8;
  bool normalize_adjacency = false;
  bool ablate = false;

  // [pretrain]
  double holdout_fraction = 0.1;
  std::size_t negative_ratio = 1;
  int pretrain_epochs = 200;
  double pretrain_learning_rate = 1e-2;
  bool freeze_trunk = false;

  // [analysis]
  std::size_t top_k = 10;
  std::size_t kg_k = 8;
  double analysis_clearing = 0.74;
  std::vector<double> window_times{0.10, 0.11, 0.12};
  double layer_sample_time = 0.10;
  std::vector<int> layers{2, 3, 4};
  FusionWeights fusion;
  std::map<int, FusionWeights> fusion_overrides;  // key "override.<bus>" = f, t, s

  // [verify]
  std::vector<std::uint64_t> verify_seeds{7, 1, 2, 3, 4};

  FaultSpec fault_spec(double clearing) const;
  SimulationOptions simulation_options() const;
  DatasetRecipe recipe() const;
  TrainConfig train_config(std::uint64_t seed) const;
  ModelOptions model_options() const;
  LinkSplitOptions link_split_options(std::uint64_t seed) const;
  PretrainConfig pretrain_config(std::uint64_t seed) const;
};

/// Parses and validates. Throws ParseError on syntax and ValidationError on values.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
/// A relative case path resolves against the directory holding the config.
RunConfig load_config(const std::filesystem::path& path);
/// Every field, in a form parse_config reads back.
std::string format_config(const RunConfig& config);

/// Collects every violated invariant; no simulation is started before this passes.
std::vector<std::string> check_config(const RunConfig& config);
void validate_config(const RunConfig& config);

}  // namespace gridfault
