#pragma once

// The end-to-end run: simulate, assemble, train, analyze, pretrain, export.
// Each stage is callable on its own; run_pipeline chains them and writes
// every artifact under one directory.

#include <filesystem>
#include <string>
#include <vector>

#include "gridfault/config.hpp"
#include "gridfault/correlation.hpp"
#include "gridfault/pretrain.hpp"

namespace gridfault {

/// The configured case file, or the built-in case when none is set.
GridCase load_run_case(const RunConfig& config);

struct SimulationStage {
  GridCase grid;
  OperatingPoint operating_point;
  Adjacency adjacency;
  std::vector<ScenarioTrace> traces;  // one per clearing time, config order
};

SimulationStage run_simulation(const RunConfig& config);
SimulationStage run_simulation(const RunConfig& config, GridCase grid);

Dataset run_dataset(const RunConfig& config, const SimulationStage& sim);

struct TrainedClassifier {
  GnnModel model;
  TrainReport report;
};

TrainedClassifier run_training(const RunConfig& config, const Dataset& dataset, const Adjacency& adj,
                               std::uint64_t seed, const std::vector<int>& widths);

struct AnalysisResult {
  std::vector<CorrelationReport> data_reports;
  std::vector<CorrelationReport> feature_reports;
  std::vector<FusedScore> fused;
  std::vector<KgTriple> triples;
};

AnalysisResult run_analysis(const RunConfig& config, const GnnModel& model, const SimulationStage& sim);

struct PretrainStage {
  LinkSplit split;
  PretrainedTrunk trunk;
  FinetuneResult finetuned;
};

PretrainStage run_pretraining(const RunConfig& config, const Dataset& dataset, const Adjacency& adj,
                              std::uint64_t seed);

// Artifact writers. Everything but metadata.json is a pure function of the
// config and seed.
void write_traces(const std::filesystem::path& dir, const RunConfig& config, const SimulationStage& sim);
void write_dataset(const std::filesystem::path& dir, const RunConfig& config, const Dataset& dataset);
void write_classifier(const std::filesystem::path& dir, const TrainedClassifier& trained);
void write_analysis(const std::filesystem::path& dir, const AnalysisResult& analysis);
void write_pretraining(const std::filesystem::path& dir, const PretrainStage& stage);
void write_ablation(const std::filesystem::path& dir, const std::vector<AblationRow>& rows);

struct PipelineSummary {
  std::size_t samples = 0, positives = 0, negatives = 0, train = 0, test = 0;
  double accuracy = 0.0;
  double pretrain_auc = 0.0;
  double finetune_accuracy = 0.0;
  std::vector<AblationRow> ablation;  // filled when config.ablate
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds
};

/// Runs every stage and writes all artifacts. Failures are rethrown as
/// Error prefixed with the stage name.
PipelineSummary run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace gridfault
