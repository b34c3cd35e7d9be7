#pragma once

// Plain-text artifacts: CSV traces and reports, JSONL datasets, JSON models.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gridfault/correlation.hpp"
#include "gridfault/gnn.hpp"
#include "gridfault/pretrain.hpp"
#include "gridfault/simulator.hpp"

namespace gridfault {

/// Shortest text that reads back to the same double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

/// Columns: t, per bus vmag/vang/p/q, per generator delta/omega/emf.
std::string trace_csv(const ScenarioTrace& trace);

/// One JSON object per line: provenance, label, split and the 39x10 features.
std::string dataset_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(std::string_view text);

std::string model_json(const GnnModel& model);
/// The propagation matrix is rebuilt from `adj` with the stored kind.
GnnModel model_from_json(std::string_view text, const Adjacency& adj);

std::string trunk_json(const PretrainedTrunk& trunk);
PretrainedTrunk trunk_from_json(std::string_view text);

/// epoch, loss, accuracy
std::string train_report_csv(const TrainReport& report);

/// domain, window_or_layer, node_id, raw_score, mapped_score, rank
std::string correlation_csv(const std::vector<CorrelationReport>& reports);
std::string fused_csv(const std::vector<FusedScore>& scores);
std::string kg_json(const std::vector<KgTriple>& triples);

}  // namespace gridfault
