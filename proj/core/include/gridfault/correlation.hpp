#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/gnn.hpp"
#include "gridfault/topology.hpp"

namespace gridfault {

struct Cosine {
  double value = 0.0;
  bool degenerate = false;  // one side was all zeros
};

/// a.b / (|a||b|), clipped to [-1, 1]. Zero vectors give 0 flagged degenerate.
Cosine cosine_similarity(std::span<const double> a, std::span<const double> b);

inline double to_unit_interval(double cosine) { return 0.5 * (cosine + 1.0); }

struct NodeScore {
  int node = 0;  // 1-based bus id
  double raw = 0.0;
  double mapped = 0.5;
  bool degenerate = false;
};

struct CorrelationReport {
  std::string domain;  // "data-window" or "layer"
  int index = 0;       // window number or layer number
  int fault_node = 15;
  std::vector<NodeScore> scores;  // every node except the fault node, by id
  std::vector<NodeScore> top;     // descending score, ties by ascending id
  bool k_clamped = false;
};

/// Cosine of each row against the fault-node row. `k` above the number of
/// other nodes is clamped and flagged.
CorrelationReport rank_rows(const Eigen::MatrixXd& rows, int fault_node, std::size_t k, std::string domain,
                            int index);

/// One report per window, numbered from 1.
std::vector<CorrelationReport> rank_data_domain(const std::vector<Eigen::MatrixXd>& windows, int fault_node,
                                                std::size_t k = 10);

/// Layer outputs Z_k of the model on one standardized sample, for each k in `layers`.
std::vector<CorrelationReport> rank_feature_domain(const GnnModel& model, const FeatureMatrix& standardized,
                                                   const std::vector<int>& layers, int fault_node,
                                                   std::size_t k = 10);

struct FusionWeights {
  double feature = 1.0 / 3.0;
  double time = 1.0 / 3.0;
  double space = 1.0 / 3.0;
};

void validate_weights(const FusionWeights& w);

double fuse_correlations(double feature, double time, double space, const FusionWeights& weights = {});

struct FusedScore {
  int node = 0;
  double feature = 0.0;  // mean mapped feature-domain score
  double time = 0.0;     // mean mapped data-domain score
  double space = 0.0;    // 1 / (1 + hops)
  double fused = 0.0;
};

/// Fused score of every node, including the fault node itself. Overrides
/// replace the default weights for individual bus ids.
std::vector<FusedScore> fuse_nodes(const std::vector<CorrelationReport>& feature_reports,
                                   const std::vector<CorrelationReport>& data_reports, const Adjacency& adj,
                                   int fault_node, const FusionWeights& weights = {},
                                   const std::map<int, FusionWeights>& overrides = {});

double median_fused(const std::vector<FusedScore>& scores);

struct KgTriple {
  int subject = 0;
  std::string relation = "correlated_with";
  int object = 0;
  double score = 0.0;
  std::string domain = "fused";
};

/// Top-k nodes by fused score, the fault node excluded, ties by ascending id.
std::vector<KgTriple> export_kg_triples(const std::vector<FusedScore>& fused, int fault_node, std::size_t k = 8);

std::string format_kg_text(const std::vector<KgTriple>& triples);

}  // namespace gridfault
