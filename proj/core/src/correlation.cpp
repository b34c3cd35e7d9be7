#include "gridfault/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gridfault/error.hpp"

namespace gridfault {

Cosine cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw Error("cosine_similarity: vectors must have equal nonzero length (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0), false};
}

namespace {

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
  return v;
}

}  // namespace

CorrelationReport rank_rows(const Eigen::MatrixXd& rows, int fault_node, std::size_t k, std::string domain,
                            int index) {
  if (fault_node < 1 || fault_node > rows.rows())
    throw Error("fault node " + std::to_string(fault_node) + " outside a " + std::to_string(rows.rows()) +
                "-node matrix");
  CorrelationReport rep;
  rep.domain = std::move(domain);
  rep.index = index;
  rep.fault_node = fault_node;
  const auto ref = row_of(rows, fault_node - 1);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (r == fault_node - 1) continue;
    const auto c = cosine_similarity(row_of(rows, r), ref);
    rep.scores.push_back({static_cast<int>(r + 1), c.value, to_unit_interval(c.value), c.degenerate});
  }
  if (k > rep.scores.size()) {
    k = rep.scores.size();
    rep.k_clamped = true;
  }
  rep.top = rep.scores;
  std::stable_sort(rep.top.begin(), rep.top.end(), [](const NodeScore& a, const NodeScore& b) { return a.raw > b.raw; });
  rep.top.resize(k);
  return rep;
}

std::vector<CorrelationReport> rank_data_domain(const std::vector<Eigen::MatrixXd>& windows, int fault_node,
                                                std::size_t k) {
  std::vector<CorrelationReport> out;
  for (std::size_t w = 0; w < windows.size(); ++w)
    out.push_back(rank_rows(windows[w], fault_node, k, "data-window", static_cast<int>(w + 1)));
  return out;
}

std::vector<CorrelationReport> rank_feature_domain(const GnnModel& model, const FeatureMatrix& standardized,
                                                   const std::vector<int>& layers, int fault_node, std::size_t k) {
  const auto fwd = forward(model, standardized);
  std::vector<CorrelationReport> out;
  for (int layer : layers) {
    if (layer < 1 || static_cast<std::size_t>(layer) > fwd.layers.size())
      throw Error("model has no layer " + std::to_string(layer));
    out.push_back(rank_rows(fwd.layers[static_cast<std::size_t>(layer - 1)], fault_node, k, "layer", layer));
  }
  return out;
}

void validate_weights(const FusionWeights& w) {
  std::vector<std::string> v;
  if (w.feature < 0 || w.time < 0 || w.space < 0) v.push_back("fusion weights must be nonnegative");
  if (std::abs(w.feature + w.time + w.space - 1.0) > 1e-9) v.push_back("fusion weights must sum to 1");
  if (!v.empty()) throw ValidationError(std::move(v));
}

double fuse_correlations(double feature, double time, double space, const FusionWeights& weights) {
  validate_weights(weights);
  return weights.feature * feature + weights.time * time + weights.space * space;
}

namespace {

std::vector<double> mean_mapped(const std::vector<CorrelationReport>& reports, std::size_t n, int fault_node) {
  std::vector<double> acc(n, 0.0);
  if (reports.empty()) throw Error("fusion needs at least one report per domain");
  for (const auto& r : reports)
    for (const auto& s : r.scores) acc[static_cast<std::size_t>(s.node - 1)] += s.mapped;
  for (auto& a : acc) a /= static_cast<double>(reports.size());
  acc[static_cast<std::size_t>(fault_node - 1)] = 1.0;
  return acc;
}

}  // namespace

std::vector<FusedScore> fuse_nodes(const std::vector<CorrelationReport>& feature_reports,
                                   const std::vector<CorrelationReport>& data_reports, const Adjacency& adj,
                                   int fault_node, const FusionWeights& weights,
                                   const std::map<int, FusionWeights>& overrides) {
  validate_weights(weights);
  for (const auto& [node, w] : overrides) validate_weights(w);
  const auto n = adj.order();
  if (fault_node < 1 || static_cast<std::size_t>(fault_node) > n) throw Error("fault node outside the graph");
  const auto feat = mean_mapped(feature_reports, n, fault_node);
  const auto time = mean_mapped(data_reports, n, fault_node);
  const auto hops = hop_distances(adj, static_cast<std::size_t>(fault_node - 1));
  std::vector<FusedScore> out;
  for (std::size_t i = 0; i < n; ++i) {
    FusedScore s;
    s.node = static_cast<int>(i + 1);
    s.feature = feat[i];
    s.time = time[i];
    s.space = hops[i] == kUnreachable ? 0.0 : 1.0 / (1.0 + hops[i]);
    const auto it = overrides.find(s.node);
    s.fused = fuse_correlations(s.feature, s.time, s.space, it == overrides.end() ? weights : it->second);
    out.push_back(s);
  }
  return out;
}

double median_fused(const std::vector<FusedScore>& scores) {
  if (scores.empty()) throw Error("median of an empty score list");
  std::vector<double> v;
  for (const auto& s : scores) v.push_back(s.fused);
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<KgTriple> export_kg_triples(const std::vector<FusedScore>& fused, int fault_node, std::size_t k) {
  std::vector<FusedScore> pool;
  for (const auto& s : fused)
    if (s.node != fault_node) pool.push_back(s);
  std::sort(pool.begin(), pool.end(), [](const FusedScore& a, const FusedScore& b) {
    return a.fused != b.fused ? a.fused > b.fused : a.node < b.node;
  });
  if (pool.size() > k) pool.resize(k);
  std::vector<KgTriple> out;
  for (const auto& s : pool) out.push_back({s.node, "correlated_with", fault_node, s.fused, "fused"});
  return out;
}

std::string format_kg_text(const std::vector<KgTriple>& triples) {
  std::string out;
  char buf[64];
  for (const auto& t : triples) {
    std::snprintf(buf, sizeof buf, "%.17g", t.score);
    out += std::to_string(t.subject) + ' ' + t.relation + ' ' + std::to_string(t.object) + ' ' + buf + ' ' +
           t.domain + '\n';
  }
  return out;
}

}  // namespace gridfault
