#include "gridfault/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridfault/error.hpp"

namespace gridfault {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trace_csv(const ScenarioTrace& tr) {
  std::string out = "t";
  for (std::size_t i = 1; i <= tr.bus_count(); ++i)
    for (const char* f : {"vmag", "vang", "p", "q"}) out += "," + std::string(f) + "_" + std::to_string(i);
  for (int bus : tr.generator_buses)
    for (const char* f : {"delta", "omega", "emf"}) out += "," + std::string(f) + "_g" + std::to_string(bus);
  out += '\n';
  for (std::size_t t = 0; t < tr.length(); ++t) {
    out += format_double(tr.time[t]);
    for (std::size_t i = 0; i < tr.bus_count(); ++i)
      for (const Series* s : {&tr.vmag, &tr.vang, &tr.p, &tr.q}) out += ',' + format_double((*s)(t, i));
    for (std::size_t g = 0; g < tr.generator_count(); ++g)
      for (const Series* s : {&tr.delta, &tr.omega, &tr.emf}) out += ',' + format_double((*s)(t, g));
    out += '\n';
  }
  return out;
}

namespace {

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols,
                            const std::string& what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows)
    throw Error(what + ": expected " + std::to_string(expect_rows) + " rows");
  Eigen::MatrixXd m(expect_rows, expect_cols);
  for (Eigen::Index r = 0; r < expect_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols)
      throw Error(what + ": row " + std::to_string(r) + " must have " + std::to_string(expect_cols) + " values");
    for (Eigen::Index c = 0; c < expect_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const json& a, Eigen::Index n, const std::string& what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != n)
    throw Error(what + ": expected " + std::to_string(n) + " values");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

const char* kind_name(Propagation p) { return p == Propagation::Raw ? "raw" : "symmetric-normalized"; }

Propagation kind_from(const std::string& s) {
  if (s == "raw") return Propagation::Raw;
  if (s == "symmetric-normalized") return Propagation::SymmetricNormalized;
  throw Error("unknown propagation '" + s + "'");
}

json weights_json(const std::vector<Eigen::MatrixXd>& weights) {
  json w = json::array();
  for (const auto& m : weights) {
    json flat = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    w.push_back(std::move(flat));
  }
  return w;
}

std::vector<Eigen::MatrixXd> weights_from(const json& w, const std::vector<int>& widths) {
  if (!w.is_array() || w.size() + 1 != widths.size()) throw Error("model: weight count does not match widths");
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto rows = widths[k], cols = widths[k + 1];
    if (!w[k].is_array() || w[k].size() != static_cast<std::size_t>(rows * cols))
      throw Error("model: layer " + std::to_string(k + 1) + " has the wrong number of weights");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = w[k][static_cast<std::size_t>(r * cols + c)].get<double>();
    out.push_back(std::move(m));
  }
  return out;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": " + e.what());
  }
}

void check_header(const json& j, const char* kind) {
  if (j.value("format", "") != "gridfault-model" || j.value("version", 0) != 1)
    throw Error("not a gridfault model file (format/version mismatch)");
  if (j.value("kind", "") != kind) throw Error(std::string("expected a model of kind '") + kind + "'");
}

}  // namespace

std::string dataset_jsonl(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    json j;
    j["index"] = i;
    j["scenario"] = s.provenance.scenario;
    j["time_index"] = s.provenance.time_index;
    j["time"] = s.provenance.time;
    j["label"] = s.label;
    j["split"] = ds.split[i] == Split::Train ? "train" : "test";
    j["features"] = matrix_rows(s.features);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Dataset dataset_from_jsonl(std::string_view text) {
  try {
    Dataset ds;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      if (line.empty()) continue;
      const auto j = parse_json(line, "dataset");
      Sample s;
      const auto& f = j.at("features");
      s.features = matrix_from(f, static_cast<Eigen::Index>(f.size()), kFeatureCount, "dataset features");
      s.label = j.at("label").get<int>();
      s.provenance = {j.at("scenario").get<std::size_t>(), j.at("time_index").get<std::size_t>(),
                      j.at("time").get<double>()};
      ds.samples.push_back(std::move(s));
      ds.split.push_back(j.at("split").get<std::string>() == "test" ? Split::Test : Split::Train);
    }
    return ds;
  } catch (const json::exception& e) {
    throw Error(std::string("dataset: ") + e.what());
  }
}

std::string model_json(const GnnModel& m) {
  json j;
  j["format"] = "gridfault-model";
  j["version"] = 1;
  j["kind"] = "classifier";
  j["widths"] = m.widths;
  j["mask_node"] = m.mask_node + 1;
  j["propagation"] = kind_name(m.propagation_kind);
  j["standardization"] = {{"mean", vector_json(m.standardizer.mean)}, {"scale", vector_json(m.standardizer.scale)}};
  j["weights"] = weights_json(m.weights);
  return j.dump(1) + "\n";
}

GnnModel model_from_json(std::string_view text, const Adjacency& adj) {
  try {
    const auto j = parse_json(text, "model");
    check_header(j, "classifier");
    ModelOptions opt;
    opt.mask_bus = j.at("mask_node").get<int>();
    opt.propagation = kind_from(j.at("propagation").get<std::string>());
    const auto widths = j.at("widths").get<std::vector<int>>();
    GnnModel m = init_model(widths, adj, 0, opt);
    m.weights = weights_from(j.at("weights"), widths);
    const auto n = static_cast<Eigen::Index>(widths.front());
    m.standardizer.mean = vector_from(j.at("standardization").at("mean"), n, "standardization mean");
    m.standardizer.scale = vector_from(j.at("standardization").at("scale"), n, "standardization scale");
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("model: ") + e.what());
  }
}

std::string trunk_json(const PretrainedTrunk& t) {
  json j;
  j["format"] = "gridfault-model";
  j["version"] = 1;
  j["kind"] = "trunk";
  j["widths"] = t.widths;
  j["propagation"] = kind_name(t.propagation);
  j["holdout_auc"] = t.holdout_auc;
  j["epochs"] = t.loss.size();
  j["final_loss"] = t.loss.empty() ? 0.0 : t.loss.back();
  j["weights"] = weights_json(t.weights);
  return j.dump(1) + "\n";
}

PretrainedTrunk trunk_from_json(std::string_view text) {
  try {
    const auto j = parse_json(text, "trunk");
    check_header(j, "trunk");
    PretrainedTrunk t;
    t.widths = j.at("widths").get<std::vector<int>>();
    t.propagation = kind_from(j.at("propagation").get<std::string>());
    t.holdout_auc = j.at("holdout_auc").get<double>();
    t.weights = weights_from(j.at("weights"), t.widths);
    return t;
  } catch (const json::exception& e) {
    throw Error(std::string("trunk: ") + e.what());
  }
}

std::string train_report_csv(const TrainReport& r) {
  std::string out = "epoch,loss,accuracy\n";
  for (std::size_t e = 0; e < r.loss.size(); ++e)
    out += std::to_string(e + 1) + ',' + format_double(r.loss[e]) + ',' + format_double(r.accuracy[e]) + '\n';
  return out;
}

std::string correlation_csv(const std::vector<CorrelationReport>& reports) {
  std::string out = "domain,window_or_layer,node_id,raw_score,mapped_score,rank\n";
  for (const auto& rep : reports) {
    auto order = rep.scores;
    std::stable_sort(order.begin(), order.end(), [](const NodeScore& a, const NodeScore& b) { return a.raw > b.raw; });
    for (std::size_t k = 0; k < order.size(); ++k)
      out += rep.domain + ',' + std::to_string(rep.index) + ',' + std::to_string(order[k].node) + ',' +
             format_double(order[k].raw) + ',' + format_double(order[k].mapped) + ',' + std::to_string(k + 1) + '\n';
  }
  return out;
}

std::string fused_csv(const std::vector<FusedScore>& scores) {
  std::string out = "node_id,feature,time,space,fused\n";
  for (const auto& s : scores)
    out += std::to_string(s.node) + ',' + format_double(s.feature) + ',' + format_double(s.time) + ',' +
           format_double(s.space) + ',' + format_double(s.fused) + '\n';
  return out;
}

std::string kg_json(const std::vector<KgTriple>& triples) {
  json a = json::array();
  for (const auto& t : triples)
    a.push_back({{"subject", t.subject}, {"relation", t.relation}, {"object", t.object}, {"score", t.score},
                 {"domain", t.domain}});
  return a.dump(1) + "\n";
}

}  // namespace gridfault
