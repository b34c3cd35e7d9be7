#include "gridfault/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "gridfault/default_case.hpp"
#include "gridfault/error.hpp"
#include "gridfault/io.hpp"

namespace gridfault {

using nlohmann::json;
namespace fs = std::filesystem;

GridCase load_run_case(const RunConfig& config) {
  return config.case_file.empty() ? ne39_case() : load_case(config.case_file);
}

SimulationStage run_simulation(const RunConfig& config) { return run_simulation(config, load_run_case(config)); }

SimulationStage run_simulation(const RunConfig& config, GridCase grid) {
  validate_fault(config.fault_spec(config.clearing_times.front()), grid.bus_count());
  SimulationStage s;
  s.grid = std::move(grid);
  s.operating_point = solve_power_flow(s.grid);
  s.adjacency = build_adjacency(s.grid);
  s.traces = generate_scenarios(s.grid, config.clearing_times, config.fault_spec(config.clearing_times.front()),
                                config.simulation_options());
  return s;
}

Dataset run_dataset(const RunConfig& config, const SimulationStage& sim) {
  return assemble_dataset(sim.traces, config.recipe());
}

TrainedClassifier run_training(const RunConfig& config, const Dataset& dataset, const Adjacency& adj,
                               std::uint64_t seed, const std::vector<int>& widths) {
  TrainedClassifier t;
  t.model = init_model(widths, adj, seed, config.model_options());
  t.report = train(t.model, dataset, config.train_config(seed));
  return t;
}

namespace {

const ScenarioTrace& trace_for(const RunConfig& config, const SimulationStage& sim, double clearing) {
  for (std::size_t k = 0; k < config.clearing_times.size(); ++k)
    if (std::abs(config.clearing_times[k] - clearing) < 1e-9) return sim.traces.at(k);
  throw Error("no scenario clears at " + format_double(clearing) + " s");
}

}  // namespace

AnalysisResult run_analysis(const RunConfig& config, const GnnModel& model, const SimulationStage& sim) {
  const auto& tr = trace_for(config, sim, config.analysis_clearing);
  std::vector<Eigen::MatrixXd> windows;
  for (double t : config.window_times) windows.push_back(window_features(tr, step_index(t, config.step), config.window));
  const auto sample = window_features(tr, step_index(config.layer_sample_time, config.step), config.window);

  AnalysisResult a;
  a.data_reports = rank_data_domain(windows, config.fault_bus, config.top_k);
  a.feature_reports =
      rank_feature_domain(model, model.standardizer.apply(sample), config.layers, config.fault_bus, config.top_k);
  a.fused = fuse_nodes(a.feature_reports, a.data_reports, sim.adjacency, config.fault_bus, config.fusion,
                       config.fusion_overrides);
  a.triples = export_kg_triples(a.fused, config.fault_bus, config.kg_k);
  return a;
}

PretrainStage run_pretraining(const RunConfig& config, const Dataset& dataset, const Adjacency& adj,
                              std::uint64_t seed) {
  PretrainStage s;
  s.split = sample_link_prediction_pairs(adj, config.link_split_options(seed));
  const std::vector<int> trunk_widths(config.widths.begin(), config.widths.end() - 1);
  s.trunk = pretrain_link_prediction(trunk_widths, s.split, adj, config.pretrain_config(seed));
  FinetuneOptions opt;
  opt.freeze_trunk = config.freeze_trunk;
  opt.model = config.model_options();
  s.finetuned = finetune_downstream(s.trunk, dataset, adj, config.train_config(seed), opt);
  return s;
}

void write_traces(const fs::path& dir, const RunConfig& config, const SimulationStage& sim) {
  json files = json::array();
  for (std::size_t k = 0; k < sim.traces.size(); ++k) {
    const auto name = "trace_" + std::to_string(k) + ".csv";
    write_text(dir / "traces" / name, trace_csv(sim.traces[k]));
    files.push_back({{"file", name},
                     {"clearing", sim.traces[k].fault.clearing},
                     {"fault_on_first", sim.traces[k].fault_first},
                     {"fault_on_last", sim.traces[k].fault_last}});
  }
  json m = {{"seed", config.seed},
            {"case", config.case_file.empty() ? "ne39 (built-in)" : config.case_file.string()},
            {"fault_bus", config.fault_bus},
            {"fault_start", config.fault_start},
            {"horizon", config.horizon},
            {"step", config.step},
            {"damping", config.damping},
            {"scenarios", files}};
  write_text(dir / "traces" / "manifest.json", m.dump(1) + "\n");
}

void write_dataset(const fs::path& dir, const RunConfig& config, const Dataset& ds) {
  write_text(dir / "dataset.jsonl", dataset_jsonl(ds));
  json m = {{"seed", config.seed},
            {"samples", ds.size()},
            {"positives", ds.positives()},
            {"negatives", ds.size() - ds.positives()},
            {"train", ds.count(Split::Train)},
            {"test", ds.count(Split::Test)},
            {"window", config.window},
            {"negative_clearing", config.negative_clearing}};
  write_text(dir / "dataset_manifest.json", m.dump(1) + "\n");
}

void write_classifier(const fs::path& dir, const TrainedClassifier& t) {
  write_text(dir / "model.json", model_json(t.model));
  write_text(dir / "train_report.csv", train_report_csv(t.report));
}

void write_analysis(const fs::path& dir, const AnalysisResult& a) {
  write_text(dir / "correlation_data.csv", correlation_csv(a.data_reports));
  write_text(dir / "correlation_feature.csv", correlation_csv(a.feature_reports));
  write_text(dir / "fused_scores.csv", fused_csv(a.fused));
  write_text(dir / "kg_triples.txt", format_kg_text(a.triples));
  write_text(dir / "kg_triples.json", kg_json(a.triples));
}

void write_pretraining(const fs::path& dir, const PretrainStage& s) {
  write_text(dir / "trunk.json", trunk_json(s.trunk));
  std::string pairs = "i,j,label\n";
  for (const auto& p : s.split.samples)
    pairs += std::to_string(p.i + 1) + ',' + std::to_string(p.j + 1) + ',' + std::to_string(p.label) + '\n';
  write_text(dir / "link_holdout.csv", pairs);
  write_text(dir / "finetune_report.csv", train_report_csv(s.finetuned.report));
}

void write_ablation(const fs::path& dir, const std::vector<AblationRow>& rows) {
  std::string out = "variant,widths,parameters,accuracy\n";
  for (const auto& r : rows) {
    std::string w;
    for (std::size_t k = 1; k < r.variant.widths.size(); ++k) w += (k > 1 ? "-" : "") + std::to_string(r.variant.widths[k]);
    out += r.variant.name + ',' + w + ',' + std::to_string(r.parameter_count) + ',' + format_double(r.accuracy) + '\n';
  }
  write_text(dir / "ablation.csv", out);
}

namespace {

template <class F>
auto stage(const char* name, std::vector<std::pair<std::string, double>>& timings, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto r = f();
    timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return r;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string(name) + " stage failed: " + e.what());
  }
}

}  // namespace

PipelineSummary run_pipeline(const RunConfig& config, const fs::path& out) {
  validate_config(config);
  PipelineSummary sum;
  auto& tm = sum.timings;

  const auto sim = stage("simulate", tm, [&] { return run_simulation(config); });
  write_traces(out, config, sim);
  const auto ds = stage("dataset", tm, [&] { return run_dataset(config, sim); });
  write_dataset(out, config, ds);
  const auto trained = stage("train", tm, [&] { return run_training(config, ds, sim.adjacency, config.seed, config.widths); });
  write_classifier(out, trained);
  if (config.ablate) {
    sum.ablation = stage("ablate", tm, [&] {
      return ablation_run(ds, sim.adjacency, config.train_config(config.seed), config.model_options());
    });
    write_ablation(out, sum.ablation);
  }
  const auto analysis = stage("analyze", tm, [&] { return run_analysis(config, trained.model, sim); });
  write_analysis(out, analysis);
  const auto pre = stage("pretrain", tm, [&] { return run_pretraining(config, ds, sim.adjacency, config.seed); });
  write_pretraining(out, pre);

  sum.samples = ds.size();
  sum.positives = ds.positives();
  sum.negatives = ds.size() - ds.positives();
  sum.train = ds.count(Split::Train);
  sum.test = ds.count(Split::Test);
  sum.accuracy = trained.report.final_accuracy;
  sum.pretrain_auc = pre.trunk.holdout_auc;
  sum.finetune_accuracy = pre.finetuned.report.final_accuracy;

  json j = {{"seed", config.seed},
            {"samples", sum.samples},
            {"positives", sum.positives},
            {"negatives", sum.negatives},
            {"train", sum.train},
            {"test", sum.test},
            {"accuracy", sum.accuracy},
            {"parameters", trained.model.parameter_count()},
            {"pretrain_auc", sum.pretrain_auc},
            {"finetune_accuracy", sum.finetune_accuracy},
            {"timings", "metadata.json"}};
  if (config.ablate) {
    json rows = json::array();
    for (const auto& r : sum.ablation)
      rows.push_back({{"variant", r.variant.name}, {"accuracy", r.accuracy}, {"parameters", r.parameter_count}});
    j["ablation"] = rows;
  }
  write_text(out / "summary.json", j.dump(1) + "\n");
  write_text(out / "config.ini", format_config(config));

  json meta = json::object();
  for (const auto& [name, sec] : tm) meta["seconds"][name] = sec;
  if (config.ablate)
    for (const auto& r : sum.ablation) meta["seconds"]["ablate_" + r.variant.name] = r.wall_seconds;
  write_text(out / "metadata.json", meta.dump(1) + "\n");
  return sum;
}

}  // namespace gridfault
