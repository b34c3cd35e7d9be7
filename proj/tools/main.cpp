// gridfault: command-line entry point for the fault-diagnosis pipeline.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridfault/config.hpp"
#include "gridfault/error.hpp"
#include "gridfault/io.hpp"
#include "gridfault/pipeline.hpp"
#include "gridfault/verify.hpp"

namespace fs = std::filesystem;
using namespace gridfault;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kAcceptance = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool ablate = false;
  bool normalize = false;
  std::string model_path;
};

RunConfig resolve(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.work_dir = g.out;
  if (g.ablate) c.ablate = true;
  if (g.normalize) c.normalize_adjacency = true;
  validate_config(c);
  return c;
}

GnnModel model_for(const Globals& g, const RunConfig& c, const SimulationStage& sim, const Dataset& ds) {
  const fs::path p = g.model_path.empty() ? c.work_dir / "model.json" : fs::path(g.model_path);
  if (fs::exists(p)) return model_from_json(read_text(p), sim.adjacency);
  if (!g.model_path.empty()) throw Error("model file not found: " + p.string());
  std::fprintf(stderr, "no model at %s; training one\n", p.string().c_str());
  auto t = run_training(c, ds, sim.adjacency, c.seed, c.widths);
  write_classifier(c.work_dir, t);
  return t.model;
}

int cmd_simulate(const RunConfig& c) {
  const auto sim = run_simulation(c);
  write_traces(c.work_dir, c, sim);
  std::printf("wrote %zu traces to %s\n", sim.traces.size(), (c.work_dir / "traces").string().c_str());
  return kOk;
}

int cmd_dataset(const RunConfig& c) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  write_dataset(c.work_dir, c, ds);
  std::printf("samples %zu (label 1: %zu, label 0: %zu), train %zu, test %zu\n", ds.size(), ds.positives(),
              ds.size() - ds.positives(), ds.count(Split::Train), ds.count(Split::Test));
  return kOk;
}

int cmd_train(const RunConfig& c) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  const auto t = run_training(c, ds, sim.adjacency, c.seed, c.widths);
  write_classifier(c.work_dir, t);
  std::printf("test accuracy %.4f after %d epochs (%zu parameters, %.1f s)\n", t.report.final_accuracy, c.epochs,
              t.model.parameter_count(), t.report.wall_seconds);
  return kOk;
}

int cmd_eval(const Globals& g, const RunConfig& c) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  const auto model = model_for(g, c, sim, ds);
  const auto tr = ds.indices(Split::Train), te = ds.indices(Split::Test);
  const double a_train = evaluate(model, ds, tr), a_test = evaluate(model, ds, te);
  nlohmann::json j = {{"seed", c.seed}, {"train_accuracy", a_train}, {"test_accuracy", a_test},
                      {"train", tr.size()}, {"test", te.size()}};
  write_text(c.work_dir / "eval.json", j.dump(1) + "\n");
  std::printf("train accuracy %.4f (%zu), test accuracy %.4f (%zu)\n", a_train, tr.size(), a_test, te.size());
  return kOk;
}

int cmd_ablate(const RunConfig& c) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  const auto rows = ablation_run(ds, sim.adjacency, c.train_config(c.seed), c.model_options());
  write_ablation(c.work_dir, rows);
  for (const auto& r : rows)
    std::printf("%s  params %4zu  accuracy %.4f  (%.1f s)\n", r.variant.name.c_str(), r.parameter_count, r.accuracy,
                r.wall_seconds);
  return kOk;
}

int cmd_pretrain(const RunConfig& c) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  const auto st = run_pretraining(c, ds, sim.adjacency, c.seed);
  write_pretraining(c.work_dir, st);
  std::printf("held-out link AUC %.3f; fine-tuned test accuracy %.4f (%s trunk)\n", st.trunk.holdout_auc,
              st.finetuned.report.final_accuracy, c.freeze_trunk ? "frozen" : "unfrozen");
  return kOk;
}

int cmd_analyze(const Globals& g, const RunConfig& c, bool kg_only) {
  const auto sim = run_simulation(c);
  const auto ds = run_dataset(c, sim);
  const auto model = model_for(g, c, sim, ds);
  const auto a = run_analysis(c, model, sim);
  if (kg_only) {
    write_text(c.work_dir / "kg_triples.txt", format_kg_text(a.triples));
    write_text(c.work_dir / "kg_triples.json", kg_json(a.triples));
    std::fputs(format_kg_text(a.triples).c_str(), stdout);
    return kOk;
  }
  write_analysis(c.work_dir, a);
  for (const auto& r : a.data_reports)
    if (r.k_clamped) std::fprintf(stderr, "warning: top-k clamped to %zu\n", r.top.size());
  for (const auto* group : {&a.data_reports, &a.feature_reports})
    for (const auto& r : *group) {
      std::printf("%s %d:", r.domain.c_str(), r.index);
      for (const auto& n : r.top) std::printf(" %d", n.node);
      std::printf("\n");
    }
  return kOk;
}

int cmd_verify(const RunConfig& c) {
  VerifyOptions opt;
  opt.scratch = c.work_dir / ".verify-scratch";
  const auto rep = run_verification(c, opt);
  for (const auto& r : rep.criteria) std::printf("%s\n", format_result(r).c_str());
  std::printf("%s\n", rep.passed() ? "all gating criteria passed" : "acceptance failed");
  return rep.passed() ? kOk : kAcceptance;
}

int cmd_pipeline(const RunConfig& c) {
  const auto s = run_pipeline(c, c.work_dir);
  std::printf("samples %zu (%zu/%zu), split %zu/%zu, test accuracy %.4f\n", s.samples, s.positives, s.negatives,
              s.train, s.test, s.accuracy);
  for (const auto& r : s.ablation) std::printf("  %s accuracy %.4f (%zu params)\n", r.variant.name.c_str(), r.accuracy, r.parameter_count);
  std::printf("pretrain AUC %.3f, fine-tuned accuracy %.4f; artifacts in %s\n", s.pretrain_auc, s.finetune_accuracy,
              c.work_dir.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-grid fault diagnosis with graph networks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Root seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory (overrides paths.work_dir)");
  app.add_flag("--ablate", g.ablate, "Also train the ablation variants");
  app.add_flag("--normalize-adjacency", g.normalize, "Use D^-1/2 (A+I) D^-1/2 propagation");

  const char* names[] = {"simulate", "dataset", "train", "eval", "ablate", "pretrain", "analyze", "export-kg",
                         "verify", "pipeline"};
  const char* help[] = {"Simulate the fault scenarios and write traces",
                        "Assemble the labelled dataset",
                        "Train the classifier",
                        "Evaluate a trained model",
                        "Train and compare the ablation variants",
                        "Link-prediction pretraining and fine-tuning",
                        "Correlation analysis and fusion",
                        "Write knowledge-graph triples",
                        "Run the acceptance suite",
                        "Run every stage"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(names); ++i) subs.push_back(app.add_subcommand(names[i], help[i]));
  for (auto* s : {subs[3], subs[6], subs[7]}) s->add_option("--model", g.model_path, "Model file (default: <out>/model.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const auto c = resolve(g);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "simulate") return cmd_simulate(c);
    if (cmd == "dataset") return cmd_dataset(c);
    if (cmd == "train") return cmd_train(c);
    if (cmd == "eval") return cmd_eval(g, c);
    if (cmd == "ablate") return cmd_ablate(c);
    if (cmd == "pretrain") return cmd_pretrain(c);
    if (cmd == "analyze") return cmd_analyze(g, c, false);
    if (cmd == "export-kg") return cmd_analyze(g, c, true);
    if (cmd == "verify") return cmd_verify(c);
    return cmd_pipeline(c);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kValidation;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
