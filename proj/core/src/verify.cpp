#include "gridfault/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <span>

#include "gridfault/error.hpp"
#include "gridfault/io.hpp"
#include "gridfault/pipeline.hpp"

namespace gridfault {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::string pct_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.2f", 100.0 * v[i]);
  return s + "]";
}

CriterionResult make(std::string id, std::string title, bool gating = true) {
  CriterionResult r;
  r.id = std::move(id);
  r.title = std::move(title);
  r.gating = gating;
  return r;
}

Outcome verdict(bool ok) { return ok ? Outcome::Pass : Outcome::Fail; }

std::set<int> top_set(const CorrelationReport& r) {
  std::set<int> s;
  for (const auto& n : r.top) s.insert(n.node);
  return s;
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<fs::path> names;
  for (const auto& root : {a, b})
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root));
  std::size_t compared = 0;
  for (const auto& n : names) {
    if (n == "metadata.json") continue;
    if (!fs::exists(a / n) || !fs::exists(b / n)) {
      why = n.string() + " missing from one run";
      return false;
    }
    if (read_text(a / n) != read_text(b / n)) {
      why = n.string() + " differs";
      return false;
    }
    ++compared;
  }
  why = std::to_string(compared) + " files byte-identical";
  return true;
}

}  // namespace

bool VerifyReport::passed() const {
  for (const auto& c : criteria)
    if (c.gating && c.outcome != Outcome::Pass) return false;
  return true;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Skip: return "SKIP";
  }
  return "?";
}

std::string format_result(const CriterionResult& r) {
  return fmt("[%s] %s %s%s: %s (%.1f s)", outcome_name(r.outcome), r.id.c_str(), r.title.c_str(),
             r.gating ? "" : " [soft]", r.detail.c_str(), r.seconds);
}

namespace {

// Mean masked BCE of the batch; `bits` receives which ReLU units are active.
double loss_and_pattern(const GnnModel& model, std::span<const Example> batch, std::vector<bool>& bits) {
  bits.clear();
  double loss = 0.0;
  const auto mask = static_cast<Eigen::Index>(model.mask_node);
  for (const auto& ex : batch) {
    const auto cache = forward_layers(model.propagation, model.weights, ex.input, false);
    for (std::size_t k = 0; k + 1 < cache.preact.size(); ++k)
      for (Eigen::Index i = 0; i < cache.preact[k].size(); ++i) bits.push_back(cache.preact[k].data()[i] > 0.0);
    const double p = 1.0 / (1.0 + std::exp(-cache.output(mask, 0)));
    const double y[] = {ex.label}, q[] = {p};
    loss += bce_loss(q, y);
  }
  return loss / static_cast<double>(batch.size());
}

}  // namespace

GradientCheck check_gradients(const std::vector<int>& widths, const Adjacency& adj, std::size_t configurations,
                              std::uint64_t seed, double h) {
  GradientCheck out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> batch_size(1, 4);
  for (std::size_t c = 0; c < configurations; ++c) {
    GnnModel model = init_model(widths, adj, rng());
    std::vector<Example> batch(static_cast<std::size_t>(batch_size(rng)));
    for (std::size_t k = 0; k < batch.size(); ++k) {
      batch[k].input = FeatureMatrix(static_cast<Eigen::Index>(adj.order()), widths.front());
      for (Eigen::Index i = 0; i < batch[k].input.size(); ++i) batch[k].input.data()[i] = 0.3 * normal(rng);
      batch[k].label = static_cast<double>(rng() % 2);
    }
    const auto analytic = backward(model, batch);
    std::vector<bool> pattern, probe;
    loss_and_pattern(model, batch, pattern);
    for (std::size_t layer = 0; layer < model.weights.size(); ++layer)
      for (Eigen::Index i = 0; i < model.weights[layer].size(); ++i) {
        double& w = model.weights[layer].data()[i];
        const double saved = w;
        w = saved + h;
        const double up = loss_and_pattern(model, batch, probe);
        bool kink = probe != pattern;
        w = saved - h;
        const double down = loss_and_pattern(model, batch, probe);
        kink = kink || probe != pattern;
        w = saved;
        if (kink) {
          ++out.kinks_skipped;
          continue;
        }
        const double fd = (up - down) / (2.0 * h);
        const double an = analytic.weights[layer].data()[i];
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), kGradientFloor});
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.parameters_checked;
      }
    ++out.configurations;
  }
  return out;
}

EnergyCheck check_energy(const GridCase& grid, const OperatingPoint& op, const FaultSpec& fault, double coarse_step,
                         double duration) {
  const std::vector<double> angle = op.rotor_angle, speed(angle.size(), 0.0);
  const auto net = kron_reduce(grid, op, NetworkPhase::FaultOn, fault);
  EnergyCheck e;
  e.drift_coarse = audit_energy(grid, op, net, angle, speed, coarse_step, duration).drift_per_second();
  e.drift_fine = audit_energy(grid, op, net, angle, speed, coarse_step / 2, duration).drift_per_second();
  e.ratio = e.drift_fine > 0 ? e.drift_coarse / e.drift_fine : 0.0;
  return e;
}

VerifyReport run_verification(const RunConfig& config, const VerifyOptions& options) {
  VerifyReport rep;
  auto& out = rep.criteria;

  // Topology first: nothing downstream is meaningful on a broken case.
  GridCase grid;
  {
    auto r = make("T", "case topology");
    const auto t0 = Clock::now();
    std::vector<std::string> problems;
    try {
      grid = load_run_case(config);
      const auto adj = build_adjacency(grid);
      if (!is_connected(adj)) problems.push_back("graph is not connected");
      for (std::size_t i = 0; i < adj.order(); ++i)
        for (std::size_t j = 0; j < adj.order(); ++j)
          if (adj(i, j) != adj(j, i)) problems.push_back("adjacency is not symmetric");
      if (grid.bus_count() == 39 && adj.edge_count() != 46)
        problems.push_back(fmt("expected 46 distinct branches, found %zu", adj.edge_count()));
      r.detail = fmt("%zu buses, %zu edges, %zu nonzeros", grid.bus_count(), adj.edge_count(), adj.nonzero_count());
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
    if (!problems.empty()) {
      r.detail.clear();
      for (const auto& p : problems) r.detail += (r.detail.empty() ? "" : "; ") + p;
    }
    r.outcome = verdict(problems.empty());
    r.seconds = since(t0);
    out.push_back(r);
    if (!problems.empty()) {
      for (const char* id : {"1", "2", "3", "4", "5", "6", "7", "8", "9"}) {
        auto s = make(id, "not run", std::string(id) != "7");
        s.detail = "case topology failed";
        out.push_back(s);
      }
      return rep;
    }
  }

  // 1. dataset counts
  SimulationStage sim;
  Dataset ds;
  {
    auto r = make("1", "dataset fidelity");
    const auto t0 = Clock::now();
    try {
      sim = run_simulation(config, grid);
      ds = run_dataset(config, sim);
      r.seconds = since(t0);
      const auto pos = ds.positives(), neg = ds.size() - ds.positives();
      const auto tr = ds.count(Split::Train), te = ds.count(Split::Test);
      const bool ok = pos == 320 && neg == 927 && ds.size() == 1247 && tr == 832 && te == 415 && r.seconds < 60;
      r.detail = fmt("label1=%zu label0=%zu total=%zu train=%zu test=%zu", pos, neg, ds.size(), tr, te);
      r.outcome = verdict(ok);
    } catch (const std::exception& e) {
      r.seconds = since(t0);
      r.detail = e.what();
      r.outcome = Outcome::Fail;
    }
    out.push_back(r);
    if (r.outcome != Outcome::Pass && ds.size() == 0) {
      for (const char* id : {"2", "3", "7", "8", "9"}) {
        auto s = make(id, "not run", std::string(id) != "7");
        s.detail = "no dataset";
        out.push_back(s);
      }
    }
  }
  const bool have_data = ds.size() > 0;

  // 2 and 3 share one set of training runs.
  auto seeds = config.verify_seeds;
  if (std::find(seeds.begin(), seeds.end(), config.seed) == seeds.end()) seeds.insert(seeds.begin(), config.seed);
  const auto variants = default_ablation_variants();
  std::vector<std::vector<double>> acc(variants.size());
  std::vector<std::size_t> params(variants.size());
  double a_seconds = 0.0, all_seconds = 0.0;
  GnnModel default_model;
  bool have_model = false;
  if (have_data) {
    auto r2 = make("2", "model A accuracy");
    auto r3 = make("3", "ablation ordering");
    try {
      for (std::uint64_t s : seeds)
        for (std::size_t v = 0; v < variants.size(); ++v) {
          auto t = run_training(config, ds, sim.adjacency, s, variants[v].widths);
          acc[v].push_back(t.report.final_accuracy);
          params[v] = t.model.parameter_count();
          all_seconds += t.report.wall_seconds;
          if (v == 0) a_seconds += t.report.wall_seconds;
          if (v == 0 && s == config.seed) {
            default_model = t.model;
            have_model = true;
          }
        }
      const auto di = static_cast<std::size_t>(std::find(seeds.begin(), seeds.end(), config.seed) - seeds.begin());
      const double a_default = acc[0][di];
      const double a_min = *std::min_element(acc[0].begin(), acc[0].end());
      r2.seconds = a_seconds;
      r2.outcome = verdict(a_default >= 0.95 && a_min >= 0.93 && a_seconds < 300);
      r2.detail = fmt("seed %llu: %.2f%% (>= 95), per seed %s min %.2f%% (>= 93)",
                      static_cast<unsigned long long>(config.seed), 100 * a_default, pct_list(acc[0]).c_str(),
                      100 * a_min);

      const double ma = mean(acc[0]), mb = mean(acc[1]), mc = mean(acc[2]);
      const bool order = params[2] > params[0] && params[0] > params[1];
      r3.seconds = all_seconds;
      r3.outcome = verdict(ma - mb >= 0.10 && std::abs(ma - mc) <= 0.03 && order);
      r3.detail = fmt("%zu-seed means A %.2f B %.2f C %.2f: A-B %.2f pts (>= 10), |A-C| %.2f pts (<= 3); "
                      "params C %zu > A %zu > B %zu; seed %llu alone: A %.2f B %.2f C %.2f",
                      seeds.size(), 100 * ma, 100 * mb, 100 * mc, 100 * (ma - mb), 100 * std::abs(ma - mc),
                      params[2], params[0], params[1], static_cast<unsigned long long>(config.seed),
                      100 * acc[0][di], 100 * acc[1][di], 100 * acc[2][di]);
    } catch (const std::exception& e) {
      r2.outcome = r3.outcome = Outcome::Fail;
      r2.detail = r3.detail = e.what();
    }
    out.push_back(r2);
    out.push_back(r3);
  }

  // 4. gradients
  {
    auto r = make("4", "gradient correctness");
    const auto t0 = Clock::now();
    const auto adj = build_adjacency(grid);
    double worst = 0.0;
    std::string parts;
    std::size_t configs_min = SIZE_MAX;
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto g = check_gradients(variants[v].widths, adj, 10, config.seed + v);
      worst = std::max(worst, g.max_relative_error);
      configs_min = std::min(configs_min, g.configurations);
      parts += fmt("%s%s %.2e (%zu checked, %zu at ReLU kinks skipped)", parts.empty() ? "" : ", ",
                   variants[v].name.c_str(), g.max_relative_error, g.parameters_checked, g.kinks_skipped);
    }
    r.seconds = since(t0);
    r.outcome = verdict(worst <= 1e-4 && configs_min >= 10 && r.seconds < 30);
    r.detail = fmt("max relative error %s over %zu configurations each (<= 1e-4)", parts.c_str(), configs_min);
    out.push_back(r);
  }

  // 5. simulator properties
  {
    auto r = make("5", "simulator properties");
    const auto t0 = Clock::now();
    try {
      const auto op = solve_power_flow(grid);
      FaultSpec quiet = config.fault_spec(config.fault_start);
      const auto still = simulate_scenario(grid, op, quiet, config.simulation_options());
      double max_dd = 0.0;
      for (std::size_t t = 0; t < still.length(); ++t)
        for (std::size_t g = 0; g < still.generator_count(); ++g)
          max_dd = std::max(max_dd, std::abs(still.delta(t, g) - still.delta(0, g)));

      const auto traces = sim.traces.empty() ? run_simulation(config, grid).traces : sim.traces;
      double max_v = 0.0;
      for (const auto& tr : traces)
        for (std::size_t t = tr.fault_first; t < tr.fault_last; ++t)
          max_v = std::max(max_v, tr.vmag(t, static_cast<std::size_t>(config.fault_bus - 1)));

      const auto e = check_energy(grid, op, config.fault_spec(config.clearing_times.front()), 0.01, 1.0);
      const bool ok_a = max_dd <= 1e-3, ok_b = max_v < 1e-6;
      const bool ok_c = e.drift_coarse <= 0.005 && e.ratio >= 12.0 && e.ratio <= 20.0;
      r.seconds = since(t0);
      r.outcome = verdict(ok_a && ok_b && ok_c && r.seconds < 60);
      r.detail = fmt("(a) no-fault max|dDelta| %.2e rad; (b) fault-on max V%d %.2e pu; "
                     "(c) drift %.3e %%/s at 0.01 s, %.3e %%/s at 0.005 s, ratio %.1f (12..20)",
                     max_dd, config.fault_bus, max_v, 100 * e.drift_coarse, 100 * e.drift_fine, e.ratio);
    } catch (const std::exception& ex) {
      r.seconds = since(t0);
      r.outcome = Outcome::Fail;
      r.detail = ex.what();
    }
    out.push_back(r);
  }

  // 6. cosine suite
  {
    auto r = make("6", "cosine similarity suite");
    const auto t0 = Clock::now();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::size_t bad_sym = 0, bad_bound = 0, bad_scale = 0, bad_order = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng() % 16;
      std::vector<double> a(n), b(n), sa(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
      }
      const double alpha = scale(rng);
      for (std::size_t i = 0; i < n; ++i) sa[i] = alpha * a[i];
      const auto ab = cosine_similarity(a, b), ba = cosine_similarity(b, a), sab = cosine_similarity(sa, b);
      bad_sym += ab.value != ba.value;
      bad_bound += std::abs(ab.value) > 1.0;
      bad_scale += std::abs(sab.value - ab.value) > 1e-12;

      Eigen::MatrixXd rows(39, static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = normal(rng);
      const auto base = rank_rows(rows, 15, 38, "t", 0);
      const auto scaled = rank_rows(alpha * rows, 15, 38, "t", 0);
      for (std::size_t k = 0; k < base.top.size(); ++k) bad_order += base.top[k].node != scaled.top[k].node;
    }
    const auto e1 = cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0}).value;
    const auto e2 = cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}).value;
    const auto e3 = cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{1, 0}).value;
    const bool exact = e1 == 1.0 && e2 == 0.0 && std::abs(e3 - 1.0 / std::sqrt(2.0)) < 1e-15;
    r.seconds = since(t0);
    r.outcome = verdict(bad_sym + bad_bound + bad_scale + bad_order == 0 && exact && r.seconds < 5);
    r.detail = fmt("1000 pairs: asymmetric %zu, out of bounds %zu, scale-variant %zu, reordered %zu; "
                   "examples %.5f %.5f %.5f",
                   bad_sym, bad_bound, bad_scale, bad_order, e1, e2, e3);
    out.push_back(r);
  }

  // 7. qualitative claims, reported only
  if (have_model) {
    auto r = make("7", "qualitative correlation claims", false);
    const auto t0 = Clock::now();
    try {
      const auto a = run_analysis(config, default_model, sim);
      bool windows_differ = false;
      for (std::size_t i = 0; i < a.data_reports.size(); ++i)
        for (std::size_t j = i + 1; j < a.data_reports.size(); ++j)
          windows_differ |= top_set(a.data_reports[i]) != top_set(a.data_reports[j]);
      const CorrelationReport* l2 = nullptr;
      const CorrelationReport* l4 = nullptr;
      for (const auto& fr : a.feature_reports) {
        if (fr.index == 2) l2 = &fr;
        if (fr.index == 4) l4 = &fr;
      }
      const bool layers_differ = l2 && l4 && top_set(*l2) != top_set(*l4);
      const double med = median_fused(a.fused);
      const double s17 = a.fused.size() >= 17 ? a.fused[16].fused : 0.0;
      r.outcome = verdict(windows_differ && layers_differ && s17 > med);
      r.detail = fmt("windows differ: %s; layers 2/4 differ: %s; node 17 fused %.4f vs median %.4f",
                     windows_differ ? "yes" : "no", layers_differ ? "yes" : "no", s17, med);
    } catch (const std::exception& e) {
      r.outcome = Outcome::Fail;
      r.detail = e.what();
    }
    r.seconds = since(t0);
    out.push_back(r);
  }

  // 8. pretraining no-regression, paired with the random-init runs above
  if (have_data && acc[0].size() == seeds.size()) {
    auto r = make("8", "pretraining no-regression");
    const auto t0 = Clock::now();
    try {
      std::vector<double> pre;
      double auc_default = 0.0;
      std::vector<double> aucs;
      for (std::uint64_t s : seeds) {
        const auto st = run_pretraining(config, ds, sim.adjacency, s);
        pre.push_back(st.finetuned.report.final_accuracy);
        aucs.push_back(st.trunk.holdout_auc);
        if (s == config.seed) auc_default = st.trunk.holdout_auc;
      }
      const double mp = mean(pre), mr = mean(acc[0]);
      r.seconds = since(t0);
      r.outcome = verdict(auc_default > 0.55 && mp >= mr - 0.02 && r.seconds < 300);
      r.detail = fmt("seed %llu AUC %.3f (> 0.55), AUC over seeds mean %.3f; pretrained %s mean %.2f%% vs "
                     "random-init mean %.2f%% (>= -2 pts)",
                     static_cast<unsigned long long>(config.seed), auc_default, mean(aucs), pct_list(pre).c_str(),
                     100 * mp, 100 * mr);
    } catch (const std::exception& e) {
      r.seconds = since(t0);
      r.outcome = Outcome::Fail;
      r.detail = e.what();
    }
    out.push_back(r);
  }

  // 9. determinism
  if (have_data) {
    auto r = make("9", "determinism");
    const auto t0 = Clock::now();
    try {
      const auto a = options.scratch / "run-a", b = options.scratch / "run-b";
      fs::remove_all(options.scratch);
      run_pipeline(config, a);
      run_pipeline(config, b);
      std::string why;
      r.outcome = verdict(same_tree(a, b, why));
      r.detail = why;
      fs::remove_all(options.scratch);
    } catch (const std::exception& e) {
      r.outcome = Outcome::Fail;
      r.detail = e.what();
    }
    r.seconds = since(t0);
    out.push_back(r);
  }

  std::stable_sort(out.begin(), out.end(), [](const CriterionResult& x, const CriterionResult& y) {
    auto key = [](const std::string& id) { return id == "T" ? 0 : std::stoi(id); };
    return key(x.id) < key(y.id);
  });
  return rep;
}

}  // namespace gridfault
