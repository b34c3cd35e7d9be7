#include "gridfault/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "gridfault/error.hpp"

namespace gridfault {

FaultSpec RunConfig::fault_spec(double clearing) const {
  FaultSpec f;
  f.bus = fault_bus;
  f.start = fault_start;
  f.clearing = clearing;
  f.horizon = horizon;
  f.step = step;
  return f;
}

SimulationOptions RunConfig::simulation_options() const {
  SimulationOptions o;
  o.damping = damping;
  return o;
}

DatasetRecipe RunConfig::recipe() const {
  DatasetRecipe r;
  const RunConfig defaults;
  // The class counts are only known for the reference scenario set.
  if (fault_start != defaults.fault_start || clearing_times != defaults.clearing_times ||
      horizon != defaults.horizon || step != defaults.step || window != defaults.window ||
      negative_clearing != defaults.negative_clearing) {
    r.expected_positive.reset();
    r.expected_negative.reset();
  }
  r.window = window;
  r.negative_clearing = negative_clearing;
  return r;
}

TrainConfig RunConfig::train_config(std::uint64_t s) const {
  TrainConfig t;
  t.epochs = epochs;
  t.learning_rate = learning_rate;
  t.seed = s;
  t.batch_size = batch_size;
  t.standardize = standardize;
  return t;
}

ModelOptions RunConfig::model_options() const {
  ModelOptions m;
  m.mask_bus = fault_bus;
  m.propagation = normalize_adjacency ? Propagation::SymmetricNormalized : Propagation::Raw;
  return m;
}

LinkSplitOptions RunConfig::link_split_options(std::uint64_t s) const {
  LinkSplitOptions o;
  o.holdout_fraction = holdout_fraction;
  o.negative_ratio = negative_ratio;
  o.seed = s;
  return o;
}

PretrainConfig RunConfig::pretrain_config(std::uint64_t s) const {
  PretrainConfig p;
  p.epochs = pretrain_epochs;
  p.learning_rate = pretrain_learning_rate;
  p.seed = s;
  p.propagation = model_options().propagation;
  return p;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Cursor {
  std::string_view source;
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(std::string(source), line, key, what); }

  template <class T>
  T number(std::string_view text) const {
    text = trim(text);
    T v{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) fail("not a number: '" + std::string(text) + "'");
    return v;
  }

  bool boolean(std::string_view text) const {
    text = trim(text);
    if (text == "true") return true;
    if (text == "false") return false;
    fail("expected true or false, got '" + std::string(text) + "'");
  }

  template <class T>
  std::vector<T> list(std::string_view text) const {
    std::vector<T> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      out.push_back(number<T>(item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  FusionWeights weights(std::string_view text) const {
    const auto v = list<double>(text);
    if (v.size() != 3) fail("expected three weights (feature, time, space)");
    return {v[0], v[1], v[2]};
  }
};

using Setter = std::function<void(RunConfig&, const Cursor&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"paths.case", [](RunConfig& c, const Cursor&, std::string_view v) { c.case_file = std::string(trim(v)); }},
      {"paths.work_dir", [](RunConfig& c, const Cursor&, std::string_view v) { c.work_dir = std::string(trim(v)); }},
      {"scenario.fault_bus", [](RunConfig& c, const Cursor& k, std::string_view v) { c.fault_bus = k.number<int>(v); }},
      {"scenario.fault_start", [](RunConfig& c, const Cursor& k, std::string_view v) { c.fault_start = k.number<double>(v); }},
      {"scenario.clearing_times", [](RunConfig& c, const Cursor& k, std::string_view v) { c.clearing_times = k.list<double>(v); }},
      {"scenario.horizon", [](RunConfig& c, const Cursor& k, std::string_view v) { c.horizon = k.number<double>(v); }},
      {"scenario.step", [](RunConfig& c, const Cursor& k, std::string_view v) { c.step = k.number<double>(v); }},
      {"scenario.damping", [](RunConfig& c, const Cursor& k, std::string_view v) { c.damping = k.number<double>(v); }},
      {"features.window", [](RunConfig& c, const Cursor& k, std::string_view v) { c.window = k.number<std::size_t>(v); }},
      {"features.standardize", [](RunConfig& c, const Cursor& k, std::string_view v) { c.standardize = k.boolean(v); }},
      {"features.negative_clearing", [](RunConfig& c, const Cursor& k, std::string_view v) { c.negative_clearing = k.number<double>(v); }},
      {"model.widths", [](RunConfig& c, const Cursor& k, std::string_view v) { c.widths = k.list<int>(v); }},
      {"model.seed", [](RunConfig& c, const Cursor& k, std::string_view v) { c.seed = k.number<std::uint64_t>(v); }},
      {"model.epochs", [](RunConfig& c, const Cursor& k, std::string_view v) { c.epochs = k.number<int>(v); }},
      {"model.learning_rate", [](RunConfig& c, const Cursor& k, std::string_view v) { c.learning_rate = k.number<double>(v); }},
      {"model.batch_size", [](RunConfig& c, const Cursor& k, std::string_view v) { c.batch_size = k.number<std::size_t>(v); }},
      {"model.normalize_adjacency", [](RunConfig& c, const Cursor& k, std::string_view v) { c.normalize_adjacency = k.boolean(v); }},
      {"model.ablate", [](RunConfig& c, const Cursor& k, std::string_view v) { c.ablate = k.boolean(v); }},
      {"pretrain.holdout_fraction", [](RunConfig& c, const Cursor& k, std::string_view v) { c.holdout_fraction = k.number<double>(v); }},
      {"pretrain.negative_ratio", [](RunConfig& c, const Cursor& k, std::string_view v) { c.negative_ratio = k.number<std::size_t>(v); }},
      {"pretrain.epochs", [](RunConfig& c, const Cursor& k, std::string_view v) { c.pretrain_epochs = k.number<int>(v); }},
      {"pretrain.learning_rate", [](RunConfig& c, const Cursor& k, std::string_view v) { c.pretrain_learning_rate = k.number<double>(v); }},
      {"pretrain.freeze_trunk", [](RunConfig& c, const Cursor& k, std::string_view v) { c.freeze_trunk = k.boolean(v); }},
      {"analysis.top_k", [](RunConfig& c, const Cursor& k, std::string_view v) { c.top_k = k.number<std::size_t>(v); }},
      {"analysis.kg_k", [](RunConfig& c, const Cursor& k, std::string_view v) { c.kg_k = k.number<std::size_t>(v); }},
      {"analysis.clearing", [](RunConfig& c, const Cursor& k, std::string_view v) { c.analysis_clearing = k.number<double>(v); }},
      {"analysis.window_times", [](RunConfig& c, const Cursor& k, std::string_view v) { c.window_times = k.list<double>(v); }},
      {"analysis.layer_sample_time", [](RunConfig& c, const Cursor& k, std::string_view v) { c.layer_sample_time = k.number<double>(v); }},
      {"analysis.layers", [](RunConfig& c, const Cursor& k, std::string_view v) { c.layers = k.list<int>(v); }},
      {"analysis.fusion_weights", [](RunConfig& c, const Cursor& k, std::string_view v) { c.fusion = k.weights(v); }},
      {"verify.seeds", [](RunConfig& c, const Cursor& k, std::string_view v) { c.verify_seeds = k.list<std::uint64_t>(v); }},
  };
  return table;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

bool on_grid(double t, double step) {
  const double k = t / step;
  return std::abs(k - std::round(k)) < 1e-6;
}

RunConfig parse_unvalidated(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(std::string(source), line_no, std::string(line), "unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(std::string(source), line_no, std::string(line), "expected key = value");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto value = line.substr(eq + 1);
    const Cursor cur{source, line_no, key};
    if (section == "analysis" && key.rfind("analysis.override.", 0) == 0) {
      const auto bus = cur.number<int>(std::string_view(key).substr(std::string_view("analysis.override.").size()));
      cfg.fusion_overrides[bus] = cur.weights(value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) cur.fail("unknown key");
    it->second(cfg, cur, value);
  }
  return cfg;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  auto cfg = parse_unvalidated(text, source);
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_unvalidated(ss.str(), path.string());
  if (!cfg.case_file.empty() && cfg.case_file.is_relative()) cfg.case_file = path.parent_path() / cfg.case_file;
  validate_config(cfg);
  return cfg;
}

std::string format_config(const RunConfig& c) {
  std::string o;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  o += "[paths]\n";
  if (!c.case_file.empty()) o += "case = " + c.case_file.string() + "\n";
  o += "work_dir = " + c.work_dir.string() + "\n\n";
  o += "[scenario]\nfault_bus = " + std::to_string(c.fault_bus) + "\nfault_start = " + fmt(c.fault_start) +
       "\nclearing_times = " + join(c.clearing_times) + "\nhorizon = " + fmt(c.horizon) + "\nstep = " + fmt(c.step) +
       "\ndamping = " + fmt(c.damping) + "\n\n";
  o += "[features]\nwindow = " + std::to_string(c.window) + "\nstandardize = " + b(c.standardize) +
       "\nnegative_clearing = " + fmt(c.negative_clearing) + "\n\n";
  o += "[model]\nwidths = " + join(c.widths) + "\nseed = " + std::to_string(c.seed) + "\nepochs = " +
       std::to_string(c.epochs) + "\nlearning_rate = " + fmt(c.learning_rate) + "\nbatch_size = " +
       std::to_string(c.batch_size) + "\nnormalize_adjacency = " + b(c.normalize_adjacency) + "\nablate = " +
       b(c.ablate) + "\n\n";
  o += "[pretrain]\nholdout_fraction = " + fmt(c.holdout_fraction) + "\nnegative_ratio = " +
       std::to_string(c.negative_ratio) + "\nepochs = " + std::to_string(c.pretrain_epochs) + "\nlearning_rate = " +
       fmt(c.pretrain_learning_rate) + "\nfreeze_trunk = " + b(c.freeze_trunk) + "\n\n";
  o += "[analysis]\ntop_k = " + std::to_string(c.top_k) + "\nkg_k = " + std::to_string(c.kg_k) + "\nclearing = " +
       fmt(c.analysis_clearing) + "\nwindow_times = " + join(c.window_times) + "\nlayer_sample_time = " +
       fmt(c.layer_sample_time) + "\nlayers = " + join(c.layers) + "\nfusion_weights = " +
       join(std::vector<double>{c.fusion.feature, c.fusion.time, c.fusion.space}) + "\n";
  for (const auto& [bus, w] : c.fusion_overrides)
    o += "override." + std::to_string(bus) + " = " + join(std::vector<double>{w.feature, w.time, w.space}) + "\n";
  o += "\n[verify]\nseeds = " + join(c.verify_seeds) + "\n";
  return o;
}

std::vector<std::string> check_config(const RunConfig& c) {
  std::vector<std::string> v;
  if (!c.case_file.empty() && !std::filesystem::exists(c.case_file))
    v.push_back("case file not found: " + c.case_file.string());
  if (c.clearing_times.empty()) v.push_back("scenario.clearing_times is empty");
  if (!(c.step > 0)) v.push_back("scenario.step must be > 0");
  if (!(c.fault_start > 0)) v.push_back("scenario.fault_start must be > 0");
  if (c.fault_bus < 1) v.push_back("scenario.fault_bus must be a 1-based bus id");
  if (c.damping < 0) v.push_back("scenario.damping must be >= 0");
  for (double t : c.clearing_times) {
    if (t < c.fault_start) v.push_back("clearing time " + fmt(t) + " precedes the fault start");
    if (!(t < c.horizon)) v.push_back("clearing time " + fmt(t) + " is not before the horizon " + fmt(c.horizon));
    if (c.step > 0 && !on_grid(t, c.step)) v.push_back("clearing time " + fmt(t) + " is off the step grid");
  }
  if (c.step > 0 && !on_grid(c.fault_start, c.step)) v.push_back("fault start is off the step grid");
  if (c.step > 0 && !on_grid(c.horizon, c.step)) v.push_back("horizon is off the step grid");
  if (c.window == 0 || c.window % 2 == 0) v.push_back("features.window must be odd");
  auto has = [&](double t) {
    for (double x : c.clearing_times)
      if (std::abs(x - t) < 1e-9) return true;
    return false;
  };
  if (!has(c.negative_clearing)) v.push_back("features.negative_clearing is not one of the clearing times");
  if (!has(c.analysis_clearing)) v.push_back("analysis.clearing is not one of the clearing times");
  try {
    validate_widths(c.widths);
  } catch (const ValidationError& e) {
    for (const auto& s : e.violations()) v.push_back("model.widths: " + s);
  }
  if (c.epochs <= 0) v.push_back("model.epochs must be > 0");
  if (!(c.learning_rate > 0)) v.push_back("model.learning_rate must be > 0");
  if (!(c.holdout_fraction > 0 && c.holdout_fraction < 1)) v.push_back("pretrain.holdout_fraction must lie in (0, 1)");
  if (c.negative_ratio == 0) v.push_back("pretrain.negative_ratio must be >= 1");
  if (c.pretrain_epochs <= 0) v.push_back("pretrain.epochs must be > 0");
  if (!(c.pretrain_learning_rate > 0)) v.push_back("pretrain.learning_rate must be > 0");
  if (c.top_k == 0) v.push_back("analysis.top_k must be >= 1");
  if (c.kg_k == 0) v.push_back("analysis.kg_k must be >= 1");
  if (c.window_times.empty()) v.push_back("analysis.window_times is empty");
  for (double t : c.window_times)
    if (t < 0 || t > c.horizon || (c.step > 0 && !on_grid(t, c.step)))
      v.push_back("analysis window time " + fmt(t) + " is not a sample of the trace");
  if (c.layer_sample_time < 0 || c.layer_sample_time > c.horizon ||
      (c.step > 0 && !on_grid(c.layer_sample_time, c.step)))
    v.push_back("analysis.layer_sample_time is not a sample of the trace");
  for (int l : c.layers)
    if (l < 1 || l >= static_cast<int>(c.widths.size())) v.push_back("analysis layer " + std::to_string(l) + " does not exist");
  auto check_w = [&](const FusionWeights& w, const std::string& what) {
    try {
      validate_weights(w);
    } catch (const ValidationError& e) {
      for (const auto& s : e.violations()) v.push_back(what + ": " + s);
    }
  };
  check_w(c.fusion, "analysis.fusion_weights");
  for (const auto& [bus, w] : c.fusion_overrides) check_w(w, "analysis.override." + std::to_string(bus));
  if (c.verify_seeds.empty()) v.push_back("verify.seeds is empty");
  return v;
}

void validate_config(const RunConfig& config) {
  auto v = check_config(config);
  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace gridfault
