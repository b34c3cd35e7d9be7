#include "gridfault/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridfault/error.hpp"

namespace gridfault {

FeatureMatrix window_features(const ScenarioTrace& trace, std::size_t t_index, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw Error("window size must be odd, got " + std::to_string(window));
  if (t_index >= trace.length())
    throw Error("time index " + std::to_string(t_index) + " outside trace of length " +
                std::to_string(trace.length()));
  const auto nb = trace.bus_count();
  const auto half = window / 2;
  const auto lo = t_index >= half ? t_index - half : 0;
  const auto hi = std::min(trace.length() - 1, t_index + half);
  const auto count = static_cast<double>(hi - lo + 1);

  FeatureMatrix z = FeatureMatrix::Zero(static_cast<Eigen::Index>(nb), kFeatureCount);
  for (std::size_t i = 0; i < nb; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    z(r, kVmag) = trace.vmag(t_index, i);
    z(r, kVang) = trace.vang(t_index, i);
    z(r, kActivePower) = trace.p(t_index, i);
    z(r, kReactivePower) = trace.q(t_index, i);

    double sum_m = 0, sum_a = 0;
    for (auto t = lo; t <= hi; ++t) {
      sum_m += trace.vmag(t, i);
      sum_a += trace.vang(t, i);
    }
    const double mean_m = sum_m / count, mean_a = sum_a / count;
    double var_m = 0, var_a = 0;
    for (auto t = lo; t <= hi; ++t) {
      var_m += (trace.vmag(t, i) - mean_m) * (trace.vmag(t, i) - mean_m);
      var_a += (trace.vang(t, i) - mean_a) * (trace.vang(t, i) - mean_a);
    }
    z(r, kVmagMean) = mean_m;
    z(r, kVmagVar) = var_m / count;
    z(r, kVangMean) = mean_a;
    z(r, kVangVar) = var_a / count;
  }
  for (std::size_t g = 0; g < trace.generator_count(); ++g) {
    const auto r = static_cast<Eigen::Index>(trace.generator_buses[g] - 1);
    z(r, kExcitation) = trace.emf(t_index, g);
    z(r, kPowerAngle) = trace.delta(t_index, g);
  }
  return z;
}

std::size_t Dataset::count(Split s) const { return static_cast<std::size_t>(std::count(split.begin(), split.end(), s)); }

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const Sample& s) { return s.label == 1; }));
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

Dataset assemble_dataset(const std::vector<ScenarioTrace>& traces, const DatasetRecipe& recipe) {
  if (traces.empty()) throw ValidationError({"dataset needs at least one scenario trace"});
  Dataset ds;
  std::size_t negatives = 0;
  bool have_negative_scenario = false;
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const auto& tr = traces[s];
    const bool negative_source = std::abs(tr.fault.clearing - recipe.negative_clearing) < 1e-9;
    have_negative_scenario |= negative_source;
    for (std::size_t t = 0; t < tr.length(); ++t) {
      int label;
      if (tr.fault_on(t))
        label = 1;
      else if (negative_source && t >= tr.fault_last)
        label = 0;
      else
        continue;
      ds.samples.push_back({window_features(tr, t, recipe.window), label, {s, t, tr.time[t]}});
      if (label == 0) ++negatives;
    }
  }
  if (!have_negative_scenario)
    throw ValidationError({"no scenario clears at " + std::to_string(recipe.negative_clearing) +
                           " s to supply negative samples"});

  std::vector<std::string> problems;
  const auto positives = ds.samples.size() - negatives;
  if (recipe.expected_positive && positives != *recipe.expected_positive)
    problems.push_back("expected " + std::to_string(*recipe.expected_positive) + " fault samples, built " +
                       std::to_string(positives));
  if (recipe.expected_negative && negatives != *recipe.expected_negative)
    problems.push_back("expected " + std::to_string(*recipe.expected_negative) + " non-fault samples, built " +
                       std::to_string(negatives));
  if (!problems.empty()) throw ValidationError(std::move(problems));

  split_dataset(ds);
  return ds;
}

std::vector<Split> split_assignment(std::size_t size) {
  std::vector<Split> out(size, Split::Train);
  const auto full_groups = size / 3;
  for (std::size_t g = 0; g < full_groups; ++g) out[3 * g + 2] = Split::Test;
  return out;
}

void split_dataset(Dataset& dataset) { dataset.split = split_assignment(dataset.size()); }

Standardizer Standardizer::identity(std::size_t columns) {
  const auto c = static_cast<Eigen::Index>(columns);
  return {Eigen::VectorXd::Zero(c), Eigen::VectorXd::Ones(c)};
}

Standardizer Standardizer::fit(const Dataset& dataset) {
  const auto train = dataset.indices(Split::Train);
  if (train.empty()) throw Error("cannot fit standardization without training samples");
  const auto cols = dataset.samples[train.front()].features.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(cols);
  double rows = 0;
  for (auto i : train) {
    sum += dataset.samples[i].features.colwise().sum().transpose();
    rows += static_cast<double>(dataset.samples[i].features.rows());
  }
  Standardizer st;
  st.mean = sum / rows;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(cols);
  for (auto i : train) {
    const Eigen::MatrixXd centered = dataset.samples[i].features.rowwise() - st.mean.transpose();
    sq += centered.array().square().colwise().sum().matrix().transpose();
  }
  st.scale = (sq / rows).cwiseSqrt();
  for (Eigen::Index c = 0; c < cols; ++c)
    if (!(st.scale[c] > 1e-12)) st.scale[c] = 1.0;
  return st;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& raw) const {
  return ((raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

}  // namespace gridfault
