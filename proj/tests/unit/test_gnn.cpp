#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "gridfault/error.hpp"
#include "gridfault/gnn.hpp"

using namespace gridfault;

namespace {

const Adjacency& adj() { return fixtures::default_simulation().adjacency; }

FeatureMatrix random_input(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.3);
  FeatureMatrix x(39, kFeatureCount);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

double batch_loss(const GnnModel& m, const std::vector<Example>& batch) {
  std::vector<double> p, y;
  for (const auto& e : batch) {
    p.push_back(forward(m, e.input).probability);
    y.push_back(e.label);
  }
  return bce_loss(p, y);
}

}  // namespace

TEST_CASE("parameter counts of the ablation variants") {
  const auto v = default_ablation_variants();
  REQUIRE(v.size() == 3);
  CHECK(init_model(v[0].widths, adj(), 7).parameter_count() == 630);
  CHECK(init_model(v[1].widths, adj(), 7).parameter_count() == 74);
  CHECK(init_model(v[2].widths, adj(), 7).parameter_count() == 4614);
}

TEST_CASE("zero weights give probability one half") {
  auto m = init_model({10, 12, 18, 12, 6, 1}, adj(), 7);
  for (auto& w : m.weights) w.setZero();
  const auto r = forward(m, random_input(1));
  CHECK(r.logit == 0.0);
  CHECK(r.probability == 0.5);
  CHECK(r.layers.size() == 5);
  CHECK(r.layers.back().cols() == 1);
}

TEST_CASE("initialization is deterministic and bounded") {
  const std::vector<int> w = {10, 12, 18, 12, 6, 1};
  const auto a = init_model(w, adj(), 42);
  const auto b = init_model(w, adj(), 42);
  const auto c = init_model(w, adj(), 43);
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    CHECK(a.weights[k] == b.weights[k]);
    CHECK(a.weights[k].maxCoeff() <= std::sqrt(6.0 / (w[k] + w[k + 1])));
  }
  CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("raw propagation is the binary adjacency") {
  const auto g = propagation_matrix(adj(), Propagation::Raw);
  CHECK(g.nonZeros() == 92);
  const Eigen::MatrixXd d(g);
  CHECK(d.diagonal().isZero());
  CHECK(d(0, 1) == 1.0);
  CHECK(d(0, 38) == 1.0);
  const Eigen::MatrixXd n(propagation_matrix(adj(), Propagation::SymmetricNormalized));
  CHECK(n(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(n.isApprox(n.transpose()));
}

TEST_CASE("output reads only the monitored node") {
  auto m = init_model({10, 6, 2, 1}, adj(), 3);
  const auto x = random_input(5);
  const auto r = forward(m, x);
  CHECK(r.logit == r.layers.back()(14, 0));
  m.mask_node = 0;
  CHECK(forward(m, x).logit == r.layers.back()(0, 0));
}

TEST_CASE("bce values and clamping") {
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<double> y = {1.0, 0.0};
  CHECK(bce_loss(p, y) == doctest::Approx(std::log(2.0)));
  const std::vector<double> sure = {1.0};
  const std::vector<double> wrong = {0.0};
  CHECK(bce_loss(sure, wrong) == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(bce_loss(sure, wrong)));
}

TEST_CASE("analytic gradients agree with central differences") {
  auto m = init_model({10, 12, 18, 12, 6, 1}, adj(), 11);
  std::vector<Example> batch = {{random_input(1), 1.0}, {random_input(2), 0.0}, {random_input(3), 1.0}};
  const auto g = backward(m, batch);
  CHECK(g.loss == doctest::Approx(batch_loss(m, batch)).epsilon(1e-12));
  std::mt19937_64 rng(9);
  int checked = 0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    for (int rep = 0; rep < 6; ++rep) {
      const auto idx = static_cast<Eigen::Index>(rng() % m.weights[k].size());
      const double orig = m.weights[k].data()[idx];
      const double h = 1e-6;
      m.weights[k].data()[idx] = orig + h;
      const double up = batch_loss(m, batch);
      m.weights[k].data()[idx] = orig - h;
      const double dn = batch_loss(m, batch);
      m.weights[k].data()[idx] = orig;
      const double fd = (up - dn) / (2 * h);
      const double an = g.weights[k].data()[idx];
      CAPTURE(k);
      CAPTURE(idx);
      CHECK(std::abs(an - fd) <= 1e-4 * std::max({std::abs(an), std::abs(fd), 1e-6}));
      ++checked;
    }
  }
  CHECK(checked == 30);
}

TEST_CASE("duplicated samples do not change the mean gradient") {
  const auto m = init_model({10, 6, 2, 1}, adj(), 5);
  const std::vector<Example> one = {{random_input(4), 1.0}};
  const std::vector<Example> two = {one[0], one[0]};
  const auto a = backward(m, one);
  const auto b = backward(m, two);
  for (std::size_t k = 0; k < a.weights.size(); ++k) CHECK((a.weights[k] - b.weights[k]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero input zeroes every gradient") {
  const auto m = init_model({10, 12, 18, 12, 6, 1}, adj(), 5);
  const std::vector<Example> batch = {{FeatureMatrix::Zero(39, kFeatureCount), 1.0}};
  const auto g = backward(m, batch);
  for (const auto& w : g.weights) CHECK(w.isZero());
  CHECK(g.loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("adam first step moves by the learning rate") {
  std::vector<Eigen::MatrixXd> w = {Eigen::MatrixXd::Zero(2, 2)};
  std::vector<Eigen::MatrixXd> g = {Eigen::MatrixXd::Constant(2, 2, 3.0)};
  g[0](1, 1) = -0.5;
  Adam opt(w, 0.01, {});
  opt.step(w, g, {true});
  CHECK(w[0](0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(w[0](1, 1) == doctest::Approx(0.01).epsilon(1e-6));
  auto frozen = w;
  opt.step(frozen, g, {false});
  CHECK(frozen[0] == w[0]);
}

TEST_CASE("a short training run lowers the loss and is reproducible") {
  const auto& ds = fixtures::default_dataset();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e-3;
  auto a = init_model({10, 6, 2, 1}, adj(), 7);
  auto b = a;
  const auto ra = train(a, ds, cfg);
  const auto rb = train(b, ds, cfg);
  CHECK(ra.same_curves(rb));
  CHECK(ra.loss.size() == 3);
  CHECK(ra.optimizer_steps == 3 * ((832 + 7) / 8));
  CHECK(ra.loss.back() < ra.loss.front());
  for (std::size_t k = 0; k < a.weights.size(); ++k) CHECK(a.weights[k] == b.weights[k]);
}

TEST_CASE("frozen layers keep their weights") {
  const auto& ds = fixtures::default_dataset();
  TrainConfig cfg;
  cfg.epochs = 1;
  auto m = init_model({10, 6, 2, 1}, adj(), 7);
  const auto before = m.weights;
  const auto r = train_layers(m, ds, cfg, {false, false, true});
  CHECK(m.weights[0] == before[0]);
  CHECK(m.weights[1] == before[1]);
  CHECK(m.weights[2] != before[2]);
  CHECK(r.trainable_parameters == 2);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(validate_widths({9, 4, 1}), ValidationError);
  CHECK_THROWS_AS(validate_widths({10, 4, 2}), ValidationError);
  CHECK_THROWS_AS(validate_widths({10, 0, 1}), ValidationError);
  CHECK_NOTHROW(validate_widths({10, 1}));
  ModelOptions bad;
  bad.mask_bus = 40;
  CHECK_THROWS_AS(init_model({10, 1}, adj(), 1, bad), ValidationError);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
  cfg = TrainConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
}

TEST_CASE("accuracy threshold") {
  const std::vector<double> p = {0.5, 0.51, 0.2, 0.9};
  const std::vector<int> y = {0, 1, 1, 1};
  CHECK(accuracy_from_predictions(p, y) == doctest::Approx(0.75));
}
