#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "gridfault/pretrain.hpp"

using namespace gridfault;

namespace {
const Adjacency& adj() { return fixtures::default_simulation().adjacency; }
}  // namespace

TEST_CASE("link split holds out ceil(10%) of the edges") {
  const auto s = sample_link_prediction_pairs(adj());
  CHECK(s.pruned.edge_count() == 41);
  CHECK(s.samples.size() == 10);
  CHECK(is_connected(s.pruned));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < s.samples.size(); ++k) {
    const auto& p = s.samples[k];
    CAPTURE(k);
    CHECK(p.i != p.j);
    CHECK(seen.insert({std::min(p.i, p.j), std::max(p.i, p.j)}).second);
    if (k < 5) {
      CHECK(p.label == 1);
      CHECK(adj().connected(p.i, p.j));
      CHECK_FALSE(s.pruned.connected(p.i, p.j));
    } else {
      CHECK(p.label == 0);
      CHECK_FALSE(adj().connected(p.i, p.j));
    }
  }
}

TEST_CASE("link split is seeded") {
  const auto a = sample_link_prediction_pairs(adj());
  const auto b = sample_link_prediction_pairs(adj());
  CHECK(a.samples == b.samples);
  CHECK(a.pruned == b.pruned);
  LinkSplitOptions o;
  o.seed = 8;
  CHECK(sample_link_prediction_pairs(adj(), o).samples != a.samples);
  o.negative_ratio = 3;
  CHECK(sample_link_prediction_pairs(adj(), o).samples.size() == 20);
}

TEST_CASE("ranking auc") {
  CHECK(ranking_auc({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(ranking_auc({0.1, 0.2, 0.9, 0.8}, {1, 1, 0, 0}) == 0.0);
  CHECK(ranking_auc({0.5, 0.5}, {1, 0}) == 0.5);
  CHECK(ranking_auc({0.9, 0.3, 0.5}, {1, 1, 0}) == 0.5);
}

TEST_CASE("structural features") {
  const auto x = structural_features(adj());
  REQUIRE(x.rows() == 39);
  REQUIRE(x.cols() == kFeatureCount);
  CHECK(x.col(1).isOnes());
  CHECK(x.col(0).maxCoeff() == doctest::Approx(1.0));
  for (int c = 2; c < x.cols(); ++c) {
    CAPTURE(c);
    CHECK(x.col(c).norm() == doctest::Approx(1.0).epsilon(1e-9));
    Eigen::Index at = 0;
    x.col(c).cwiseAbs().maxCoeff(&at);
    CHECK(x(at, c) > 0.0);
  }
}

TEST_CASE("zero trunk scores every pair one half") {
  std::vector<Eigen::MatrixXd> w = {Eigen::MatrixXd::Zero(10, 12), Eigen::MatrixXd::Zero(12, 6)};
  const auto g = propagation_matrix(adj(), Propagation::Raw);
  const auto h = trunk_embeddings(g, w, structural_features(adj()));
  CHECK(h.rows() == 39);
  CHECK(h.cols() == 6);
  CHECK(link_score(h, 0, 5) == 0.5);
  const auto h2 = trunk_embeddings(g, glorot_weights({10, 12, 6}, 3), structural_features(adj()));
  CHECK(link_score(h2, 3, 17) == link_score(h2, 17, 3));
}

TEST_CASE("pretraining on the default split learns the held-out edges") {
  const auto split = sample_link_prediction_pairs(adj());
  const auto t = pretrain_link_prediction({10, 12, 18, 12, 6}, split, adj());
  CHECK(t.loss.size() == 200);
  CHECK(t.loss.back() < t.loss.front());
  CHECK(t.embedding_width() == 6);
  CHECK(t.holdout_auc > 0.55);
  const auto again = pretrain_link_prediction({10, 12, 18, 12, 6}, split, adj());
  CHECK(again.loss == t.loss);
}

TEST_CASE("fine-tuning attaches a fresh head and respects freezing") {
  const auto& ds = fixtures::default_dataset();
  const auto split = sample_link_prediction_pairs(adj());
  PretrainConfig pc;
  pc.epochs = 5;
  const auto t = pretrain_link_prediction({10, 6, 2}, split, adj(), pc);
  TrainConfig cfg;
  cfg.epochs = 1;
  FinetuneOptions frozen;
  frozen.freeze_trunk = true;
  const auto f = finetune_downstream(t, ds, adj(), cfg, frozen);
  CHECK(f.model.widths == std::vector<int>{10, 6, 2, 1});
  CHECK(f.model.weights[0] == t.weights[0]);
  CHECK(f.model.weights[1] == t.weights[1]);
  CHECK(f.report.trainable_parameters == 2);
  const auto u = finetune_downstream(t, ds, adj(), cfg);
  CHECK(u.report.trainable_parameters == 74);
  CHECK(u.model.weights[0] != t.weights[0]);
}
