#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gridfault/error.hpp"

using namespace gridfault;

TEST_CASE("dataset class counts and split") {
  const auto& ds = fixtures::default_dataset();
  CHECK(ds.positives() == 320);
  CHECK(ds.size() - ds.positives() == 927);
  CHECK(ds.size() == 1247);
  CHECK(ds.count(Split::Train) == 832);
  CHECK(ds.count(Split::Test) == 415);
  for (const auto& s : ds.samples) {
    CHECK(s.features.rows() == 39);
    CHECK(s.features.cols() == kFeatureCount);
  }
}

TEST_CASE("split assignment pattern") {
  const auto s = split_assignment(8);
  const Split want[] = {Split::Train, Split::Train, Split::Test, Split::Train,
                        Split::Train, Split::Test,  Split::Train, Split::Train};
  REQUIRE(s.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(s[i] == want[i]);
  CHECK(split_assignment(1247).back() == Split::Train);
}

TEST_CASE("samples are ordered by scenario then time") {
  const auto& ds = fixtures::default_dataset();
  const auto& sim = fixtures::default_simulation();
  const auto& first = ds.samples.front();
  CHECK(first.label == 1);
  CHECK(first.provenance.scenario == 0);
  CHECK(first.provenance.time_index == 10);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const auto& a = ds.samples[i - 1].provenance;
    const auto& b = ds.samples[i].provenance;
    CHECK((a.scenario < b.scenario || (a.scenario == b.scenario && a.time_index < b.time_index)));
  }
  for (const auto& s : ds.samples) {
    const auto& tr = sim.traces[s.provenance.scenario];
    CHECK(s.label == (tr.fault_on(s.provenance.time_index) ? 1 : 0));
    if (s.label == 0) CHECK(tr.fault.clearing == 0.74);
  }
  const auto& last = ds.samples.back();
  CHECK(last.label == 1);
  CHECK(last.provenance.scenario == 4);
  CHECK(last.provenance.time_index == 77);
  const auto& neg = ds.samples[ds.size() - 1 - 68 - 66];
  CHECK(neg.label == 0);
  CHECK(neg.provenance.time_index == 1000);
}

TEST_CASE("window statistics truncate at the series ends") {
  const auto& tr = fixtures::default_simulation().traces[2];
  const auto f0 = window_features(tr, 0, 5);
  double mean = 0.0;
  for (std::size_t t = 0; t < 3; ++t) mean += tr.vmag(t, 14);
  mean /= 3.0;
  CHECK(f0(14, kVmagMean) == doctest::Approx(mean).epsilon(1e-12));

  const auto fm = window_features(tr, 12, 5);
  double m = 0.0, v = 0.0;
  for (std::size_t t = 10; t <= 14; ++t) m += tr.vang(t, 3);
  m /= 5.0;
  for (std::size_t t = 10; t <= 14; ++t) v += (tr.vang(t, 3) - m) * (tr.vang(t, 3) - m);
  v /= 5.0;
  CHECK(fm(3, kVangMean) == doctest::Approx(m).epsilon(1e-12));
  CHECK(fm(3, kVangVar) == doctest::Approx(v).epsilon(1e-9));
  CHECK(fm(3, kVmag) == tr.vmag(12, 3));

  const auto fe = window_features(tr, 1000, 5);
  CHECK(fe(0, kVmagVar) >= 0.0);
}

TEST_CASE("machine columns are zero away from generator buses") {
  const auto& tr = fixtures::default_simulation().traces[0];
  const auto f = window_features(tr, 20, 5);
  for (int bus = 1; bus <= 29; ++bus) {
    CHECK(f(bus - 1, kExcitation) == 0.0);
    CHECK(f(bus - 1, kPowerAngle) == 0.0);
  }
  CHECK(f(38, kExcitation) == tr.emf(20, 9));
  CHECK(f(38, kPowerAngle) == tr.delta(20, 9));
}

TEST_CASE("window arguments are validated") {
  const auto& tr = fixtures::default_simulation().traces[0];
  CHECK_THROWS_AS(window_features(tr, 0, 4), Error);
  CHECK_THROWS_AS(window_features(tr, 1001, 5), Error);
}

TEST_CASE("standardizer centers training columns") {
  const auto& ds = fixtures::default_dataset();
  const auto st = Standardizer::fit(ds);
  REQUIRE(st.mean.size() == kFeatureCount);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kFeatureCount);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(kFeatureCount);
  double rows = 0;
  for (auto i : ds.indices(Split::Train)) {
    const auto z = st.apply(ds.samples[i].features);
    sum += z.colwise().sum().transpose();
    sq += z.array().square().colwise().sum().matrix().transpose();
    rows += z.rows();
  }
  for (int c = 0; c < kFeatureCount; ++c) {
    CAPTURE(c);
    CHECK(std::abs(sum[c] / rows) < 1e-9);
    CHECK(sq[c] / rows == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto id = Standardizer::identity(kFeatureCount);
  CHECK(id.apply(ds.samples[0].features) == ds.samples[0].features);
}

TEST_CASE("count mismatch is a hard error") {
  DatasetRecipe r;
  r.expected_positive = 321;
  CHECK_THROWS_AS(assemble_dataset(fixtures::default_simulation().traces, r), Error);
  r.expected_positive.reset();
  r.expected_negative.reset();
  r.negative_clearing = 0.75;
  CHECK_THROWS_AS(assemble_dataset(fixtures::default_simulation().traces, r), Error);
}
