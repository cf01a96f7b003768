#include "privsub/adversary.hpp"

#include <gtest/gtest.h>

#include "privsub/async_engine.hpp"
#include "privsub/discoverability.hpp"
#include "privsub/random.hpp"
#include "privsub/sync_engine.hpp"

namespace privsub {
namespace {

GTEST_TEST(Probe, Sequences) {
  EXPECT_EQ(probe_sequence(2), (std::vector<double>{0, 1, 1}));
  EXPECT_EQ(probe_sequence(3), (std::vector<double>{0, 0, 1, 1, 1}));
  EXPECT_EQ(probe_sequence(4), (std::vector<double>{0, 0, 0, 1, 1, 1, 1}));
  EXPECT_THROW(probe_sequence(1), DomainError);
  EXPECT_EQ(windowed_probe(3, 2), (std::vector<double>{0, 0, 1, 1, 1, 0, 0, 1, 1, 1}));
  EXPECT_EQ(windowed_probe(4, 1), probe_sequence(4));
  EXPECT_EQ(probe_time(3, 1, 2), 7);
  EXPECT_EQ(windowed_probe(3, 2)[7], 1.0);
}

Eigen::MatrixXd example_weights() {
  Eigen::MatrixXd m(3, 3);
  m << .5, .2, .3, .2, .4, .4, .3, .4, .3;
  return m;
}

NetworkProblem consensus_problem(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x0) {
  NetworkProblem net;
  net.weights = w;
  net.initial = x0;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    net.objectives.push_back(ObjectiveSpec::constant(0, static_cast<int>(x0.cols())));
  return net;
}

VisibleTrace probe_consensus(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x0, long windows = 1) {
  const int n = static_cast<int>(w.rows());
  const auto u = windowed_probe(n, windows);
  return run_sync({consensus_problem(w, x0)}, static_cast<long>(u.size()),
                  scalar_inputs(u, static_cast<int>(x0.cols())))
      .visible;
}

GTEST_TEST(AssembleYZ, ShapesAndIdentity) {
  const auto w = example_weights();
  Eigen::MatrixXd x0(3, 1);
  x0 << 0.4, -1.0, 0.0;
  const auto t = probe_consensus(w, x0);
  const auto data = assemble_window(t, 0, 0);
  EXPECT_EQ(data.Y.rows(), 3);
  EXPECT_EQ(data.Y.cols(), 6);
  EXPECT_EQ(data.Z.rows(), 2);
  EXPECT_EQ(data.Z.cols(), 6);
  const auto p = partition(w, 2);
  EXPECT_LT((p.stacked() * data.Y - data.Z).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(assemble_window(t, 1, 0), DomainError);
}

GTEST_TEST(RecoverAdjacency, FullSpanConsensus) {
  const auto w = example_weights();
  Eigen::MatrixXd x0(3, 1);
  x0 << 0.4, -1.0, 0.0;
  const auto t = probe_consensus(w, x0);
  const auto data = assemble_window(t, 0, 0);
  const auto rec = recover_adjacency(data.Y, data.Z);
  EXPECT_LT((rec.stacked() - partition(w, 2).stacked()).norm(), 1e-10);
  EXPECT_GT(rec.conditioning, 0.0);
  const auto rep = attack_consensus(t);
  ASSERT_TRUE(rep.recovered());
  EXPECT_LT((*rep.final_estimate - partition(w, 2).stacked()).norm(), 1e-10);
}

GTEST_TEST(RecoverAdjacency, NonDiscoverableInstanceIsSingular) {
  Eigen::MatrixXd w(3, 3);
  w << .5, .2, .3, .3, .4, .3, .2, .4, .4;
  Eigen::MatrixXd x0(3, 1);
  x0 << 1, 1, 0;
  const auto t = probe_consensus(w, x0);
  const auto data = assemble_window(t, 0, 0);
  EXPECT_THROW(recover_adjacency(data.Y, data.Z), SingularDataError);
  const auto rep = attack_consensus(t);
  EXPECT_FALSE(rep.recovered());
  ASSERT_EQ(rep.windows.size(), 1u);
  EXPECT_TRUE(rep.windows[0].singular);
}

GTEST_TEST(RecoverAdjacency, SyntheticRoundTrip) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 5));
    Eigen::MatrixXd Y(n, 2 * n), W(n - 1, n);
    for (auto& v : Y.reshaped()) v = uniform(rng, -1, 1);
    for (auto& v : W.reshaped()) v = uniform(rng, 0, 1);
    const auto rec = recover_adjacency(Y, W * Y);
    ASSERT_LT((rec.stacked() - W).norm(), 1e-10);
  }
  EXPECT_THROW(recover_adjacency(Eigen::MatrixXd::Ones(3, 6), Eigen::MatrixXd::Ones(2, 6)), SingularDataError);
}

GTEST_TEST(RecoverAdjacency, RandomFullSpanInstances) {
  Rng rng(100);
  int done = 0;
  while (done < 100) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 3));
    const auto w = random_doubly_stochastic(n, rng);
    Eigen::MatrixXd x0(n, 1);
    for (auto& v : x0.reshaped()) v = uniform(rng, -1, 1);
    const auto p = partition(w, n - 1);
    if (!discoverability_span_rank(p, x0.topRows(n - 1).col(0)).discoverable) continue;
    const auto rep = attack_consensus(probe_consensus(w, x0));
    ASSERT_TRUE(rep.recovered());
    ASSERT_LT((*rep.final_estimate - p.stacked()).norm(), 1e-8);
    ++done;
  }
}

struct SyncAttackFixture {
  Eigen::MatrixXd weights = example_weights();
  Trace trace;
  StepsizeSchedule stepsize = StepsizeSchedule::harmonic();

  explicit SyncAttackFixture(long windows) {
    NetworkProblem net;
    net.weights = weights;
    net.initial.resize(3, 1);
    net.initial << 1.0, -0.5, 0.0;
    net.objectives = {ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, 0.3)),
                      ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, 0.7)),
                      ObjectiveSpec::constant(0, 1)};
    const auto u = windowed_probe(3, windows);
    trace = run_sync({net, stepsize}, static_cast<long>(u.size()), scalar_inputs(u, 1));
  }
};

GTEST_TEST(ExtractSubgradients, ExactAdjacencyInvertsTheUpdate) {
  SyncAttackFixture f(20);
  const auto truth = partition(f.weights, 2).stacked();
  const auto d = extract_subgradients(f.trace.visible, truth, f.stepsize);
  ASSERT_EQ(d.size(), f.trace.oracle.subgradients.size());
  for (std::size_t k = 0; k < d.size(); ++k) ASSERT_LT((d[k] - f.trace.oracle.subgradients[k]).cwiseAbs().maxCoeff(), 1e-10);
}

GTEST_TEST(ExtractSubgradients, ScalarUnitCase) {
  VisibleTrace t;
  t.agents = {0};
  t.states = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 0.5)};
  t.inputs = {Eigen::VectorXd::Constant(1, 1.0)};
  Eigen::MatrixXd w(1, 2);
  w << .5, .5;
  // Predicted 1.5, observed 0.5, alpha 1: d = 1.
  const auto d = extract_subgradients(t, w, StepsizeSchedule::constant(1.0));
  EXPECT_EQ(d[0](0, 0), 1.0);
}

GTEST_TEST(AttackDssoa, ReportsWindowsAndErrors) {
  SyncAttackFixture f(40);
  auto rep = attack_dssoa(f.trace.visible, {3, 40}, f.stepsize);
  ASSERT_TRUE(rep.recovered());
  EXPECT_EQ(rep.windows.size(), 40u);
  EXPECT_EQ(rep.final_window, 39);
  score_report(rep, partition(f.weights, 2).stacked(), f.trace.oracle.subgradients);
  ASSERT_TRUE(rep.errors.has_value());
  EXPECT_EQ(rep.errors->window_errors.size(), 40u);
  EXPECT_EQ(rep.errors->subgradient_errors.rows(), f.trace.visible.horizon());
  EXPECT_LT(rep.errors->window_errors.back(), rep.errors->window_errors[4]);
}

GTEST_TEST(AttackDssoa, Deterministic) {
  SyncAttackFixture a(10), b(10);
  const auto ra = attack_dssoa(a.trace.visible, {3, 10}, a.stepsize);
  const auto rb = attack_dssoa(b.trace.visible, {3, 10}, b.stepsize);
  ASSERT_TRUE(ra.final_estimate && rb.final_estimate);
  EXPECT_EQ(*ra.final_estimate, *rb.final_estimate);
  ASSERT_EQ(ra.subgradient_estimates.size(), rb.subgradient_estimates.size());
  for (std::size_t k = 0; k < ra.subgradient_estimates.size(); ++k)
    EXPECT_EQ(ra.subgradient_estimates[k], rb.subgradient_estimates[k]);
}

Trace async_probe_trace(long windows, std::vector<UpdateSchedule> schedules) {
  AsyncProblem p{{}, std::move(schedules), ProjectionSet::interval(-10, 10), std::nullopt};
  p.network.weights = example_weights();
  p.network.initial.resize(3, 1);
  p.network.initial << 1.0, -0.5, 0.0;
  p.network.objectives = {ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, 0.3)),
                          ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, 0.7)),
                          ObjectiveSpec::constant(0, 1)};
  const auto u = windowed_probe(3, windows);
  return run_async(p, static_cast<long>(u.size()), scalar_inputs(u, 1));
}

GTEST_TEST(AttackAsync, NonUpdateTimesLookLikeZeroSubgradients) {
  const auto t = async_probe_trace(
      4, {UpdateSchedule::periodic(0, 2), UpdateSchedule::periodic(1, 3), UpdateSchedule::periodic(0, 1)});
  const auto truth = partition(example_weights(), 2).stacked();
  const auto d = extract_subgradients(t.visible, truth, StepsizeSchedule::harmonic());
  int checked = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      if (t.oracle.update_flags[k][static_cast<std::size_t>(i)]) continue;
      ASSERT_LT(std::abs(d[k](i, 0)), 1e-12);
      const double err = std::abs(d[k](i, 0) - t.oracle.subgradients[k](i, 0));
      ASSERT_NEAR(err, std::abs(t.oracle.subgradients[k](i, 0)), 1e-12);
      if (t.oracle.subgradients[k](i, 0) != 0.0) ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

GTEST_TEST(AttackAsync, UpdateTimesAreScaledByTheUnknownCounter) {
  const auto t = async_probe_trace(
      4, {UpdateSchedule::periodic(0, 2), UpdateSchedule::periodic(1, 3), UpdateSchedule::periodic(0, 1)});
  const auto truth = partition(example_weights(), 2).stacked();
  const auto assumed = StepsizeSchedule::harmonic();
  const auto d = extract_subgradients(t.visible, truth, assumed);
  int checked = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      if (!t.oracle.update_flags[k][static_cast<std::size_t>(i)]) continue;
      const double di = t.oracle.subgradients[k](i, 0);
      if (di == 0.0) continue;
      // Inside X the recovered quantity is d/r divided by the assumed stepsize.
      const double r = static_cast<double>(t.oracle.counters[k][static_cast<std::size_t>(i)]);
      const double ratio = d[k](i, 0) / di;
      ASSERT_NEAR(ratio, (1.0 / r) / assumed.at(static_cast<long>(k)), 1e-9);
      // Only the first step has the assumed stepsize right.
      if (k >= 2) {
        ASSERT_GT(std::abs(1.0 - ratio), 0.4);
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

}  // namespace
}  // namespace privsub
