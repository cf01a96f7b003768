#include "privsub/async_engine.hpp"

#include <gtest/gtest.h>

#include "privsub/random.hpp"
#include "privsub/sync_engine.hpp"

namespace privsub {
namespace {

GTEST_TEST(UpdateTime, Examples) {
  const auto s = UpdateSchedule::periodic(0, 2);
  const auto at4 = is_update_time(s, 4);
  EXPECT_TRUE(at4.flag);
  EXPECT_EQ(at4.index, 3);
  EXPECT_FALSE(is_update_time(s, 3).flag);
  EXPECT_FALSE(is_update_time(s, 3).index.has_value());

  const auto list = UpdateSchedule::explicit_times({1, 5});
  EXPECT_EQ(is_update_time(list, 5).index, 2);
  EXPECT_FALSE(is_update_time(list, 4).flag);
  EXPECT_THROW(UpdateSchedule::explicit_times({3, 3}), DomainError);
}

// Brute-force count of update times in [begin, end).
long count_by_scan(const UpdateSchedule& s, long begin, long end) {
  long c = 0;
  for (long k = begin; k < end; ++k) c += is_update_time(s, k).flag ? 1 : 0;
  return c;
}

GTEST_TEST(UpdateRegularity, Examples) {
  const std::vector<UpdateSchedule> twos(3, UpdateSchedule::periodic(0, 2));
  const auto a = verify_update_regularity(twos, 2);
  EXPECT_TRUE(a.holds);
  EXPECT_EQ(a.updates_per_window, (std::vector<long>{1, 1, 1}));

  const std::vector<UpdateSchedule> once{UpdateSchedule::explicit_times({0})};
  EXPECT_FALSE(verify_update_regularity(once, 2).holds);

  const std::vector<UpdateSchedule> mixed{UpdateSchedule::periodic(0, 2), UpdateSchedule::periodic(1, 3)};
  EXPECT_EQ(default_window(mixed), 6);
  const auto b = verify_update_regularity(mixed, 6);
  EXPECT_TRUE(b.holds);
  EXPECT_EQ(b.updates_per_window, (std::vector<long>{count_by_scan(mixed[0], 0, 6), count_by_scan(mixed[1], 0, 6)}));
  EXPECT_EQ(b.updates_per_window, (std::vector<long>{3, 2}));
}

GTEST_TEST(UpdateRegularity, PeriodicVerdictMatchesScan) {
  for (long period = 1; period <= 6; ++period) {
    for (long offset = 0; offset < 8; ++offset) {
      for (long window = 1; window <= 12; ++window) {
        const std::vector<UpdateSchedule> s{UpdateSchedule::periodic(offset, period)};
        const long first = count_by_scan(s[0], 0, window);
        bool scan = first > 0;
        for (long r = 1; r < 40 && scan; ++r) scan = count_by_scan(s[0], r * window, (r + 1) * window) == first;
        EXPECT_EQ(verify_update_regularity(s, window).holds, scan)
            << "offset " << offset << " period " << period << " window " << window;
      }
    }
  }
}

GTEST_TEST(UpdateRegularity, ExplicitListsAreCheckedOverTheHorizon) {
  std::vector<long> times;
  for (long k = 0; k < 100; k += 3) times.push_back(k);
  const std::vector<UpdateSchedule> s{UpdateSchedule::explicit_times(times)};
  // Updates stop after k=99, so windows beyond that are empty.
  EXPECT_TRUE(verify_update_regularity(s, 3, 60).holds);
  const auto late = verify_update_regularity(s, 3, 300);
  EXPECT_FALSE(late.holds);
  EXPECT_EQ(late.validated_horizon, 300);
}

std::vector<ObjectiveSpec> abs_specs(std::initializer_list<double> centers) {
  std::vector<ObjectiveSpec> out;
  for (double c : centers) out.push_back(ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, c)));
  return out;
}

GTEST_TEST(AsyncStep, Examples) {
  Eigen::MatrixXd w(2, 2);
  w << .5, .5, .5, .5;
  AsyncState st;
  st.k = 1;
  st.estimates = Eigen::Vector2d(1, 3);
  st.counters = {0, 1};
  // Agent 1 waits until k=2; agent 2 updated at k=0 and updates again at k=1.
  const std::vector<UpdateSchedule> sched{UpdateSchedule::periodic(2, 5), UpdateSchedule::periodic(0, 1)};
  const auto specs = abs_specs({0, 10});
  const auto set = ProjectionSet::interval(-10, 10);
  const auto s = async_step(w, st, sched, specs, set);
  EXPECT_EQ(s.next.estimates(0, 0), 2.0);
  EXPECT_EQ(s.next.estimates(1, 0), 2.0 - 0.5 * -1.0);
  EXPECT_EQ(s.flags, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.next.counters, (std::vector<long>{0, 2}));
  EXPECT_EQ(s.omega(0, 0), 0.0);
  EXPECT_EQ(s.omega(1, 0), 0.5);

  // r=1 with a - d inside X.
  AsyncState first{0, Eigen::Vector2d(1, 3), {0, 0}};
  const std::vector<UpdateSchedule> now(2, UpdateSchedule::periodic(0, 1));
  const auto f = async_step(w, first, now, specs, set);
  EXPECT_EQ(f.next.estimates(0, 0), 2.0 - 1.0);
  EXPECT_EQ(f.next.estimates(1, 0), 2.0 + 1.0);

  // a - d/r outside the box gets clamped.
  const auto tight = ProjectionSet::interval(1.5, 2.5);
  const auto c = async_step(w, first, now, specs, tight);
  EXPECT_EQ(c.next.estimates(0, 0), 1.5);
  EXPECT_EQ(c.next.estimates(1, 0), 2.5);
  EXPECT_EQ(c.omega(0, 0), -0.5);

  const std::vector<UpdateSchedule> one(1, UpdateSchedule::periodic(0, 1));
  EXPECT_THROW(async_step(w, first, one, specs, set), ConfigurationError);
}

NetworkProblem ring_problem(int n) {
  NetworkProblem net;
  net.weights = build_metropolis_weights(NetworkGraph::ring(n));
  net.initial.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    net.objectives.push_back(ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, i + 1.0)));
    net.initial(i, 0) = i + 1.0;
  }
  return net;
}

AsyncProblem periodic_problem(std::vector<long> periods, double half_width = 10) {
  AsyncProblem p{ring_problem(static_cast<int>(periods.size())), {},
                 ProjectionSet::interval(-half_width, half_width), std::nullopt};
  for (long period : periods) p.schedules.push_back(UpdateSchedule::periodic(0, period));
  return p;
}

GTEST_TEST(RunAsync, StaysInsideTheSetAndBoundsOmega) {
  auto p = periodic_problem({1, 2, 3, 2, 1});
  p.set = ProjectionSet::interval(2.0, 3.5);
  p.network.initial(0, 0) = -4;  // projected at k=0
  const long K = 600;
  const auto t = run_async(p, K);
  EXPECT_EQ(t.visible.states[0](0, 0), 2.0);
  for (const auto& x : t.visible.states) ASSERT_TRUE((x.array() >= 2.0).all() && (x.array() <= 3.5).all());
  const auto reg = verify_update_regularity(p.schedules, 6);
  const long tmin = *std::min_element(reg.updates_per_window.begin(), reg.updates_per_window.end());
  const double L = subgradient_bound(p.network.objectives, std::nullopt);
  for (long k = 6; k < K; ++k) {
    const long s = k / 6;
    ASSERT_LE(t.oracle.omega[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff(),
              L / static_cast<double>(tmin * s) + 1e-15);
  }
}

GTEST_TEST(RunAsync, DriftIdentity) {
  // x_i(k+1) = sum_j a_ij x_j(k) + omega_i(k) whenever averages stay inside X.
  const auto p = periodic_problem({1, 2, 3, 2, 1});
  const auto t = run_async(p, 300);
  for (long k = 0; k < 300; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Eigen::MatrixXd expected = p.network.weights * t.visible.states[i] + t.oracle.omega[i];
    ASSERT_LT((expected - t.visible.states[i + 1]).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t a = 0; a < 5; ++a) {
      const bool flag = t.oracle.update_flags[i][a] == 1;
      ASSERT_EQ(flag, is_update_time(p.schedules[a], k).flag);
      if (!flag) {
        ASSERT_EQ(t.oracle.omega[i](static_cast<Eigen::Index>(a), 0), 0.0);
      }
    }
  }
}

GTEST_TEST(RunAsync, UnitPeriodsMatchSyncHarmonic) {
  const auto p = periodic_problem({1, 1, 1, 1, 1}, 100);
  const auto a = run_async(p, 100);
  const auto s = run_sync({p.network, StepsizeSchedule::harmonic()}, 100);
  for (std::size_t k = 0; k < a.visible.states.size(); ++k)
    ASSERT_LT((a.visible.states[k] - s.visible.states[k]).cwiseAbs().maxCoeff(), 1e-12);
}

GTEST_TEST(RunAsync, Rejections) {
  auto never = periodic_problem({1, 2, 3, 2, 1});
  never.schedules[2] = UpdateSchedule::explicit_times({});
  never.window = 6;
  EXPECT_THROW(run_async(never, 10), ConfigurationError);

  auto misfit = periodic_problem({1, 2, 3, 2, 1});
  misfit.window = 4;
  EXPECT_THROW(run_async(misfit, 10), ConfigurationError);

  auto narrow = periodic_problem({1, 2, 3, 2, 1});
  narrow.set = ProjectionSet::interval(-1, 1);
  EXPECT_THROW(run_async(narrow, 10), ConfigurationError);

  const auto zero = run_async(periodic_problem({1, 2}), 0);
  EXPECT_EQ(zero.visible.states.size(), 1u);
}

}  // namespace
}  // namespace privsub
