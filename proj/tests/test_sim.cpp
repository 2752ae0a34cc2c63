#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "twopoint/analysis.hpp"
#include "twopoint/figures.hpp"
#include "twopoint/sim.hpp"

using namespace twopoint;

namespace {

Scenario lane_keep(double y0, double psi0) {
  Scenario sc;
  sc.kind = ScenarioKind::kLaneKeep;
  sc.track = ReferenceLine::straight({-10.0, 0.0}, 0.0, 60.0);
  sc.initial = {0.0, y0, psi0, 0.0};
  sc.params.k = 0.5;
  sc.params.lambda = 1.0;
  sc.params.lambda0 = 0.5;
  sc.duration = 10.0;
  return sc;
}

bool same_sample(const RunSample& a, const RunSample& b) {
  return a.t == b.t && a.state == b.state && a.control.u_applied == b.control.u_applied &&
         a.control.e == b.control.e && a.d_lateral == b.d_lateral &&
         a.d_lateral_rate == b.d_lateral_rate && a.kappa_e == b.kappa_e;
}

// Least-squares slope of log|x| against t.
double decay_rate(const std::vector<double>& t, const std::vector<double>& x) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double y = std::log(std::abs(x[i]));
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  return -(n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace

TEST(Run, EquilibriumStaysPut) {
  const auto rec = run(lane_keep(0.0, 0.0));
  ASSERT_TRUE(rec.ok());
  EXPECT_EQ(rec.samples.size(), 1001u);
  for (const auto& s : rec.samples) {
    EXPECT_EQ(s.d_lateral, 0.0);
    EXPECT_EQ(s.control.u_applied, 0.0);
  }
  EXPECT_EQ(rec.metrics.peak_abs_dtheta, 0.0);
  EXPECT_EQ(rec.metrics.final_lateral, 0.0);
  EXPECT_EQ(rec.metrics.lateral_rate_sign_changes, 0);
  EXPECT_EQ(rec.metrics.saturation_fraction, 0.0);
}

TEST(Run, UniformSampleTimes) {
  const auto rec = run(lane_keep(1.0, 0.0));
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    EXPECT_EQ(rec.samples[i].t, static_cast<double>(i * 10) * 1e-3);
  }
}

TEST(Run, Deterministic) {
  const auto sc = lane_change_scenario(1.0);
  const auto a = run(sc), b = run(sc);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_TRUE(same_sample(a.samples[i], b.samples[i])) << i;
  }
}

TEST(Run, SampleInvariants) {
  for (double k : figure_gains()) {
    const auto rec = run(lane_change_scenario(k));
    for (const auto& s : rec.samples) {
      EXPECT_NEAR(s.d_lateral_rate, -s.control.v * std::sin(s.control.delta_theta), 1e-6);
      EXPECT_LT(std::abs(s.control.along_track), 1e-6);
    }
  }
}

TEST(Run, LaneChangeConverges) {
  const auto slow = run(lane_change_scenario(0.5));
  const auto mid = run(lane_change_scenario(1.0));
  ASSERT_TRUE(slow.ok());
  ASSERT_TRUE(mid.ok());
  EXPECT_NEAR(slow.samples.front().control.e, -0.5 * 3.5, 1e-12);
  double prev = 0.0;
  for (const auto& s : slow.samples) {
    EXPECT_GE(-s.lateral_original, prev - 1e-12);
    prev = -s.lateral_original;
  }
  EXPECT_NEAR(-slow.metrics.final_lateral, 3.5, 0.02 * 3.5);
  EXPECT_NEAR(-mid.metrics.final_lateral, 3.5, 0.01 * 3.5);
}

TEST(Run, TrackEndFlagged) {
  auto sc = lane_keep(0.5, 0.0);
  sc.track = ReferenceLine::straight({-1.0, 0.0}, 0.0, 5.0);
  const auto rec = run(sc);
  EXPECT_EQ(rec.status, RunStatus::kTrackEnd);
  EXPECT_FALSE(rec.reason.empty());
  EXPECT_FALSE(rec.samples.empty());
}

TEST(Run, ManifoldAttractsUnsaturated) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(-1.0, 1.0), head(-0.3, 0.3), del(-0.2, 0.2);
  for (int i = 0; i < 100; ++i) {
    auto sc = lane_keep(off(rng), head(rng));
    sc.initial.delta = del(rng);
    sc.limits = {1.2, 1e6};
    sc.control_divisor = 1;
    sc.duration = 5.0;
    const auto rec = run(sc);
    ASSERT_TRUE(rec.ok()) << rec.reason;
    const double e0 = rec.samples.front().control.e;
    const double e1 = rec.samples.back().control.e;
    if (std::abs(e0) < 1e-3) continue;
    EXPECT_NEAR(std::log(std::abs(e0 / e1)) / 5.0, 1.0, 0.01);
  }
}

TEST(Run, ErrorDecaysFasterThanLateral) {
  auto sc = lane_keep(1.0, 0.0);
  sc.limits = {1.2, 1e6};
  sc.control_divisor = 1;
  sc.duration = 20.0;
  const auto rec = run(sc);
  std::vector<double> t, e, d;
  for (const auto& s : rec.samples) {
    if (s.t < 8.0) continue;
    t.push_back(s.t);
    e.push_back(s.control.e);
    d.push_back(s.d_lateral);
  }
  EXPECT_GT(decay_rate(t, e), decay_rate(t, d));
  EXPECT_NEAR(decay_rate(t, d), 0.5, 0.01);
}

TEST(Abort, AtStartNeverLeavesLane) {
  auto sc = lane_change_scenario(1.0);
  sc.abort_time = 0.0;
  const auto rec = run_abort(sc);
  ASSERT_TRUE(rec.ok());
  for (const auto& s : rec.samples) EXPECT_EQ(s.lateral_original, 0.0);
}

TEST(Abort, IdenticalBeforeAbortTime) {
  auto sc = lane_change_scenario(1.0);
  const auto plain = run(sc);
  sc.abort_time = 2.0;
  const auto ab = run_abort(sc);
  for (std::size_t i = 0; i < ab.samples.size() && ab.samples[i].t < 2.0; ++i) {
    ASSERT_TRUE(same_sample(plain.samples[i], ab.samples[i])) << i;
  }
  EXPECT_NEAR(ab.metrics.final_lateral, 0.0, 0.1);
}

TEST(Abort, RequiresAbortTime) {
  EXPECT_THROW(run_abort(lane_change_scenario(1.0)), ValidationError);
  auto sc = lane_change_scenario(1.0);
  sc.abort_time = 10.0;
  EXPECT_THROW(run_abort(sc), ValidationError);
}

TEST(Corner, OnePointFollowsArc) {
  const auto rec = run_corner(corner_scenario(0.0));
  ASSERT_TRUE(rec.ok());
  ASSERT_TRUE(rec.metrics.converged.value());
  EXPECT_NEAR(*rec.metrics.kappa_e / 0.01, 1.0, 0.01);
  EXPECT_LT(std::abs(*rec.metrics.steady_lateral), 1e-3);
}

TEST(Corner, TwoPointSteadyState) {
  const auto sc = corner_scenario(0.5);
  ASSERT_TRUE(check_corner_cutting(sc.params, 0.01).satisfied);
  const auto rec = run_corner(sc);
  ASSERT_TRUE(rec.ok());
  ASSERT_TRUE(rec.metrics.converged.value());
  const double d = *rec.metrics.steady_lateral;
  EXPECT_NEAR(d, predict_steady_lateral(sc.params, 0.01), 0.05 * std::abs(d));
  // The vehicle settles on a circle concentric with the arc, d further out.
  EXPECT_NEAR(*rec.metrics.kappa_e, 0.01 / (1.0 + d * 0.01), 1e-3 * 0.01);
}

TEST(Corner, NeedsArcTrack) {
  auto sc = corner_scenario(0.5);
  sc.track = ReferenceLine::straight({0, 0}, 0.0, 200.0);
  EXPECT_THROW(run_corner(sc), ValidationError);
}

TEST(Metrics, SignChangesAndSettling) {
  std::vector<MetricRow> rows;
  for (int i = 0; i <= 100; ++i) {
    MetricRow r;
    r.t = i * 0.1;
    r.lateral = std::exp(-r.t);
    r.lateral_rate = std::cos(r.t);
    rows.push_back(r);
  }
  const auto m = compute_metrics(rows, false);
  EXPECT_EQ(m.lateral_rate_sign_changes, 3);  // crossings at pi/2, 3pi/2, 5pi/2
  EXPECT_NEAR(m.settle_time, 4.7, 1e-9);     // first t with e^-t < 0.01
  EXPECT_TRUE(m.settled);
}

TEST(Metrics, DeadbandIgnoresNoise) {
  std::vector<MetricRow> rows(10);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].lateral_rate = (i % 2 ? 1 : -1) * 1e-8;
  EXPECT_EQ(compute_metrics(rows, false).lateral_rate_sign_changes, 0);
}

TEST(Sweep, SingletonMatchesRun) {
  const auto base = lane_change_scenario(0.5);
  const auto pts = sweep(base, {{"planner.k", {1.5}}}, 1);
  ASSERT_EQ(pts.size(), 1u);
  const auto rec = run(lane_change_scenario(1.5));
  EXPECT_EQ(pts[0].metrics.final_lateral, rec.metrics.final_lateral);
  EXPECT_EQ(pts[0].metrics.peak_abs_dtheta_dot, rec.metrics.peak_abs_dtheta_dot);
  EXPECT_EQ(pts[0].params.lambda0, 1.5);
}

TEST(Sweep, OrderIndependent) {
  const auto base = lane_change_scenario(0.5);
  const std::vector<SweepAxis> axes = {{"planner.k", {0.5, 1.0}}, {"planner.lambda", {1.0, 2.0}}};
  const auto a = sweep(base, axes, 1), b = sweep(base, axes, 3);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].coords, b[i].coords);
    EXPECT_EQ(a[i].metrics.final_lateral, b[i].metrics.final_lateral);
    EXPECT_EQ(a[i].metrics.settle_time, b[i].metrics.settle_time);
  }
  EXPECT_EQ(a[1].coords, (std::vector<double>{0.5, 2.0}));
}

TEST(Sweep, UnsaturatedRunsNeverOscillate) {
  auto base = lane_change_scenario(0.5);
  base.limits = {1.2, 1e6};
  std::vector<double> ks;
  for (int i = 1; i <= 10; ++i) ks.push_back(0.25 * i);
  const auto pts = sweep(base, {{"planner.k", ks}});
  for (const auto& p : pts) {
    ASSERT_EQ(p.status, RunStatus::kCompleted) << p.reason;
    EXPECT_EQ(p.metrics.lateral_rate_sign_changes, 0) << "k=" << p.coords[0];
  }
}

TEST(Sweep, AxisValidation) {
  const auto base = lane_change_scenario(0.5);
  EXPECT_THROW(sweep(base, {{"planner.k", {0.5, 0.5}}}), ValidationError);
  EXPECT_THROW(sweep(base, {{"planner.bogus", {0.5}}}), ValidationError);
  EXPECT_THROW(sweep(base, {{"planner.k", {}}}), ValidationError);
  EXPECT_THROW(sweep(base, {}), ValidationError);
  EXPECT_THROW(sweep(base, {{"planner.k", {0.5}}, {"planner.k", {1.0}}}), ValidationError);
}

TEST(Sweep, FailedPointRecorded) {
  const auto base = lane_change_scenario(0.5);
  const auto pts = sweep(base, {{"planner.lambda", {1.0, -1.0}}});
  EXPECT_EQ(pts[0].status, RunStatus::kCompleted);
  EXPECT_EQ(pts[1].status, RunStatus::kFailed);
  EXPECT_FALSE(pts[1].reason.empty());
}
