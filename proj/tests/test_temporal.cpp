#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "temporal.hpp"
#include "test_util.hpp"

namespace rsu {
namespace {

using testing::constant_frame;
using testing::make_stream;

EventStream random_stream(int h, int w, std::int64_t t_max, size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Event> ev;
  for (size_t i = 0; i < n; ++i)
    ev.push_back({static_cast<std::int64_t>(rng() % (t_max + 1)),
                  static_cast<std::uint16_t>(rng() % w), static_cast<std::uint16_t>(rng() % h),
                  static_cast<std::int8_t>(rng() % 2 ? 1 : -1)});
  return make_stream(h, w, 0, t_max, std::move(ev));
}

Frame random_frame(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Frame f(h, w, c);
  for (double& v : f.values()) v = u(rng);
  return f;
}

LogChangeMap change(const EventStream& s, const TimeMap& a, const TimeMap& b, double eta) {
  return integrate_log_change(orient(segment(s, a, b)), eta);
}

TEST(IntegrateLogChange, EmptySegmentIsZero) {
  const auto s = random_stream(4, 4, 1000, 200, 1);
  const auto m = TimeMap::rolling(0, 800, 4);
  const auto zero = change(s, m, m, 0.2);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
}

TEST(IntegrateLogChange, SignedCountTimesEta) {
  const auto s = make_stream(1, 2, 0, 100, {{10, 0, 0, 1}, {20, 0, 0, 1}, {30, 0, 0, -1}});
  const auto m = change(s, TimeMap::global(0), TimeMap::global(100), 0.2);
  EXPECT_NEAR(m(0, 0), 0.2, 1e-15);
  EXPECT_EQ(m(0, 1), 0.0);
}

TEST(IntegrateLogChange, RequiresOrientedSegment) {
  const auto s = make_stream(1, 1, 0, 100, {{10, 0, 0, 1}});
  EXPECT_RSU_ERROR(integrate_log_change(segment(s, TimeMap::global(50), TimeMap::global(0)), 0.2),
                   argument);
}

TEST(IntegrateLogChangeProperty, ForwardAndBackwardCancel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_stream(8, 8, 10000, 2000, seed);
    const auto a = TimeMap::rolling(500 + 100 * seed, 6000, 8);
    const auto b = TimeMap::global(4000);
    const auto f = change(s, a, b, 0.2), r = change(s, b, a, 0.2);
    for (size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.values()[i] + r.values()[i], 0.0);
  }
}

TEST(IntegrateLogChangeProperty, ComposesAcrossIntermediateMaps) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_stream(8, 8, 20000, 3000, 50 + trial);
    auto pick = [&] {
      if (rng() % 2) return TimeMap::global(static_cast<std::int64_t>(rng() % 20001));
      return TimeMap::rolling(static_cast<std::int64_t>(rng() % 10000), 1 + rng() % 10000, 8);
    };
    const auto a = pick(), b = pick(), c = pick();
    const auto ab = change(s, a, b, 1.0), bc = change(s, b, c, 1.0), ac = change(s, a, c, 1.0);
    for (size_t i = 0; i < ac.size(); ++i)
      ASSERT_EQ(ab.values()[i] + bc.values()[i], ac.values()[i]);
  }
}

TEST(TemporalTransition, NoEventsLeavesFrameUnchanged) {
  const Frame f = random_frame(4, 4, 1, 2);
  const auto s = make_stream(4, 4, 0, 1000, {});
  const auto r = temporal_transition(f, s, TimeMap::rolling(0, 800, 4), TimeMap::global(500), 0.2);
  EXPECT_EQ(r.frame, f);
}

TEST(TemporalTransition, ThreePositiveEvents) {
  const auto s = make_stream(1, 1, 0, 100, {{1, 0, 0, 1}, {2, 0, 0, 1}, {3, 0, 0, 1}});
  const auto r = temporal_transition(constant_frame(1, 1, 0.3), s, TimeMap::global(0),
                                     TimeMap::global(100), 0.2);
  EXPECT_NEAR(r.frame(0, 0) / 0.3, 1.8221, 1e-4);
  EXPECT_NEAR(r.frame(0, 0), 0.3 * std::exp(0.6), 1e-15);
  EXPECT_EQ(r.saturated(0, 0), 0);
}

TEST(TemporalTransition, ClampsAndFlagsSaturation) {
  const auto s = make_stream(1, 2, 0, 100, {{1, 0, 0, 1}, {2, 0, 0, 1}, {3, 1, 0, -1}});
  Frame f(1, 2);
  f(0, 0) = 0.9;
  f(0, 1) = 1.05e-4;
  const auto r = temporal_transition(f, s, TimeMap::global(0), TimeMap::global(100), 1.0);
  EXPECT_EQ(r.frame(0, 0), 1.0);
  EXPECT_EQ(r.frame(0, 1), kMinIntensity);
  EXPECT_EQ(r.saturated(0, 0), 1);
  EXPECT_EQ(r.saturated(0, 1), 1);
  const auto raw = temporal_transition(f, s, TimeMap::global(0), TimeMap::global(100), 1.0, false);
  EXPECT_NEAR(raw.frame(0, 0), 0.9 * std::exp(2.0), 1e-12);
  EXPECT_EQ(raw.saturated(0, 0), 1);
}

TEST(TemporalTransition, ColorSharesOneMultiplier) {
  const Frame f = random_frame(6, 6, 3, 3);
  const auto s = random_stream(6, 6, 1000, 200, 3);
  const auto r = temporal_transition(f, s, TimeMap::rolling(0, 600, 6), TimeMap::global(900), 0.05,
                                     false);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      const double g = r.frame(y, x, 0) / f(y, x, 0);
      EXPECT_NEAR(r.frame(y, x, 1) / f(y, x, 1), g, 1e-12);
      EXPECT_NEAR(r.frame(y, x, 2) / f(y, x, 2), g, 1e-12);
      EXPECT_NEAR(g, std::exp(r.log_change(y, x)), 1e-12);
    }
}

TEST(TemporalTransition, CoverageIsEnforced) {
  const auto s = make_stream(4, 4, 1000, 5000, {});
  const Frame f = constant_frame(4, 4, 0.5);
  EXPECT_RSU_ERROR(temporal_transition(f, s, TimeMap::global(999), TimeMap::global(2000), 0.2),
                   coverage);
  EXPECT_RSU_ERROR(
      temporal_transition(f, s, TimeMap::rolling(3000, 4000, 4), TimeMap::global(2000), 0.2),
      coverage);
  EXPECT_NO_THROW(
      temporal_transition(f, s, TimeMap::rolling(1000, 4000, 4), TimeMap::global(5000), 0.2));
  EXPECT_RSU_ERROR(temporal_transition(constant_frame(4, 5, 0.5), s, TimeMap::global(1000),
                                       TimeMap::global(2000), 0.2),
                   shape);
}

TEST(TemporalTransitionProperty, InvolutionWithoutClamping) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Frame f = random_frame(8, 8, 1, seed);
    const auto s = random_stream(8, 8, 10000, 2000, seed + 7);
    const auto a = TimeMap::rolling(1000, 8000, 8), b = TimeMap::global(2000 + 700 * seed);
    const auto there = temporal_transition(f, s, a, b, 0.2, false);
    const auto back = temporal_transition(there.frame, s, b, a, 0.2, false);
    for (size_t i = 0; i < f.size(); ++i)
      EXPECT_NEAR(back.frame.values()[i], f.values()[i], 1e-12 * f.values()[i]);
  }
}

TEST(TemporalTransitionProperty, ExtraPositiveEventScalesByExpEta) {
  std::vector<Event> ev{{100, 1, 1, -1}, {300, 2, 1, 1}};
  const auto src = TimeMap::global(0), dst = TimeMap::global(1000);
  const Frame f = random_frame(3, 3, 1, 9);
  const auto base = temporal_transition(f, make_stream(3, 3, 0, 1000, ev), src, dst, 0.1, false);
  ev.push_back({500, 1, 1, 1});
  const auto more = temporal_transition(f, make_stream(3, 3, 0, 1000, ev), src, dst, 0.1, false);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) {
      const double ratio = more.frame(y, x) / base.frame(y, x);
      EXPECT_NEAR(ratio, (y == 1 && x == 1) ? std::exp(0.1) : 1.0, 1e-12);
    }
}

TEST(TemporalTransitionProperty, SimulatedSceneWithinOneThreshold) {
  const testing::StandardScene sc;
  const Frame rs = sc.seq.gt(sc.rs1);
  const Frame gt = sc.seq.gt(sc.mid);
  const auto r = temporal_transition(rs, sc.seq.stream, sc.rs1, sc.mid, 0.2, false);
  for (size_t i = 0; i < gt.size(); ++i)
    ASSERT_LT(std::abs(std::log(r.frame.values()[i]) - std::log(gt.values()[i])), 0.2);
}

}  // namespace
}  // namespace rsu
