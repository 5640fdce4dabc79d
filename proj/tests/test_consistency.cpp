#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "consistency.hpp"
#include "fixtures.hpp"
#include "pipeline.hpp"
#include "test_util.hpp"

namespace rsu {
namespace {

using testing::make_stream;

class ZeroFlow final : public FlowEstimator {
 public:
  FlowField estimate(const EventStream& s, const TimeMap&, const TimeMap&) const override {
    return zero_flow(s.geometry().height, s.geometry().width);
  }
};

// Wraps the default estimator and shifts every dx by a constant.
class BiasedFlow final : public FlowEstimator {
 public:
  explicit BiasedFlow(double bias) : bias_(bias) {}
  FlowField estimate(const EventStream& s, const TimeMap& a, const TimeMap& b) const override {
    FlowField f = inner_.estimate(s, a, b);
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) f(y, x, 0) += bias_;
    return f;
  }

 private:
  PatchCorrelationFlow inner_;
  double bias_;
};

struct StaticScene {
  testing::Sequence seq;
  TimeMap m1 = TimeMap::rolling(1000, 2000, 32);
  TimeMap m2 = TimeMap::rolling(4000, 2000, 32);
  TimeMap dst = TimeMap::global(3500);
  StaticScene() : seq(make()) {}
  static testing::Sequence make() {
    TextureParams p;
    p.height = 32;
    p.width = 32;
    return testing::simulate_sequence(TranslatingTexture(p), 0, 500, 13, {0.2, 0, 0.0, 0});
  }
};

const testing::StandardScene& standard() {
  static const testing::StandardScene sc;
  return sc;
}

TEST(LatentConsistency, SameFrameSameMapIsZero) {
  const auto& sc = standard();
  const Frame rs = sc.seq.gt(sc.rs1);
  const TemporalCompensator eic(0.2);
  EXPECT_EQ(latent_consistency(rs, rs, sc.seq.stream, sc.rs1, sc.rs1, sc.mid, eic), 0.0);
}

TEST(LatentConsistency, BoundedForExactFramesAndWorseWhenShuffled) {
  const auto& sc = standard();
  const Frame rs1 = sc.seq.gt(sc.rs1), rs2 = sc.seq.gt(sc.rs2);
  const TemporalCompensator eic(0.2);
  const double lc = latent_consistency(rs1, rs2, sc.seq.stream, sc.rs1, sc.rs2, sc.mid, eic);
  EXPECT_LE(lc, std::exp(0.4) - 1.0);

  std::vector<Event> ev(sc.seq.stream.events().begin(), sc.seq.stream.events().end());
  std::vector<std::int64_t> times;
  for (const Event& e : ev) times.push_back(e.t);
  std::mt19937_64 rng(1);
  std::shuffle(times.begin(), times.end(), rng);
  for (size_t i = 0; i < ev.size(); ++i) ev[i].t = times[i];
  const auto shuffled = EventStream::from_unsorted(sc.seq.stream.geometry(), sc.seq.stream.t_min(),
                                                   sc.seq.stream.t_max(), ev);
  EXPECT_GT(latent_consistency(rs1, rs2, shuffled, sc.rs1, sc.rs2, sc.mid, eic), lc);
}

TEST(CycleConsistency, TemporalRoundTripIsExact) {
  const auto& sc = standard();
  const TemporalCompensator eic(0.2);
  EXPECT_LE(cycle_consistency(sc.seq.gt(sc.rs1), sc.seq.stream, sc.rs1, sc.mid, eic), 1e-6);
  EXPECT_LE(cycle_consistency(sc.seq.gt(sc.rs2), sc.seq.stream, sc.rs2, sc.mid, eic), 1e-6);
}

TEST(CycleConsistency, ZeroFlowSpatialIsZero) {
  const auto& sc = standard();
  const SpatialCompensator eic(std::make_shared<ZeroFlow>());
  EXPECT_EQ(cycle_consistency(sc.seq.gt(sc.rs1), sc.seq.stream, sc.rs1, sc.mid, eic), 0.0);
}

TEST(CycleConsistency, GrowsWithFlowCorruption) {
  const auto& sc = standard();
  const Frame rs = sc.seq.gt(sc.rs1);
  double previous = -1.0;
  for (double bias : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const SpatialCompensator eic(std::make_shared<BiasedFlow>(bias));
    const double cc = cycle_consistency(rs, sc.seq.stream, sc.rs1, sc.mid, eic);
    EXPECT_GT(cc, previous) << "bias " << bias;
    previous = cc;
  }
}

TEST(TemporalConsistency, StaticSceneIsZero) {
  const StaticScene st;
  const TemporalCompensator eic(0.2);
  ASSERT_EQ(st.seq.stream.size(), 0u);
  EXPECT_EQ(temporal_consistency(st.seq.gt(st.m1), st.seq.gt(st.m2), st.seq.stream, st.m1, st.m2,
                                 eic),
            0.0);
}

TEST(TemporalConsistency, BoundedSymmetricAndSensitiveToThreshold) {
  const auto& sc = standard();
  const Frame rs1 = sc.seq.gt(sc.rs1), rs2 = sc.seq.gt(sc.rs2);
  const TemporalCompensator eic(0.2);
  const double tc = temporal_consistency(rs1, rs2, sc.seq.stream, sc.rs1, sc.rs2, eic);
  EXPECT_LE(tc, 2.0 * (std::exp(0.2) - 1.0));
  EXPECT_EQ(temporal_consistency(rs2, rs1, sc.seq.stream, sc.rs2, sc.rs1, eic), tc);
  const TemporalCompensator wrong(0.4);
  EXPECT_GT(temporal_consistency(rs1, rs2, sc.seq.stream, sc.rs1, sc.rs2, wrong), tc);
}

TEST(TvLoss, KnownFields) {
  EXPECT_EQ(tv_loss(zero_flow(5, 7)), 0.0);
  FlowField c(5, 7, 2, 3.5);
  EXPECT_EQ(tv_loss(c), 0.0);
  FlowField ramp(6, 9, 2);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x) ramp(y, x, 0) = x;
  EXPECT_DOUBLE_EQ(tv_loss(ramp), 1.0);
}

TEST(TvLoss, CheckerboardMatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int H = 2 + static_cast<int>(rng() % 8), W = 2 + static_cast<int>(rng() % 8);
    FlowField f(H, W, 2);
    std::uniform_real_distribution<double> u(-2, 2);
    const double a = u(rng), b = u(rng);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        f(y, x, 0) = (x + y) % 2 ? a : -a;
        f(y, x, 1) = (x + y) % 2 ? b : 0.0;
      }
    // every neighbour pair differs by the full step in each band
    const double expect = 2 * std::abs(2 * a) + 2 * std::abs(b);
    EXPECT_NEAR(tv_loss(f), expect, 1e-12);
  }
}

TEST(TotalLoss, WeightsAndValidation) {
  const LossReport r = total_loss(1, 1, 1, 1, 5);
  EXPECT_DOUBLE_EQ(r.total, 3.01);
  EXPECT_EQ(r.dcc, 5.0);
  EXPECT_DOUBLE_EQ(total_loss(0.1, 0.2, 0.3, 0.4, 0, {2, 0, 1, 0.5}).total, 0.2 + 0.3 + 0.2);
  EXPECT_RSU_ERROR(total_loss(-0.1, 0, 0, 0, 0), argument);
  EXPECT_RSU_ERROR(total_loss(0, 0, 0, 0, std::nan("")), argument);
}

TEST(TotalLoss, ReportFormat) {
  const std::string text = format_report(total_loss(0.5, 0.25, 0, 2, 1));
  EXPECT_EQ(text,
            "lc=0.5\ncc=0.25\ntc=0\ntv=2\ndcc=1\ntotal=0.77\n"
            "lambda1=1\nlambda2=1\nlambda3=1\nlambda4=0.01\n");
}

TEST(DualCycleConsistency, StaticSceneIsZero) {
  const StaticScene st;
  MoaParams p;
  EXPECT_EQ(dual_cycle_consistency(st.seq.gt(st.m1), st.seq.gt(st.m2), st.seq.stream, st.m1, st.m2,
                                   st.dst, p),
            0.0);
}

TEST(DualCycleConsistency, BoundedOnExactFrames) {
  const auto& sc = standard();
  MoaParams p;
  const double dcc = dual_cycle_consistency(sc.seq.gt(sc.rs1), sc.seq.gt(sc.rs2), sc.seq.stream,
                                            sc.rs1, sc.rs2, TimeMap::global(6500), p);
  EXPECT_GE(dcc, 0.0);
  EXPECT_LE(dcc, 2.0 * (std::exp(0.4) - 1.0));
}

TEST(DualCycleConsistency, ForcedSingleSideIsWorseUnderOcclusion) {
  OcclusionParams op;
  op.background = testing::StandardScene::params(5);
  op.background.vx = 0.0;
  op.bar_x0 = 10.0;
  op.bar_width = 12.0;
  op.bar_vx = 0.005;
  const auto seq = testing::simulate_sequence(OcclusionScene(op), 0, 50, 145, {0.2, 0, 0.0, 0});
  const auto m1 = TimeMap::rolling(0, 3200, 64), m2 = TimeMap::rolling(4000, 3200, 64);
  const auto dst = TimeMap::global(3600);
  MoaParams p;
  const double learned = dual_cycle_consistency(seq.gt(m1), seq.gt(m2), seq.stream, m1, m2, dst, p);
  p.forced_confidence = 0.0;
  const double forced = dual_cycle_consistency(seq.gt(m1), seq.gt(m2), seq.stream, m1, m2, dst, p);
  EXPECT_GT(forced, learned);
}

TEST(ConsistencyReport, StaticSceneIsAllZero) {
  const StaticScene st;
  const auto r = consistency_report(st.seq.gt(st.m1), st.seq.gt(st.m2), st.seq.stream, st.m1,
                                    st.m2, st.dst, CompensatorKind::fused, MoaParams{});
  EXPECT_EQ(r.lc, 0.0);
  EXPECT_EQ(r.cc, 0.0);
  EXPECT_EQ(r.tc, 0.0);
  EXPECT_EQ(r.tv, 0.0);
  EXPECT_EQ(r.dcc, 0.0);
  EXPECT_EQ(r.total, 0.0);
}

TEST(ConsistencyReport, AveragesCycleOverBothFrames) {
  const auto& sc = standard();
  const Frame rs1 = sc.seq.gt(sc.rs1), rs2 = sc.seq.gt(sc.rs2);
  MoaParams p;
  const auto dst = TimeMap::global(6500);
  const auto r = consistency_report(rs1, rs2, sc.seq.stream, sc.rs1, sc.rs2, dst,
                                    CompensatorKind::spatial, p, {1, 2, 3, 4});
  const SpatialCompensator eic(std::make_shared<PatchCorrelationFlow>());
  const double c1 = cycle_consistency(rs1, sc.seq.stream, sc.rs1, dst, eic);
  const double c2 = cycle_consistency(rs2, sc.seq.stream, sc.rs2, dst, eic);
  EXPECT_DOUBLE_EQ(r.cc, 0.5 * (c1 + c2));
  EXPECT_DOUBLE_EQ(r.total, r.lc + 2 * r.cc + 3 * r.tc + 4 * r.tv);
}

}  // namespace
}  // namespace rsu
