#pragma once

// Simulator-grounded scenes shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "scenes.hpp"
#include "simulator.hpp"
#include "types.hpp"

namespace rsu::testing {

struct Sequence {
  std::vector<std::int64_t> times;
  std::vector<Frame> frames;
  LogTrajectory trajectory;
  EventStream stream;

  Frame gt(const TimeMap& map) const { return sample_frame(trajectory, map); }
};

inline Sequence simulate_sequence(const Scene& scene, std::int64_t t0, std::int64_t dt,
                                  int samples, const SimConfig& cfg) {
  auto times = uniform_times(t0, dt, samples);
  auto frames = render_sequence(scene, times);
  LogTrajectory traj = build_trajectory(frames, times);
  EventStream stream = simulate_events(traj, cfg);
  return {std::move(times), std::move(frames), std::move(traj), std::move(stream)};
}

// 64x64 value-noise texture moving right by 0.25 px per 50 us sample.
// RS frame 1 reads out over [2000, 6000], frame 2 over [7000, 11000].
struct StandardScene {
  static constexpr int kSize = 64;
  static constexpr std::int64_t kDt = 50;
  static constexpr int kSamples = 241;
  static constexpr std::int64_t kReadout = 4000;
  static constexpr std::int64_t kT0 = 2000;
  static constexpr std::int64_t kGap = 1000;

  TranslatingTexture scene;
  Sequence seq;
  TimeMap rs1 = TimeMap::rolling(kT0, kReadout, kSize);
  TimeMap rs2 = TimeMap::rolling(kT0 + kReadout + kGap, kReadout, kSize);
  TimeMap mid = TimeMap::global(kT0 + kReadout / 2);

  explicit StandardScene(double eta = 0.2, std::uint64_t seed = 1)
      : scene(params(seed)), seq(simulate_sequence(scene, 0, kDt, kSamples, {eta, 0, 0.0, 0})) {}

  static TextureParams params(std::uint64_t seed) {
    TextureParams p;
    p.height = kSize;
    p.width = kSize;
    p.lo = 0.05;
    p.hi = 0.4;
    p.cell = 6.0;
    p.seed = seed;
    p.vx = 0.25 / static_cast<double>(kDt);
    return p;
  }
};

inline double masked_psnr(const Frame& a, const Frame& b, const Mask& mask) {
  double se = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (!mask(y, x)) continue;
      for (int c = 0; c < a.channels(); ++c) {
        const double d = a(y, x, c) - b(y, x, c);
        se += d * d;
        ++n;
      }
    }
  if (n == 0 || se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(n) / se);
}

}  // namespace rsu::testing
