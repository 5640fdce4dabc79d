#pragma once

#include <cstdint>
#include <span>

#include "types.hpp"

namespace rsu {

struct SimConfig {
  double eta = 0.2;                 // contrast threshold, log units
  std::int64_t refractory_us = 0;   // minimum gap between events of a pixel
  double noise = 0.0;               // std of per-crossing threshold jitter
  std::uint64_t seed = 0;
};

/// Log-luminance trajectory through GS frames at strictly increasing times.
/// Frames are normalized intensities; values below kMinIntensity are clamped.
LogTrajectory build_trajectory(std::span<const Frame> frames,
                               std::span<const std::int64_t> timestamps);

/// Samples the trajectory at each row's exposure time. A global map gives a
/// GS frame, a rolling map an RS frame.
Frame sample_frame(const LogTrajectory& trajectory, const TimeMap& map);

/// Level-crossing event generation on the luminance of the trajectory.
///
/// Each pixel quantizes its log-luminance on a lattice of spacing eta anchored
/// at its first sample. The pixel sits in cell [ref, ref + eta); reaching
/// ref + eta fires +1 and moves ref up by eta, dropping below ref fires -1 and
/// moves ref down by eta. Crossing times are interpolated on the linear
/// segments and floored to whole microseconds, so an event counts in the
/// half-open window [a, b) exactly when its crossing does. With noise = 0 and
/// no refractory period, eta times the signed count over any [a, b) differs
/// from log I(b) - log I(a) by less than eta.
///
/// Noise jitters both cell boundaries (clamped to +-0.45 eta) and is redrawn
/// after every event from a per-pixel generator seeded by cfg.seed.
EventStream simulate_events(const LogTrajectory& trajectory,
                            const SimConfig& cfg);

}  // namespace rsu
