#pragma once

#include "types.hpp"

namespace rsu {

/// Backward flow: channel 0 is dx, channel 1 is dy. The target pixel x takes
/// its value from source position x + flow(x).
using FlowField = Grid<double>;

FlowField zero_flow(int height, int width);

struct WarpResult {
  Frame frame;
  Mask valid;  // 1 where the bilinear footprint lies inside the source
};

/// Bilinear gather of frame at x + flow(x). Out-of-bounds samples are flagged
/// invalid and filled with the clamp-to-edge sample.
WarpResult warp_backward(const Frame& frame, const FlowField& flow);

struct FlowParams {
  int levels = 3;
  int patch = 16;
  int radius = 8;
  int min_events = 8;  // per patch and half-window for a usable match
};

/// Any per-pixel motion estimator between two exposures.
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual FlowField estimate(const EventStream& stream, const TimeMap& src,
                             const TimeMap& dst) const = 0;
};

/// Coarse-to-fine patch correlation between event-count images.
///
/// Each row's window is split at its midpoint; events of the earlier half
/// build count image A, the later half image B (polarity ignored). Both are
/// box-blurred and matched patch-wise by normalized cross-correlation with a
/// parabolic sub-pixel peak. A match d (B(x) ~ A(x + d)) covers half of each
/// window, so a patch yields the rate q = 2 d / L, L being the event-weighted
/// mean window length of the patch. The rate field is interpolated to pixels,
/// median-filtered (3x3), and scaled by the signed per-row duration
/// dst(y) - src(y); rows with zero-length windows therefore get zero flow.
class PatchCorrelationFlow final : public FlowEstimator {
 public:
  explicit PatchCorrelationFlow(FlowParams params = {});
  FlowField estimate(const EventStream& stream, const TimeMap& src,
                     const TimeMap& dst) const override;
  const FlowParams& params() const noexcept { return params_; }

 private:
  FlowParams params_;
};

FlowField estimate_flow(const EventStream& stream, const TimeMap& src,
                        const TimeMap& dst, const FlowParams& params = {});

}  // namespace rsu
