#pragma once

#include "segmentation.hpp"
#include "types.hpp"

namespace rsu {

/// eta times the signed event count per pixel.
using LogChangeMap = Grid<double>;

/// Throws ErrorCode::coverage unless every row exposure of both maps lies in
/// the stream's [t_min, t_max].
void require_coverage(const EventStream& stream, const TimeMap& src,
                      const TimeMap& dst);

LogChangeMap integrate_log_change(const EventSegment& oriented_segment,
                                  double eta);

struct TemporalResult {
  Frame frame;
  Mask saturated;  // 1 where the output was clamped
  LogChangeMap log_change;
};

/// Brightness transport from src to dst: every pixel is multiplied by
/// exp(log change); color channels share the luminance multiplier. With
/// clamp = false the raw product is returned and `saturated` marks what
/// clamping would have touched.
TemporalResult temporal_transition(const Frame& frame,
                                   const EventStream& stream,
                                   const TimeMap& src, const TimeMap& dst,
                                   double eta, bool clamp = true);

}  // namespace rsu
