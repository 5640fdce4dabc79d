#include "temporal.hpp"

#include <cmath>

namespace rsu {

void require_coverage(const EventStream& stream, const TimeMap& src,
                      const TimeMap& dst) {
  const int H = stream.geometry().height;
  if (!src.accepts_rows(H) || !dst.accepts_rows(H))
    throw Error(ErrorCode::shape, "time map rows do not match the event stream");
  for (const TimeMap* map : {&src, &dst}) {
    // row times are monotone, so the first and last rows bound the map
    for (int y : {0, H - 1}) {
      const std::int64_t t = map->row_time(y);
      if (!stream.covers(t))
        throw Error(ErrorCode::coverage,
                    "time " + std::to_string(t) + " us lies outside event coverage [" +
                        std::to_string(stream.t_min()) + ", " +
                        std::to_string(stream.t_max()) + "]");
    }
  }
}

LogChangeMap integrate_log_change(const EventSegment& oriented_segment,
                                  double eta) {
  if (!oriented_segment.oriented())
    throw Error(ErrorCode::argument, "log change needs an oriented segment");
  const Geometry g = oriented_segment.geometry;
  Grid<long> counts(g.height, g.width);
  for (const RowSlice& row : oriented_segment.rows)
    for (const Event& e : row.events) counts(e.y, e.x) += e.p;
  LogChangeMap out(g.height, g.width);
  for (size_t i = 0; i < out.size(); ++i)
    out.values()[i] = eta * static_cast<double>(counts.values()[i]);
  return out;
}

TemporalResult temporal_transition(const Frame& frame,
                                   const EventStream& stream,
                                   const TimeMap& src, const TimeMap& dst,
                                   double eta, bool clamp) {
  const Geometry g = stream.geometry();
  if (frame.height() != g.height || frame.width() != g.width)
    throw Error(ErrorCode::shape, "frame and event stream geometry differ");
  require_coverage(stream, src, dst);

  TemporalResult result;
  result.log_change = integrate_log_change(orient(segment(stream, src, dst)), eta);
  result.frame = frame;
  result.saturated = Mask(g.height, g.width);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const double gain = std::exp(result.log_change(y, x));
      for (int c = 0; c < frame.channels(); ++c) {
        double& v = result.frame(y, x, c);
        v *= gain;
        if (v < kMinIntensity || v > kMaxIntensity) {
          result.saturated(y, x) = 1;
          if (clamp) v = v < kMinIntensity ? kMinIntensity : kMaxIntensity;
        }
      }
    }
  return result;
}

}  // namespace rsu
