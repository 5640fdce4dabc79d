#include "fusion.hpp"

#include <algorithm>
#include <cmath>

#include "temporal.hpp"

namespace rsu {

namespace {

Grid<double> box_filter(const Grid<double>& in, int radius) {
  const int H = in.height();
  const int W = in.width();
  Grid<double> out(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int yy = std::max(0, y - radius); yy <= std::min(H - 1, y + radius); ++yy)
        for (int xx = std::max(0, x - radius); xx <= std::min(W - 1, x + radius); ++xx) {
          sum += in(yy, xx);
          ++n;
        }
      out(y, x) = sum / n;
    }
  return out;
}

}  // namespace

Grid<double> back_projection_residual(const Frame& candidate,
                                      const Frame& source,
                                      const EventStream& stream,
                                      const TimeMap& src, const TimeMap& dst,
                                      double eta) {
  if (!candidate.same_shape(source))
    throw Error(ErrorCode::shape, "candidate and source differ in shape");
  const Frame back = temporal_transition(candidate, stream, dst, src, eta).frame;
  const Frame lb = luminance(back);
  const Frame ls = luminance(source);
  Grid<double> diff(source.height(), source.width());
  for (size_t i = 0; i < diff.size(); ++i)
    diff.values()[i] = std::abs(lb.values()[i] - ls.values()[i]);
  return box_filter(diff, 2);
}

FusionWeights fusion_weights(const WarpResult& spatial, const Frame& temporal,
                             const Frame& source, const EventStream& stream,
                             const TimeMap& src, const TimeMap& dst,
                             double eta) {
  if (!spatial.frame.same_shape(temporal))
    throw Error(ErrorCode::shape, "fusion candidates differ in shape");
  FusionWeights out;
  out.residual_s = back_projection_residual(spatial.frame, source, stream, src, dst, eta);
  out.residual_t = back_projection_residual(temporal, source, stream, src, dst, eta);
  out.w = Grid<double>(temporal.height(), temporal.width());
  for (int y = 0; y < temporal.height(); ++y)
    for (int x = 0; x < temporal.width(); ++x) {
      const double rs = out.residual_s(y, x);
      const double rt = out.residual_t(y, x);
      double w = rs == rt ? 0.5 : rt / (rs + rt + kResidualEpsilon);
      if (!spatial.valid(y, x)) w = 0.0;
      out.w(y, x) = std::clamp(w, 0.0, 1.0);
    }
  return out;
}

Frame fuse_st(const WarpResult& spatial, const Frame& temporal,
              const FusionWeights& weights) {
  if (!spatial.frame.same_shape(temporal) || !weights.w.same_plane(temporal))
    throw Error(ErrorCode::shape, "fusion inputs differ in shape");
  Frame out(temporal.height(), temporal.width(), temporal.channels());
  for (int y = 0; y < temporal.height(); ++y)
    for (int x = 0; x < temporal.width(); ++x) {
      const double w = spatial.valid(y, x) ? weights.w(y, x) : 0.0;
      for (int c = 0; c < temporal.channels(); ++c) {
        const double s = spatial.frame(y, x, c);
        const double t = temporal(y, x, c);
        // exact endpoints keep the result inside [min(s,t), max(s,t)]
        out(y, x, c) = w == 0.0 || s == t ? t : w == 1.0 ? s : w * s + (1.0 - w) * t;
      }
    }
  return out;
}

}  // namespace rsu
