#include "moa.hpp"

#include <algorithm>

namespace rsu {

SideInfo reconstruct_side(const Frame& frame, const EventStream& stream,
                          const TimeMap& frame_map, const TimeMap& dst,
                          double eta,
                          std::shared_ptr<const FlowEstimator> estimator) {
  const FusedCompensator compensator(eta, std::move(estimator));
  Transition t = compensator.apply(frame, stream, frame_map, dst);
  SideInfo side;
  side.segment = orient(segment(stream, frame_map, dst));
  side.flow = std::move(t.flow);
  side.log_change = std::move(t.log_change);
  side.candidate = std::move(t.frame);
  side.valid = std::move(t.valid);
  return side;
}

Grid<double> moa_confidence(const SideInfo& s1, const SideInfo& s2,
                            const Frame& f1, const Frame& f2,
                            const EventStream& stream, double eta,
                            double lambda_len) {
  if (!s1.candidate.same_shape(s2.candidate) || !f1.same_shape(s1.candidate) ||
      !f2.same_shape(s2.candidate))
    throw Error(ErrorCode::shape, "confidence inputs differ in shape");
  const Grid<double> r1 = back_projection_residual(
      s1.candidate, f1, stream, s1.segment.source, s1.segment.target, eta);
  const Grid<double> r2 = back_projection_residual(
      s2.candidate, f2, stream, s2.segment.source, s2.segment.target, eta);
  const int H = f1.height();
  const int W = f1.width();
  Grid<double> m(H, W);
  for (int y = 0; y < H; ++y) {
    const double len1 = 1e-6 * static_cast<double>(s1.segment.rows[y].length());
    const double len2 = 1e-6 * static_cast<double>(s2.segment.rows[y].length());
    for (int x = 0; x < W; ++x) {
      const double a = r1(y, x) + lambda_len * len1;
      const double b = r2(y, x) + lambda_len * len2;
      double v = a == b ? 0.5 : b / (a + b + kResidualEpsilon);
      const bool bad1 = !s1.valid(y, x);
      const bool bad2 = !s2.valid(y, x);
      if (bad1 && !bad2) v = 0.0;
      else if (bad2 && !bad1) v = 1.0;
      m(y, x) = std::clamp(v, 0.0, 1.0);
    }
  }
  return m;
}

MoaResult fuse_two_sources(const Frame& f1, const TimeMap& map1,
                           const Frame& f2, const TimeMap& map2,
                           const EventStream& stream, const TimeMap& dst,
                           const MoaParams& params) {
  if (!f1.same_shape(f2))
    throw Error(ErrorCode::shape, "source frames differ in shape");
  std::shared_ptr<const FlowEstimator> estimator = params.estimator;
  if (!estimator) estimator = std::make_shared<PatchCorrelationFlow>(params.flow);

  MoaResult out;
  out.side1 = reconstruct_side(f1, stream, map1, dst, params.eta, estimator);
  out.side2 = reconstruct_side(f2, stream, map2, dst, params.eta, estimator);

  if (params.forced_confidence) {
    out.confidence = Grid<double>(f1.height(), f1.width(), 1,
                                  std::clamp(*params.forced_confidence, 0.0, 1.0));
  } else {
    out.confidence = moa_confidence(out.side1, out.side2, f1, f2, stream,
                                    params.eta, params.lambda_len);
  }

  const Frame& c1 = out.side1.candidate;
  const Frame& c2 = out.side2.candidate;
  out.frame = Frame(c1.height(), c1.width(), c1.channels());
  for (int y = 0; y < c1.height(); ++y)
    for (int x = 0; x < c1.width(); ++x) {
      const double m = out.confidence(y, x);
      for (int c = 0; c < c1.channels(); ++c) {
        const double a = c1(y, x, c);
        const double b = c2(y, x, c);
        out.frame(y, x, c) = a == b ? a : m * a + (1.0 - m) * b;
      }
    }
  return out;
}

MoaResult selfunroll_m(const Frame& rs1, const Frame& rs2,
                       const EventStream& stream, const TimeMap& map1,
                       const TimeMap& map2, const TimeMap& dst,
                       const MoaParams& params) {
  if (map1.row_time(0) > map2.row_time(0))
    throw Error(ErrorCode::order, "first RS frame must not start after the second");
  return fuse_two_sources(rs1, map1, rs2, map2, stream, dst, params);
}

}  // namespace rsu
