#include "compensator.hpp"

namespace rsu {

const char* compensator_name(CompensatorKind kind) {
  switch (kind) {
    case CompensatorKind::temporal: return "temporal";
    case CompensatorKind::spatial: return "spatial";
    case CompensatorKind::fused: return "fused";
  }
  return "unknown";
}

Transition TemporalCompensator::apply(const Frame& frame,
                                      const EventStream& stream,
                                      const TimeMap& src,
                                      const TimeMap& dst) const {
  TemporalResult r = temporal_transition(frame, stream, src, dst, eta_);
  Transition out;
  out.frame = std::move(r.frame);
  // Clamped pixels no longer carry the transported brightness.
  out.valid = Mask(frame.height(), frame.width());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) out.valid(y, x) = !r.saturated(y, x);
  out.log_change = std::move(r.log_change);
  out.saturated = std::move(r.saturated);
  return out;
}

SpatialCompensator::SpatialCompensator(
    std::shared_ptr<const FlowEstimator> estimator)
    : estimator_(std::move(estimator)) {
  if (!estimator_) estimator_ = std::make_shared<PatchCorrelationFlow>();
}

Transition SpatialCompensator::apply(const Frame& frame,
                                     const EventStream& stream,
                                     const TimeMap& src,
                                     const TimeMap& dst) const {
  const Geometry g = stream.geometry();
  if (frame.height() != g.height || frame.width() != g.width)
    throw Error(ErrorCode::shape, "frame and event stream geometry differ");
  Transition out;
  out.flow = estimator_->estimate(stream, src, dst);
  WarpResult warped = warp_backward(frame, out.flow);
  out.frame = std::move(warped.frame);
  out.valid = std::move(warped.valid);
  return out;
}

FusedCompensator::FusedCompensator(
    double eta, std::shared_ptr<const FlowEstimator> estimator)
    : eta_(eta), estimator_(std::move(estimator)) {
  if (!estimator_) estimator_ = std::make_shared<PatchCorrelationFlow>();
}

Transition FusedCompensator::apply(const Frame& frame,
                                   const EventStream& stream,
                                   const TimeMap& src,
                                   const TimeMap& dst) const {
  TemporalResult temporal = temporal_transition(frame, stream, src, dst, eta_);
  Transition out;
  out.flow = estimator_->estimate(stream, src, dst);
  const WarpResult spatial = warp_backward(frame, out.flow);
  const FusionWeights weights =
      fusion_weights(spatial, temporal.frame, frame, stream, src, dst, eta_);
  out.frame = fuse_st(spatial, temporal.frame, weights);
  out.valid = Mask(frame.height(), frame.width());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x)
      out.valid(y, x) = spatial.valid(y, x) || !temporal.saturated(y, x);
  out.log_change = std::move(temporal.log_change);
  out.saturated = std::move(temporal.saturated);
  return out;
}

std::unique_ptr<Compensator> make_compensator(
    CompensatorKind kind, double eta,
    std::shared_ptr<const FlowEstimator> estimator) {
  switch (kind) {
    case CompensatorKind::temporal:
      return std::make_unique<TemporalCompensator>(eta);
    case CompensatorKind::spatial:
      return std::make_unique<SpatialCompensator>(std::move(estimator));
    case CompensatorKind::fused:
      return std::make_unique<FusedCompensator>(eta, std::move(estimator));
  }
  throw Error(ErrorCode::argument, "unknown compensator kind");
}

}  // namespace rsu
