#include "pipeline.hpp"

namespace rsu {

const char* unroll_mode_name(UnrollMode mode) {
  switch (mode) {
    case UnrollMode::temporal: return "temporal";
    case UnrollMode::spatial: return "spatial";
    case UnrollMode::fused: return "fused";
    case UnrollMode::moa: return "moa";
  }
  return "unknown";
}

UnrollMode parse_unroll_mode(std::string_view name) {
  for (UnrollMode m : {UnrollMode::temporal, UnrollMode::spatial, UnrollMode::fused, UnrollMode::moa})
    if (name == unroll_mode_name(m)) return m;
  throw Error(ErrorCode::argument, "unknown mode `" + std::string(name) + "`");
}

namespace {

std::shared_ptr<const FlowEstimator> estimator_for(const MoaParams& params) {
  if (params.estimator) return params.estimator;
  return std::make_shared<PatchCorrelationFlow>(params.flow);
}

}  // namespace

Frame unroll(UnrollMode mode, const Frame& rs1, const TimeMap& map1,
             std::optional<SecondFrame> second, const EventStream& stream,
             const TimeMap& dst, const MoaParams& params) {
  if (mode == UnrollMode::moa) {
    if (!second) throw Error(ErrorCode::argument, "moa mode needs a second RS frame");
    return selfunroll_m(rs1, second->frame, stream, map1, second->map, dst, params).frame;
  }
  const auto kind = mode == UnrollMode::temporal  ? CompensatorKind::temporal
                    : mode == UnrollMode::spatial ? CompensatorKind::spatial
                                                  : CompensatorKind::fused;
  return make_compensator(kind, params.eta, estimator_for(params))
      ->apply(rs1, stream, map1, dst)
      .frame;
}

LossReport consistency_report(const Frame& rs1, const Frame& rs2,
                              const EventStream& stream, const TimeMap& map1,
                              const TimeMap& map2, const TimeMap& dst,
                              CompensatorKind eic, const MoaParams& params,
                              const LossWeights& weights) {
  const auto estimator = estimator_for(params);
  const auto compensator = make_compensator(eic, params.eta, estimator);
  const double lc = latent_consistency(rs1, rs2, stream, map1, map2, dst, *compensator);
  const double cc = 0.5 * (cycle_consistency(rs1, stream, map1, dst, *compensator) +
                           cycle_consistency(rs2, stream, map2, dst, *compensator));
  const double tc = temporal_consistency(rs1, rs2, stream, map1, map2, *compensator);
  const double tv = 0.5 * (tv_loss(estimator->estimate(stream, map1, dst)) +
                           tv_loss(estimator->estimate(stream, map2, dst)));
  MoaParams moa = params;
  moa.estimator = estimator;
  const double dcc = dual_cycle_consistency(rs1, rs2, stream, map1, map2, dst, moa);
  return total_loss(lc, cc, tc, tv, dcc, weights);
}

}  // namespace rsu
