#pragma once

#include <memory>
#include <optional>

#include "compensator.hpp"
#include "segmentation.hpp"

namespace rsu {

/// Everything one side of a two-frame reconstruction hands to the fusion.
struct SideInfo {
  EventSegment segment;  // oriented
  FlowField flow;
  LogChangeMap log_change;
  Frame candidate;
  Mask valid;  // warp valid or temporal branch unsaturated
};

struct MoaParams {
  double eta = 0.2;
  FlowParams flow;
  /// Overrides the default estimator built from `flow`.
  std::shared_ptr<const FlowEstimator> estimator;
  double lambda_len = 0.05;  // residual units per second of segment length
  /// Replaces the computed confidence everywhere when set.
  std::optional<double> forced_confidence;
};

SideInfo reconstruct_side(const Frame& frame, const EventStream& stream,
                          const TimeMap& frame_map, const TimeMap& dst,
                          double eta,
                          std::shared_ptr<const FlowEstimator> estimator = nullptr);

/// Confidence of side 1:
///   m = (r2 + lambda L2) / (r1 + r2 + lambda (L1 + L2) + eps)
/// with r_i the back-projection residual of candidate i against its own
/// source frame and L_i its segment length in seconds. Exact ties give 0.5.
/// Invalid side-1 pixels force 0 and invalid side-2 pixels force 1; where both
/// are invalid the formula stands.
Grid<double> moa_confidence(const SideInfo& s1, const SideInfo& s2,
                            const Frame& f1, const Frame& f2,
                            const EventStream& stream, double eta,
                            double lambda_len = 0.05);

struct MoaResult {
  Frame frame;
  Grid<double> confidence;
  SideInfo side1;
  SideInfo side2;
};

/// Confidence-weighted fusion of two sources transported to dst. This is the
/// general form used both for the GS reconstruction and for re-estimating RS
/// frames from a GS reference.
MoaResult fuse_two_sources(const Frame& f1, const TimeMap& map1,
                           const Frame& f2, const TimeMap& map2,
                           const EventStream& stream, const TimeMap& dst,
                           const MoaParams& params);

/// GS frame at dst from two consecutive RS frames (map1 must not start after
/// map2).
MoaResult selfunroll_m(const Frame& rs1, const Frame& rs2,
                       const EventStream& stream, const TimeMap& map1,
                       const TimeMap& map2, const TimeMap& dst,
                       const MoaParams& params);

}  // namespace rsu
