#pragma once

#include <optional>

#include "consistency.hpp"
#include "moa.hpp"

namespace rsu {

enum class UnrollMode { temporal, spatial, fused, moa };

const char* unroll_mode_name(UnrollMode mode);
UnrollMode parse_unroll_mode(std::string_view name);

struct SecondFrame {
  const Frame& frame;
  const TimeMap& map;
};

/// GS (or any target map) reconstruction from one RS frame, or from two with
/// UnrollMode::moa.
Frame unroll(UnrollMode mode, const Frame& rs1, const TimeMap& map1,
             std::optional<SecondFrame> second, const EventStream& stream,
             const TimeMap& dst, const MoaParams& params);

/// Every consistency term for a pair of RS frames. cc and tv are averaged over
/// the two frames; tv uses the estimator flow from each frame to dst.
LossReport consistency_report(const Frame& rs1, const Frame& rs2,
                              const EventStream& stream, const TimeMap& map1,
                              const TimeMap& map2, const TimeMap& dst,
                              CompensatorKind eic, const MoaParams& params,
                              const LossWeights& weights = kDefaultLossWeights);

}  // namespace rsu
