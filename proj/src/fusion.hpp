#pragma once

#include "spatial.hpp"
#include "types.hpp"

namespace rsu {

inline constexpr double kResidualEpsilon = 1e-6;

/// Transports `candidate` from dst back to src with events and returns the
/// 5x5 box-smoothed absolute luminance difference to `source`.
Grid<double> back_projection_residual(const Frame& candidate,
                                      const Frame& source,
                                      const EventStream& stream,
                                      const TimeMap& src, const TimeMap& dst,
                                      double eta);

struct FusionWeights {
  Grid<double> w;  // weight of the spatial candidate, in [0, 1]
  Grid<double> residual_s;
  Grid<double> residual_t;
};

/// w = r_t / (r_s + r_t + eps), 0.5 on exact ties, 0 where the warp is
/// invalid.
FusionWeights fusion_weights(const WarpResult& spatial, const Frame& temporal,
                             const Frame& source, const EventStream& stream,
                             const TimeMap& src, const TimeMap& dst,
                             double eta);

Frame fuse_st(const WarpResult& spatial, const Frame& temporal,
              const FusionWeights& weights);

}  // namespace rsu
