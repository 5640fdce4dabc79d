#pragma once

#include <array>
#include <string>

#include "compensator.hpp"
#include "moa.hpp"

namespace rsu {

// Self-supervised consistency losses, evaluated (not trained). Every loss is a
// mean absolute difference over the pixels and channels valid on both sides.

double latent_consistency(const Frame& rs1, const Frame& rs2,
                          const EventStream& stream, const TimeMap& map1,
                          const TimeMap& map2, const TimeMap& dst,
                          const Compensator& eic);

/// RS -> dst -> RS round trip against the input.
double cycle_consistency(const Frame& rs, const EventStream& stream,
                         const TimeMap& rs_map, const TimeMap& dst,
                         const Compensator& eic);

/// mean |eic(rs1: map1 -> map2) - rs2| + mean |eic(rs2: map2 -> map1) - rs1|
double temporal_consistency(const Frame& rs1, const Frame& rs2,
                            const EventStream& stream, const TimeMap& map1,
                            const TimeMap& map2, const Compensator& eic);

/// Sum over both flow bands of mean |forward x-difference| + mean |forward
/// y-difference|, each mean taken over the interior differences (a replicated
/// border contributes nothing).
double tv_loss(const FlowField& flow);

/// Reconstructs the GS frame at dst from both RS frames, then re-estimates
/// each RS frame from that GS frame and the other RS frame:
///   rs1~ = fuse((gs, dst), (rs2, map2) -> map1)
///   rs2~ = fuse((gs, dst), (rs1, map1) -> map2)
/// and returns mean |rs1~ - rs1| + mean |rs2~ - rs2|.
double dual_cycle_consistency(const Frame& rs1, const Frame& rs2,
                              const EventStream& stream, const TimeMap& map1,
                              const TimeMap& map2, const TimeMap& dst,
                              const MoaParams& params);

using LossWeights = std::array<double, 4>;
inline constexpr LossWeights kDefaultLossWeights{1.0, 1.0, 1.0, 0.01};

struct LossReport {
  double lc = 0, cc = 0, tc = 0, tv = 0, dcc = 0;
  double total = 0;
  LossWeights weights = kDefaultLossWeights;
};

/// total = w1 lc + w2 cc + w3 tc + w4 tv; dcc is reported alongside.
LossReport total_loss(double lc, double cc, double tc, double tv, double dcc,
                      const LossWeights& weights = kDefaultLossWeights);

/// One `name=value` line per field, 9 significant digits.
std::string format_report(const LossReport& report);

/// `%.9g` with inf/nan spelled out the same on every platform.
std::string format_number(double value);

}  // namespace rsu
