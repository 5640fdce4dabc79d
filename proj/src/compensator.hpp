#pragma once

#include <memory>

#include "fusion.hpp"
#include "spatial.hpp"
#include "temporal.hpp"
#include "types.hpp"

namespace rsu {

enum class CompensatorKind { temporal, spatial, fused };

const char* compensator_name(CompensatorKind kind);

/// Output of one exposure-to-exposure transition. Branch-specific fields stay
/// empty when a compensator does not produce them.
struct Transition {
  Frame frame;
  Mask valid;              // pixels the compensator could fill from the source
  FlowField flow;          // spatial and fused
  LogChangeMap log_change; // temporal and fused
  Mask saturated;          // temporal and fused
};

/// Event-driven transition of a frame between two time maps.
class Compensator {
 public:
  virtual ~Compensator() = default;
  virtual Transition apply(const Frame& frame, const EventStream& stream,
                           const TimeMap& src, const TimeMap& dst) const = 0;
};

class TemporalCompensator final : public Compensator {
 public:
  explicit TemporalCompensator(double eta) : eta_(eta) {}
  Transition apply(const Frame& frame, const EventStream& stream,
                   const TimeMap& src, const TimeMap& dst) const override;

 private:
  double eta_;
};

class SpatialCompensator final : public Compensator {
 public:
  explicit SpatialCompensator(std::shared_ptr<const FlowEstimator> estimator);
  Transition apply(const Frame& frame, const EventStream& stream,
                   const TimeMap& src, const TimeMap& dst) const override;

 private:
  std::shared_ptr<const FlowEstimator> estimator_;
};

/// Spatial and temporal candidates blended by back-projection residuals.
class FusedCompensator final : public Compensator {
 public:
  FusedCompensator(double eta, std::shared_ptr<const FlowEstimator> estimator);
  Transition apply(const Frame& frame, const EventStream& stream,
                   const TimeMap& src, const TimeMap& dst) const override;

 private:
  double eta_;
  std::shared_ptr<const FlowEstimator> estimator_;
};

std::unique_ptr<Compensator> make_compensator(
    CompensatorKind kind, double eta,
    std::shared_ptr<const FlowEstimator> estimator = nullptr);

}  // namespace rsu
