#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "types.hpp"

namespace rsu {

/// Synthetic intensity field I(t, x, y) in [0, 1], t in microseconds.
class Scene {
 public:
  virtual ~Scene() = default;
  virtual int height() const = 0;
  virtual int width() const = 0;
  virtual double intensity(double t, double x, double y) const = 0;
};

/// Smooth lattice value noise in [0, 1]: two octaves, smoothstep blend.
class ValueNoise {
 public:
  ValueNoise(std::uint64_t seed, double cell);
  double operator()(double x, double y) const;

 private:
  double lattice(std::int64_t i, std::int64_t j, std::uint64_t octave) const;
  std::uint64_t seed_;
  double cell_;
};

struct TextureParams {
  int height = 64;
  int width = 64;
  double lo = 0.05;
  double hi = 0.4;
  double cell = 6.0;       // noise lattice spacing, px
  std::uint64_t seed = 1;
  double vx = 0.0;         // px per microsecond
  double vy = 0.0;
  double margin = 0.0;     // flat border in pattern coordinates, px
  double ramp = 4.0;       // width of the blend into the flat border
};

/// Value-noise texture translating rigidly at (vx, vy). With margin > 0 the
/// pattern fades to the flat mid level within `margin` px of its left and
/// right edges (measured in pattern coordinates).
class TranslatingTexture final : public Scene {
 public:
  explicit TranslatingTexture(TextureParams params);
  int height() const override { return p_.height; }
  int width() const override { return p_.width; }
  double intensity(double t, double x, double y) const override;
  const TextureParams& params() const noexcept { return p_; }

 private:
  TextureParams p_;
  ValueNoise noise_;
};

/// Static textured background with a vertical textured bar sliding over it.
struct OcclusionParams {
  TextureParams background;
  double bar_x0 = 8.0;        // left edge of the bar at t = 0, px
  double bar_width = 12.0;
  double bar_vx = 0.0;        // px per microsecond
  double bar_lo = 0.6;
  double bar_hi = 0.9;
  std::uint64_t bar_seed = 7;
};

class OcclusionScene final : public Scene {
 public:
  explicit OcclusionScene(OcclusionParams params);
  int height() const override { return p_.background.height; }
  int width() const override { return p_.background.width; }
  double intensity(double t, double x, double y) const override;
  /// Bar coverage of pixel column x at time t.
  bool in_bar(double t, double x) const;

 private:
  OcclusionParams p_;
  TranslatingTexture background_;
  ValueNoise bar_noise_;
};

/// Gray frame of the scene at a single instant.
Frame render(const Scene& scene, double t);
/// Gray frame whose row y is rendered at map.row_time(y).
Frame render(const Scene& scene, const TimeMap& map);
std::vector<Frame> render_sequence(const Scene& scene,
                                   std::span<const std::int64_t> times);
/// t0, t0 + dt, ..., `count` samples.
std::vector<std::int64_t> uniform_times(std::int64_t t0, std::int64_t dt,
                                        int count);

}  // namespace rsu
