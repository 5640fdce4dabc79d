#include "scenes.hpp"

#include <algorithm>
#include <cmath>

namespace rsu {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double smoothstep(double f) { return f * f * (3.0 - 2.0 * f); }

}  // namespace

ValueNoise::ValueNoise(std::uint64_t seed, double cell) : seed_(seed), cell_(cell) {
  if (!(cell > 0.0)) throw Error(ErrorCode::argument, "noise cell must be > 0");
}

double ValueNoise::lattice(std::int64_t i, std::int64_t j, std::uint64_t octave) const {
  const std::uint64_t h = mix(seed_ ^ mix(static_cast<std::uint64_t>(i) ^
                                          mix(static_cast<std::uint64_t>(j) + octave)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double ValueNoise::operator()(double x, double y) const {
  double total = 0.0;
  double amplitude = 1.0;
  double norm = 0.0;
  double cell = cell_;
  for (std::uint64_t octave = 0; octave < 2; ++octave) {
    const double u = x / cell;
    const double v = y / cell;
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const auto i = static_cast<std::int64_t>(fu);
    const auto j = static_cast<std::int64_t>(fv);
    const double su = smoothstep(u - fu);
    const double sv = smoothstep(v - fv);
    const double a = lattice(i, j, octave), b = lattice(i + 1, j, octave);
    const double c = lattice(i, j + 1, octave), d = lattice(i + 1, j + 1, octave);
    total += amplitude * ((a * (1 - su) + b * su) * (1 - sv) + (c * (1 - su) + d * su) * sv);
    norm += amplitude;
    amplitude *= 0.5;
    cell *= 0.5;
  }
  return total / norm;
}

TranslatingTexture::TranslatingTexture(TextureParams params)
    : p_(params), noise_(params.seed, params.cell) {
  if (p_.height < 1 || p_.width < 1) throw Error(ErrorCode::shape, "scene needs a positive size");
  if (!(p_.lo > 0.0) || !(p_.hi <= 1.0) || p_.lo > p_.hi)
    throw Error(ErrorCode::argument, "texture range must satisfy 0 < lo <= hi <= 1");
}

double TranslatingTexture::intensity(double t, double x, double y) const {
  const double u = x - p_.vx * t;
  const double v = y - p_.vy * t;
  double n = noise_(u, v);
  if (p_.margin > 0.0) {
    const double edge = std::min(u, static_cast<double>(p_.width - 1) - u);
    const double s = std::clamp((edge - p_.margin) / std::max(p_.ramp, 1e-9), 0.0, 1.0);
    n = 0.5 + smoothstep(s) * (n - 0.5);
  }
  return p_.lo + (p_.hi - p_.lo) * n;
}

OcclusionScene::OcclusionScene(OcclusionParams params)
    : p_(params), background_(params.background), bar_noise_(params.bar_seed, params.background.cell) {
  if (!(p_.bar_width > 0.0)) throw Error(ErrorCode::argument, "bar width must be > 0");
}

bool OcclusionScene::in_bar(double t, double x) const {
  const double left = p_.bar_x0 + p_.bar_vx * t;
  return x >= left && x < left + p_.bar_width;
}

double OcclusionScene::intensity(double t, double x, double y) const {
  if (in_bar(t, x)) {
    const double u = x - p_.bar_vx * t;
    return p_.bar_lo + (p_.bar_hi - p_.bar_lo) * bar_noise_(u, y);
  }
  return background_.intensity(t, x, y);
}

Frame render(const Scene& scene, double t) {
  Frame f(scene.height(), scene.width());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) f(y, x) = scene.intensity(t, x, y);
  return f;
}

Frame render(const Scene& scene, const TimeMap& map) {
  Frame f(scene.height(), scene.width());
  for (int y = 0; y < f.height(); ++y) {
    const double t = static_cast<double>(map.row_time(y));
    for (int x = 0; x < f.width(); ++x) f(y, x) = scene.intensity(t, x, y);
  }
  return f;
}

std::vector<Frame> render_sequence(const Scene& scene, std::span<const std::int64_t> times) {
  std::vector<Frame> frames;
  frames.reserve(times.size());
  for (std::int64_t t : times) frames.push_back(render(scene, static_cast<double>(t)));
  return frames;
}

std::vector<std::int64_t> uniform_times(std::int64_t t0, std::int64_t dt, int count) {
  if (count < 0 || dt <= 0) throw Error(ErrorCode::argument, "uniform_times needs dt > 0");
  std::vector<std::int64_t> times(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) times[i] = t0 + static_cast<std::int64_t>(i) * dt;
  return times;
}

}  // namespace rsu
