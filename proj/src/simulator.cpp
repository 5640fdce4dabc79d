#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rsu {

LogTrajectory build_trajectory(std::span<const Frame> frames,
                               std::span<const std::int64_t> timestamps) {
  if (frames.size() < 2)
    throw Error(ErrorCode::argument, "trajectory needs at least two frames");
  if (frames.size() != timestamps.size())
    throw Error(ErrorCode::argument, "one timestamp per frame is required");
  for (size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_shape(frames[0]))
      throw Error(ErrorCode::shape, "frames differ in geometry");
    if (timestamps[i] <= timestamps[i - 1])
      throw Error(ErrorCode::order, "frame timestamps must strictly increase");
  }
  std::vector<Frame> logs;
  logs.reserve(frames.size());
  for (const Frame& f : frames) logs.push_back(safe_log(f));
  return LogTrajectory({timestamps.begin(), timestamps.end()}, std::move(logs));
}

Frame sample_frame(const LogTrajectory& trajectory, const TimeMap& map) {
  const int H = trajectory.height();
  const int W = trajectory.width();
  const int C = trajectory.channels();
  if (!map.accepts_rows(H))
    throw Error(ErrorCode::shape, "time map rows do not match trajectory height");
  const auto times = trajectory.timestamps();
  const auto logs = trajectory.log_frames();
  Frame out(H, W, C);
  for (int y = 0; y < H; ++y) {
    const std::int64_t t = map.row_time(y);
    if (t < times.front() || t > times.back())
      throw Error(ErrorCode::range, "row " + std::to_string(y) +
                                        " exposure lies outside the trajectory");
    size_t hi = static_cast<size_t>(
        std::upper_bound(times.begin(), times.end(), t) - times.begin());
    if (hi == times.size()) hi = times.size() - 1;
    const size_t lo = hi - 1;
    const double a = static_cast<double>(t - times[lo]) /
                     static_cast<double>(times[hi] - times[lo]);
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        double v;
        if (a == 0.0) v = logs[lo](y, x, c);
        else if (a == 1.0) v = logs[hi](y, x, c);
        else v = (1.0 - a) * logs[lo](y, x, c) + a * logs[hi](y, x, c);
        out(y, x, c) = std::exp(v);
      }
  }
  return out;
}

namespace {

class PixelJitter {
 public:
  PixelJitter(double noise, double eta, std::uint64_t seed, std::uint64_t pixel)
      : noise_(noise), limit_(0.45 * eta),
        rng_(seed ^ (0x9E3779B97F4A7C15ULL * (pixel + 1))) {}

  double draw() {
    if (noise_ <= 0.0) return 0.0;
    return std::clamp(normal_(rng_) * noise_, -limit_, limit_);
  }

 private:
  double noise_;
  double limit_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

EventStream simulate_events(const LogTrajectory& trajectory,
                            const SimConfig& cfg) {
  if (!(cfg.eta > 0.0))
    throw Error(ErrorCode::argument, "contrast threshold must be positive");
  if (cfg.noise < 0.0 || cfg.refractory_us < 0)
    throw Error(ErrorCode::argument, "noise and refractory period must be >= 0");

  const LogTrajectory lum = trajectory.luminance();
  const int H = lum.height();
  const int W = lum.width();
  const auto times = lum.timestamps();
  const auto logs = lum.log_frames();
  const double eta = cfg.eta;
  const double tol = 1e-9 * eta;
  const double refractory = static_cast<double>(cfg.refractory_us);

  std::vector<Event> events;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      PixelJitter jitter(cfg.noise, eta,
                         cfg.seed, static_cast<std::uint64_t>(y) * W + x);
      const double anchor = logs[0](y, x);
      std::int64_t level = 0;
      double ref = anchor;
      double upper_jitter = jitter.draw();
      double lower_jitter = jitter.draw();
      double ready = -std::numeric_limits<double>::infinity();

      for (size_t k = 0; k + 1 < times.size(); ++k) {
        const double ta = static_cast<double>(times[k]);
        const double tb = static_cast<double>(times[k + 1]);
        const double a = logs[k](y, x);
        const double b = logs[k + 1](y, x);
        auto value = [&](double t) { return a + (b - a) * (t - ta) / (tb - ta); };
        double cursor = ta;
        for (;;) {
          const double start = std::max(cursor, ready);
          if (start > tb) break;
          const double upper = ref + eta + upper_jitter;
          const double lower = ref + lower_jitter;
          const double v = value(start);
          double when;
          int polarity;
          // Only a refractory delay can leave the value outside its cell;
          // right after a crossing it sits on the boundary it just passed.
          const bool delayed = start > cursor;
          if (delayed && v >= upper - tol) {
            when = start;
            polarity = 1;
          } else if (delayed && v < lower - tol) {
            when = start;
            polarity = -1;
          } else if (b > v && b >= upper - tol) {
            when = std::clamp(ta + (upper - a) / (b - a) * (tb - ta), start, tb);
            polarity = 1;
          } else if (b < v && b < lower - tol) {
            when = std::clamp(ta + (lower - a) / (b - a) * (tb - ta), start, tb);
            polarity = -1;
          } else {
            break;
          }
          events.push_back(Event{static_cast<std::int64_t>(std::floor(when)),
                                 static_cast<std::uint16_t>(x),
                                 static_cast<std::uint16_t>(y),
                                 static_cast<std::int8_t>(polarity)});
          level += polarity;
          ref = anchor + static_cast<double>(level) * eta;
          if (cfg.noise > 0.0) {
            // the boundary behind the crossing must not fire straight back
            const double offset = value(when) - ref;
            upper_jitter = jitter.draw();
            lower_jitter = jitter.draw();
            if (polarity > 0) lower_jitter = std::min(lower_jitter, offset);
            else upper_jitter = std::max(upper_jitter, offset - eta + 2 * tol);
          }
          cursor = when;
          ready = refractory > 0.0 ? when + refractory : ready;
        }
      }
    }
  }
  return EventStream::from_unsorted({H, W}, lum.t_begin(), lum.t_end(),
                                    std::move(events));
}

}  // namespace rsu
