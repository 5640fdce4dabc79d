#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rsu {

// Intensities are normalized to [0, 1]; kMinIntensity keeps logs finite.
inline constexpr double kMinIntensity = 1e-4;
inline constexpr double kMaxIntensity = 1.0;

enum class ErrorCode {
  argument,
  shape,
  order,
  range,
  coverage,
  format,
  geometry,
  unsorted,
  io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Dense H x W x C raster with interleaved channels.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, int channels = 1, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 1)
      throw Error(ErrorCode::shape, "invalid grid dimensions");
    data_.assign(static_cast<size_t>(height) * width * channels, fill);
  }
  Grid(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels),
        data_(std::move(data)) {
    if (height < 0 || width < 0 || channels < 1 ||
        data_.size() != static_cast<size_t>(height) * width * channels)
      throw Error(ErrorCode::shape, "grid data size does not match dimensions");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int y, int x, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& operator()(int y, int x, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  template <class U>
  bool same_plane(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Grid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using Frame = Grid<double>;
using Mask = Grid<std::uint8_t>;

struct Event {
  std::int64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;

  bool operator==(const Event&) const = default;
};

/// Canonical stream order: time, then row, column, polarity.
bool event_less(const Event& a, const Event& b) noexcept;

struct Geometry {
  int height = 0;
  int width = 0;
  bool operator==(const Geometry&) const = default;
};

/// Time-sorted events of a fixed-geometry sensor with explicit coverage
/// bounds [t_min, t_max]. Validated on construction.
class EventStream {
 public:
  EventStream() = default;
  EventStream(Geometry geometry, std::int64_t t_min, std::int64_t t_max,
              std::vector<Event> events);

  /// Sorts `events` into canonical order before validating.
  static EventStream from_unsorted(Geometry geometry, std::int64_t t_min,
                                   std::int64_t t_max,
                                   std::vector<Event> events);

  Geometry geometry() const noexcept { return geometry_; }
  std::int64_t t_min() const noexcept { return t_min_; }
  std::int64_t t_max() const noexcept { return t_max_; }
  std::span<const Event> events() const noexcept { return events_; }
  size_t size() const noexcept { return events_.size(); }

  bool covers(std::int64_t t) const noexcept {
    return t >= t_min_ && t <= t_max_;
  }

 private:
  Geometry geometry_;
  std::int64_t t_min_ = 0;
  std::int64_t t_max_ = 0;
  std::vector<Event> events_;
};

struct GlobalShutter {
  std::int64_t t = 0;
  bool operator==(const GlobalShutter&) const = default;
};

struct RollingShutter {
  std::int64_t t0 = 0;       // exposure of row 0
  std::int64_t readout = 0;  // total readout span T
  int rows = 0;              // H
  bool operator==(const RollingShutter&) const = default;
};

/// Per-row exposure instant of a frame.
class TimeMap {
 public:
  TimeMap() = default;
  TimeMap(GlobalShutter g) : map_(g) {}
  TimeMap(RollingShutter r);

  static TimeMap global(std::int64_t t) { return TimeMap(GlobalShutter{t}); }
  static TimeMap rolling(std::int64_t t0, std::int64_t readout, int rows) {
    return TimeMap(RollingShutter{t0, readout, rows});
  }

  bool is_global() const noexcept {
    return std::holds_alternative<GlobalShutter>(map_);
  }
  bool is_rolling() const noexcept { return !is_global(); }
  const GlobalShutter& as_global() const { return std::get<GlobalShutter>(map_); }
  const RollingShutter& as_rolling() const {
    return std::get<RollingShutter>(map_);
  }

  /// Exposure time of row y: t for global maps, t0 + round(y*T/H) for
  /// rolling maps (round half up).
  std::int64_t row_time(int y) const;

  /// Row range a rolling map accepts; global maps accept any row >= 0.
  bool accepts_rows(int height) const noexcept;

  bool operator==(const TimeMap&) const = default;

 private:
  std::variant<GlobalShutter, RollingShutter> map_;
};

std::int64_t scanline_time(const TimeMap& map, int y);

/// BT.601 luma for RGB frames, identity for gray frames.
Frame luminance(const Frame& frame);

/// Natural log of max(value, kMinIntensity) per channel.
Frame safe_log(const Frame& frame);

/// Clamps every value into [kMinIntensity, kMaxIntensity].
void clamp_intensity(Frame& frame);

/// Log-luminance samples at strictly increasing knots; values between knots
/// are linear in the log domain.
class LogTrajectory {
 public:
  LogTrajectory(std::vector<std::int64_t> timestamps,
                std::vector<Frame> log_frames);

  int height() const noexcept { return logs_.front().height(); }
  int width() const noexcept { return logs_.front().width(); }
  int channels() const noexcept { return logs_.front().channels(); }
  std::int64_t t_begin() const noexcept { return times_.front(); }
  std::int64_t t_end() const noexcept { return times_.back(); }
  std::span<const std::int64_t> timestamps() const noexcept { return times_; }
  std::span<const Frame> log_frames() const noexcept { return logs_; }

  /// Log value of one pixel/channel at time t (microseconds, may be
  /// fractional).
  double log_at(double t, int y, int x, int c = 0) const;

  /// Single-channel trajectory of log-luminance at the knots.
  LogTrajectory luminance() const;

 private:
  std::vector<std::int64_t> times_;
  std::vector<Frame> logs_;
};

}  // namespace rsu
