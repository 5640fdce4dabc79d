#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace rsu {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::argument: return "argument";
    case ErrorCode::shape: return "shape";
    case ErrorCode::order: return "order";
    case ErrorCode::range: return "range";
    case ErrorCode::coverage: return "coverage";
    case ErrorCode::format: return "format";
    case ErrorCode::geometry: return "geometry";
    case ErrorCode::unsorted: return "unsorted";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

bool event_less(const Event& a, const Event& b) noexcept {
  return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

EventStream::EventStream(Geometry geometry, std::int64_t t_min,
                         std::int64_t t_max, std::vector<Event> events)
    : geometry_(geometry), t_min_(t_min), t_max_(t_max),
      events_(std::move(events)) {
  if (geometry.height <= 0 || geometry.width <= 0)
    throw Error(ErrorCode::shape, "event stream geometry must be positive");
  if (t_min > t_max)
    throw Error(ErrorCode::order, "event stream t_min exceeds t_max");
  for (size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.x >= geometry.width || e.y >= geometry.height)
      throw Error(ErrorCode::geometry,
                  "event " + std::to_string(i) + " lies outside the sensor");
    if (e.p != 1 && e.p != -1)
      throw Error(ErrorCode::argument,
                  "event " + std::to_string(i) + " has polarity other than +-1");
    if (e.t < t_min || e.t > t_max)
      throw Error(ErrorCode::range,
                  "event " + std::to_string(i) + " lies outside the time bounds");
    if (i > 0 && event_less(e, events_[i - 1]))
      throw Error(ErrorCode::unsorted,
                  "event " + std::to_string(i) + " breaks the (t, y, x, p) order");
  }
}

EventStream EventStream::from_unsorted(Geometry geometry, std::int64_t t_min,
                                       std::int64_t t_max,
                                       std::vector<Event> events) {
  std::sort(events.begin(), events.end(), event_less);
  return EventStream(geometry, t_min, t_max, std::move(events));
}

TimeMap::TimeMap(RollingShutter r) : map_(r) {
  if (r.readout <= 0)
    throw Error(ErrorCode::argument, "rolling shutter readout must be positive");
  if (r.rows < 1)
    throw Error(ErrorCode::argument, "rolling shutter needs at least one row");
}

std::int64_t TimeMap::row_time(int y) const {
  if (y < 0) throw Error(ErrorCode::range, "negative row index");
  if (const auto* g = std::get_if<GlobalShutter>(&map_)) return g->t;
  const auto& r = std::get<RollingShutter>(map_);
  if (y >= r.rows) throw Error(ErrorCode::range, "row index beyond map height");
  // round half up of y*T/H, exact in integers: floor((2yT + H) / 2H)
  const std::int64_t num = 2 * static_cast<std::int64_t>(y) * r.readout + r.rows;
  return r.t0 + num / (2 * static_cast<std::int64_t>(r.rows));
}

bool TimeMap::accepts_rows(int height) const noexcept {
  if (is_global()) return true;
  return as_rolling().rows == height;
}

std::int64_t scanline_time(const TimeMap& map, int y) { return map.row_time(y); }

Frame luminance(const Frame& frame) {
  if (frame.channels() == 1) return frame;
  if (frame.channels() != 3)
    throw Error(ErrorCode::shape, "luminance expects 1 or 3 channels");
  Frame out(frame.height(), frame.width(), 1);
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      const double v = 0.299 * frame(y, x, 0) + 0.587 * frame(y, x, 1) +
                       0.114 * frame(y, x, 2);
      out(y, x) = std::max(v, kMinIntensity);
    }
  return out;
}

Frame safe_log(const Frame& frame) {
  Frame out = frame;
  for (double& v : out.values()) v = std::log(std::max(v, kMinIntensity));
  return out;
}

void clamp_intensity(Frame& frame) {
  for (double& v : frame.values()) v = std::clamp(v, kMinIntensity, kMaxIntensity);
}

LogTrajectory::LogTrajectory(std::vector<std::int64_t> timestamps,
                             std::vector<Frame> log_frames)
    : times_(std::move(timestamps)), logs_(std::move(log_frames)) {
  if (times_.size() < 2 || times_.size() != logs_.size())
    throw Error(ErrorCode::argument,
                "trajectory needs at least two samples with one time each");
  for (size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] <= times_[i - 1])
      throw Error(ErrorCode::order, "trajectory timestamps must strictly increase");
    if (!logs_[i].same_shape(logs_[0]))
      throw Error(ErrorCode::shape, "trajectory samples differ in geometry");
  }
}

double LogTrajectory::log_at(double t, int y, int x, int c) const {
  if (t < static_cast<double>(times_.front()) ||
      t > static_cast<double>(times_.back()))
    throw Error(ErrorCode::range, "time outside trajectory bounds");
  auto it = std::upper_bound(times_.begin(), times_.end(), t,
                             [](double v, std::int64_t k) { return v < static_cast<double>(k); });
  size_t hi = static_cast<size_t>(it - times_.begin());
  if (hi == times_.size()) return logs_.back()(y, x, c);
  size_t lo = hi - 1;
  const double t0 = static_cast<double>(times_[lo]);
  const double t1 = static_cast<double>(times_[hi]);
  const double a = (t - t0) / (t1 - t0);
  if (a == 0.0) return logs_[lo](y, x, c);
  return (1.0 - a) * logs_[lo](y, x, c) + a * logs_[hi](y, x, c);
}

LogTrajectory LogTrajectory::luminance() const {
  if (channels() == 1) return *this;
  std::vector<Frame> lum;
  lum.reserve(logs_.size());
  for (const Frame& lf : logs_) {
    Frame lin = lf;
    for (double& v : lin.values()) v = std::exp(v);
    lum.push_back(safe_log(rsu::luminance(lin)));
  }
  return LogTrajectory(times_, std::move(lum));
}

}  // namespace rsu
