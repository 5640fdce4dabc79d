#include "segmentation.hpp"

#include <algorithm>

namespace rsu {

bool EventSegment::oriented() const noexcept {
  return std::all_of(rows.begin(), rows.end(),
                     [](const RowSlice& r) { return r.oriented(); });
}

EventSegment segment(const EventStream& stream, const TimeMap& src,
                     const TimeMap& dst) {
  const Geometry g = stream.geometry();
  if (!src.accepts_rows(g.height) || !dst.accepts_rows(g.height))
    throw Error(ErrorCode::shape, "time map rows do not match the event stream");

  EventSegment seg{src, dst, g, std::vector<RowSlice>(g.height)};
  for (int y = 0; y < g.height; ++y) {
    RowSlice& row = seg.rows[y];
    const std::int64_t ts = src.row_time(y);
    const std::int64_t td = dst.row_time(y);
    row.start = std::min(ts, td);
    row.end = std::max(ts, td);
    row.backward = ts > td;
  }
  // One pass over the time-sorted stream keeps each row's events sorted.
  for (const Event& e : stream.events()) {
    RowSlice& row = seg.rows[e.y];
    if (e.t >= row.start && e.t < row.end) row.events.push_back(e);
  }
  return seg;
}

EventSegment orient(EventSegment seg) {
  for (RowSlice& row : seg.rows) {
    if (!row.backward) continue;
    std::reverse(row.events.begin(), row.events.end());
    for (Event& e : row.events) {
      e.t = row.start + row.end - e.t;
      e.p = static_cast<std::int8_t>(-e.p);
    }
    row.flipped = !row.flipped;
  }
  return seg;
}

std::uint64_t EventVoxelGrid::total_positive() const {
  const size_t half = counts.size() / 2;
  std::uint64_t sum = 0;
  for (size_t i = 0; i < half; ++i) sum += counts[i];
  return sum;
}

std::uint64_t EventVoxelGrid::total_negative() const {
  const size_t half = counts.size() / 2;
  std::uint64_t sum = 0;
  for (size_t i = half; i < counts.size(); ++i) sum += counts[i];
  return sum;
}

EventVoxelGrid voxelize(const EventSegment& seg, int bins) {
  if (bins < 1) throw Error(ErrorCode::argument, "bin count must be >= 1");
  if (!seg.oriented())
    throw Error(ErrorCode::argument, "voxelize expects an oriented segment");
  EventVoxelGrid grid;
  grid.bins = bins;
  grid.height = seg.geometry.height;
  grid.width = seg.geometry.width;
  grid.source = seg.source;
  grid.target = seg.target;
  grid.counts.assign(static_cast<size_t>(2 * bins) * grid.height * grid.width, 0);
  for (int y = 0; y < grid.height; ++y) {
    const RowSlice& row = seg.rows[y];
    const std::int64_t len = row.length();
    if (len <= 0) continue;
    for (const Event& e : row.events) {
      const std::int64_t offset = e.t - row.start;
      int bin = static_cast<int>((static_cast<__int128>(bins) * offset) / len);
      bin = std::clamp(bin, 0, bins - 1);
      const int channel = e.p > 0 ? bin : bins + bin;
      ++grid.at(channel, y, e.x);
    }
  }
  return grid;
}

}  // namespace rsu
