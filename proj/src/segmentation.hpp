#pragma once

#include <cstdint>
#include <vector>

#include "types.hpp"

namespace rsu {

inline constexpr int kDefaultBins = 16;

/// Events of one row inside [start, end).
struct RowSlice {
  std::int64_t start = 0;
  std::int64_t end = 0;
  bool backward = false;  // source exposure is later than target
  bool flipped = false;   // times reflected and polarities negated
  std::vector<Event> events;

  std::int64_t length() const noexcept { return end - start; }
  bool oriented() const noexcept { return backward == flipped; }
};

/// Per-row event windows between a source and a target exposure.
struct EventSegment {
  TimeMap source;
  TimeMap target;
  Geometry geometry;
  std::vector<RowSlice> rows;

  bool oriented() const noexcept;
};

/// Row y keeps the events with t in [min(src(y), dst(y)), max(...)).
EventSegment segment(const EventStream& stream, const TimeMap& src,
                     const TimeMap& dst);

/// Reflects backward rows in time (t -> start + end - t) and negates their
/// polarities so every row reads from source to target. Applying it twice
/// restores the input.
EventSegment orient(EventSegment seg);

struct EventVoxelGrid {
  int bins = kDefaultBins;
  int height = 0;
  int width = 0;
  TimeMap source;
  TimeMap target;
  // 2N x H x W, channel-major: [0, N) positive, [N, 2N) negative.
  std::vector<std::uint32_t> counts;

  std::uint32_t& at(int channel, int y, int x) {
    return counts[(static_cast<size_t>(channel) * height + y) * width + x];
  }
  std::uint32_t at(int channel, int y, int x) const {
    return counts[(static_cast<size_t>(channel) * height + y) * width + x];
  }
  std::uint64_t total_positive() const;
  std::uint64_t total_negative() const;

  bool operator==(const EventVoxelGrid&) const = default;
};

/// Row-aware binning of an oriented segment: each row's window is split into
/// `bins` equal bins, bin = floor(N (t - start) / (end - start)) with t = end
/// folded into the last bin.
EventVoxelGrid voxelize(const EventSegment& seg, int bins = kDefaultBins);

}  // namespace rsu
