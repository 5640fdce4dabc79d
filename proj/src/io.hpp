#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "segmentation.hpp"
#include "spatial.hpp"
#include "types.hpp"

namespace rsu::io {

// EVT1 binary container, little-endian:
//   header (20 bytes): "EVT1", u16 version = 1, u16 height, u16 width,
//                      u16 reserved = 0, u32 count low, u32 count high
//   record (14 bytes): u64 t (microseconds), u16 x, u16 y, i8 p, u8 pad = 0
// Files ending in ".txt" use the text form instead: an optional
// "# EVT1 height=H width=W" line followed by one "t x y p" line per event.
inline constexpr std::size_t kEvt1HeaderSize = 20;
inline constexpr std::size_t kEvt1RecordSize = 14;

std::string encode_events(const EventStream& stream);
/// Coverage of the decoded stream is [first event t, last event t].
EventStream decode_events(std::string_view bytes);

void write_events(const EventStream& stream, const std::filesystem::path& path);
EventStream read_events(const std::filesystem::path& path);

/// Same events, new coverage bounds (validated).
EventStream with_coverage(const EventStream& stream, std::int64_t t_min,
                          std::int64_t t_max);

// Two-band flow raster: "PIEH", i32 width, i32 height, then row-major
// float32 (dx, dy) pairs.
std::string encode_flow(const FlowField& flow);
FlowField decode_flow(std::string_view bytes);
void write_flow(const FlowField& flow, const std::filesystem::path& path);
FlowField read_flow(const std::filesystem::path& path);

// Voxel grid: eight header fields followed by 2N*H*W u32 counts,
// channel-major:
//   "VOX1", u32 version = 1, u32 N, u32 H, u32 W,
//   u32 map kinds (source in bits 0-7, target in bits 8-15; 0 global,
//   1 rolling), source descriptor (i64 t or t0, i64 readout),
//   target descriptor (i64, i64)
std::string encode_voxels(const EventVoxelGrid& grid);
EventVoxelGrid decode_voxels(std::string_view bytes);
void write_voxels(const EventVoxelGrid& grid, const std::filesystem::path& path);
EventVoxelGrid read_voxels(const std::filesystem::path& path);

/// 8- or 16-bit gray/RGB PNG to normalized intensities (alpha dropped).
Frame read_png(const std::filesystem::path& path);
/// Normalized intensities to PNG; values are clamped to [0, 1].
void write_png(const Frame& frame, const std::filesystem::path& path,
               int bit_depth = 16);

/// Flat `key = value` file; `#` starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);

struct TimingConfig {
  std::int64_t t0_us = 0;
  std::int64_t readout_us = 0;
  std::int64_t interframe_gap_us = 0;
  int height = 0;
  int width = 0;
  double eta = 0.2;
  int bins = kDefaultBins;
  FlowParams flow;
  double lambda_len = 0.05;
  bool has_coverage = false;
  std::int64_t coverage_start_us = 0;
  std::int64_t coverage_end_us = 0;

  TimeMap rs_map(int index) const;
};

TimingConfig parse_timing_config(const KeyValues& kv);
TimingConfig read_timing_config(const std::filesystem::path& path);
std::string format_timing_config(const TimingConfig& cfg);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace rsu::io
