#include "rsunroll/rsunroll.h"

#include <cstring>
#include <new>
#include <string>

#include "io.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "scenes.hpp"
#include "simulator.hpp"

struct rsu_frame {
  rsu::Frame value;
};
struct rsu_events {
  rsu::EventStream value;
};
struct rsu_trajectory {
  rsu::LogTrajectory value;
};
struct rsu_flow {
  rsu::FlowField value;
};
struct rsu_voxels {
  rsu::EventVoxelGrid value;
};

namespace {

thread_local std::string g_last_error;

rsu_status status_of(rsu::ErrorCode code) {
  switch (code) {
    case rsu::ErrorCode::argument: return RSU_ERR_ARGUMENT;
    case rsu::ErrorCode::shape: return RSU_ERR_SHAPE;
    case rsu::ErrorCode::order: return RSU_ERR_ORDER;
    case rsu::ErrorCode::range: return RSU_ERR_RANGE;
    case rsu::ErrorCode::coverage: return RSU_ERR_COVERAGE;
    case rsu::ErrorCode::format: return RSU_ERR_FORMAT;
    case rsu::ErrorCode::geometry: return RSU_ERR_GEOMETRY;
    case rsu::ErrorCode::unsorted: return RSU_ERR_UNSORTED;
    case rsu::ErrorCode::io: return RSU_ERR_IO;
  }
  return RSU_ERR_INTERNAL;
}

template <class F>
rsu_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return RSU_OK;
  } catch (const rsu::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RSU_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSU_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw rsu::Error(rsu::ErrorCode::argument, what);
}

rsu::TimeMap to_map(const rsu_time_map* m) {
  require(m != nullptr, "time map is null");
  if (m->kind == RSU_MAP_GLOBAL) return rsu::TimeMap::global(m->t);
  if (m->kind == RSU_MAP_ROLLING) return rsu::TimeMap::rolling(m->t, m->readout, m->rows);
  throw rsu::Error(rsu::ErrorCode::argument, "unknown time map kind");
}

rsu::FlowParams to_flow_params(const rsu_flow_params& p) {
  return {p.levels, p.patch, p.radius, p.min_events};
}

rsu_flow_params from_flow_params(const rsu::FlowParams& p) {
  return {p.levels, p.patch, p.radius, p.min_events};
}

rsu::MoaParams to_moa(const rsu_params* p) {
  rsu::MoaParams out;
  if (!p) return out;
  out.eta = p->eta;
  out.flow = to_flow_params(p->flow);
  out.lambda_len = p->lambda_len;
  if (p->force_confidence) out.forced_confidence = p->forced_confidence;
  return out;
}

rsu::LossWeights to_weights(const double* w) {
  if (!w) return rsu::kDefaultLossWeights;
  return {w[0], w[1], w[2], w[3]};
}

rsu_loss_report from_report(const rsu::LossReport& r) {
  rsu_loss_report out{};
  out.lc = r.lc;
  out.cc = r.cc;
  out.tc = r.tc;
  out.tv = r.tv;
  out.dcc = r.dcc;
  out.total = r.total;
  for (int i = 0; i < 4; ++i) out.weights[i] = r.weights[i];
  return out;
}

rsu::CompensatorKind to_kind(rsu_mode mode) {
  switch (mode) {
    case RSU_MODE_TEMPORAL: return rsu::CompensatorKind::temporal;
    case RSU_MODE_SPATIAL: return rsu::CompensatorKind::spatial;
    case RSU_MODE_FUSED: return rsu::CompensatorKind::fused;
    default: break;
  }
  throw rsu::Error(rsu::ErrorCode::argument, "consistency needs a temporal, spatial or fused E-IC");
}

rsu_status write_text(const std::string& text, char* buffer, size_t capacity, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buffer || capacity < text.size() + 1) {
    g_last_error = "buffer too small for report";
    return RSU_ERR_RANGE;
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  g_last_error.clear();
  return RSU_OK;
}

}  // namespace

extern "C" {

const char* rsu_status_name(rsu_status status) {
  switch (status) {
    case RSU_OK: return "ok";
    case RSU_ERR_ARGUMENT: return "argument";
    case RSU_ERR_SHAPE: return "shape";
    case RSU_ERR_ORDER: return "order";
    case RSU_ERR_RANGE: return "range";
    case RSU_ERR_COVERAGE: return "coverage";
    case RSU_ERR_FORMAT: return "format";
    case RSU_ERR_GEOMETRY: return "geometry";
    case RSU_ERR_UNSORTED: return "unsorted";
    case RSU_ERR_IO: return "io";
    case RSU_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* rsu_last_error(void) { return g_last_error.c_str(); }

void rsu_sim_config_default(rsu_sim_config* cfg) {
  if (!cfg) return;
  const rsu::SimConfig d;
  *cfg = {d.eta, d.refractory_us, d.noise, d.seed};
}

void rsu_params_default(rsu_params* params) {
  if (!params) return;
  const rsu::MoaParams d;
  *params = {d.eta, from_flow_params(d.flow), d.lambda_len, 0, 0.5};
}

void rsu_texture_params_default(rsu_texture_params* params) {
  if (!params) return;
  const rsu::TextureParams d;
  *params = {d.height, d.width, d.lo, d.hi, d.cell, d.seed, d.vx, d.vy, d.margin, d.ramp};
}

rsu_time_map rsu_global_map(int64_t t) { return {RSU_MAP_GLOBAL, t, 0, 0}; }

rsu_time_map rsu_rolling_map(int64_t t0, int64_t readout, int32_t rows) {
  return {RSU_MAP_ROLLING, t0, readout, rows};
}

rsu_status rsu_map_row_time(const rsu_time_map* map, int32_t y, int64_t* t) {
  return guarded([&] {
    require(t != nullptr, "output is null");
    *t = to_map(map).row_time(y);
  });
}

rsu_status rsu_frame_create(int32_t height, int32_t width, int32_t channels,
                            const double* data, rsu_frame** out) {
  return guarded([&] {
    require(out != nullptr, "output is null");
    rsu::Frame f(height, width, channels);
    if (data) std::copy(data, data + f.size(), f.values().begin());
    *out = new rsu_frame{std::move(f)};
  });
}

void rsu_frame_destroy(rsu_frame* frame) { delete frame; }

rsu_status rsu_frame_shape(const rsu_frame* frame, int32_t* height, int32_t* width,
                           int32_t* channels) {
  return guarded([&] {
    require(frame != nullptr, "frame is null");
    if (height) *height = frame->value.height();
    if (width) *width = frame->value.width();
    if (channels) *channels = frame->value.channels();
  });
}

const double* rsu_frame_data(const rsu_frame* frame) {
  return frame ? frame->value.values().data() : nullptr;
}

rsu_status rsu_frame_read_png(const char* path, rsu_frame** out) {
  return guarded([&] {
    require(path && out, "path and output are required");
    *out = new rsu_frame{rsu::io::read_png(path)};
  });
}

rsu_status rsu_frame_write_png(const rsu_frame* frame, const char* path, int32_t bit_depth) {
  return guarded([&] {
    require(frame && path, "frame and path are required");
    rsu::io::write_png(frame->value, path, bit_depth);
  });
}

rsu_status rsu_events_create(int32_t height, int32_t width, int64_t t_min, int64_t t_max,
                             const rsu_event* events, size_t count, int32_t sort,
                             rsu_events** out) {
  return guarded([&] {
    require(out != nullptr, "output is null");
    require(events != nullptr || count == 0, "events are null");
    std::vector<rsu::Event> ev(count);
    for (size_t i = 0; i < count; ++i) ev[i] = {events[i].t, events[i].x, events[i].y, events[i].p};
    const rsu::Geometry g{height, width};
    *out = new rsu_events{sort ? rsu::EventStream::from_unsorted(g, t_min, t_max, std::move(ev))
                               : rsu::EventStream(g, t_min, t_max, std::move(ev))};
  });
}

void rsu_events_destroy(rsu_events* events) { delete events; }

rsu_status rsu_events_info(const rsu_events* events, int32_t* height, int32_t* width,
                           int64_t* t_min, int64_t* t_max, size_t* count) {
  return guarded([&] {
    require(events != nullptr, "events are null");
    const auto& s = events->value;
    if (height) *height = s.geometry().height;
    if (width) *width = s.geometry().width;
    if (t_min) *t_min = s.t_min();
    if (t_max) *t_max = s.t_max();
    if (count) *count = s.size();
  });
}

rsu_status rsu_events_copy(const rsu_events* events, size_t first, rsu_event* buffer,
                           size_t capacity, size_t* copied) {
  return guarded([&] {
    require(events != nullptr, "events are null");
    require(buffer != nullptr || capacity == 0, "buffer is null");
    const auto all = events->value.events();
    size_t n = 0;
    for (size_t i = first; i < all.size() && n < capacity; ++i, ++n)
      buffer[n] = {all[i].t, all[i].x, all[i].y, all[i].p};
    if (copied) *copied = n;
  });
}

rsu_status rsu_events_set_coverage(rsu_events* events, int64_t t_min, int64_t t_max) {
  return guarded([&] {
    require(events != nullptr, "events are null");
    events->value = rsu::io::with_coverage(events->value, t_min, t_max);
  });
}

rsu_status rsu_events_read(const char* path, rsu_events** out) {
  return guarded([&] {
    require(path && out, "path and output are required");
    *out = new rsu_events{rsu::io::read_events(path)};
  });
}

rsu_status rsu_events_write(const rsu_events* events, const char* path) {
  return guarded([&] {
    require(events && path, "events and path are required");
    rsu::io::write_events(events->value, path);
  });
}

rsu_status rsu_trajectory_create(const rsu_frame* const* frames, const int64_t* timestamps,
                                 size_t count, rsu_trajectory** out) {
  return guarded([&] {
    require(frames && timestamps && out, "frames, timestamps and output are required");
    std::vector<rsu::Frame> fs;
    fs.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(frames[i] != nullptr, "frame is null");
      fs.push_back(frames[i]->value);
    }
    *out = new rsu_trajectory{rsu::build_trajectory(fs, {timestamps, count})};
  });
}

void rsu_trajectory_destroy(rsu_trajectory* trajectory) { delete trajectory; }

rsu_status rsu_trajectory_sample(const rsu_trajectory* trajectory, const rsu_time_map* map,
                                 rsu_frame** out) {
  return guarded([&] {
    require(trajectory && out, "trajectory and output are required");
    *out = new rsu_frame{rsu::sample_frame(trajectory->value, to_map(map))};
  });
}

rsu_status rsu_simulate(const rsu_trajectory* trajectory, const rsu_sim_config* cfg,
                        rsu_events** out) {
  return guarded([&] {
    require(trajectory && out, "trajectory and output are required");
    rsu::SimConfig c;
    if (cfg) c = {cfg->eta, cfg->refractory_us, cfg->noise, cfg->seed};
    *out = new rsu_events{rsu::simulate_events(trajectory->value, c)};
  });
}

rsu_status rsu_render_texture(const rsu_texture_params* params, int64_t t, rsu_frame** out) {
  return guarded([&] {
    require(params && out, "parameters and output are required");
    rsu::TextureParams p;
    p.height = params->height;
    p.width = params->width;
    p.lo = params->lo;
    p.hi = params->hi;
    p.cell = params->cell;
    p.seed = params->seed;
    p.vx = params->vx;
    p.vy = params->vy;
    p.margin = params->margin;
    p.ramp = params->ramp;
    *out = new rsu_frame{rsu::render(rsu::TranslatingTexture(p), static_cast<double>(t))};
  });
}

rsu_status rsu_unroll(rsu_mode mode, const rsu_frame* rs1, const rsu_time_map* map1,
                      const rsu_frame* rs2, const rsu_time_map* map2,
                      const rsu_events* events, const rsu_time_map* dst,
                      const rsu_params* params, rsu_frame** out) {
  return guarded([&] {
    require(rs1 && events && out, "rs1, events and output are required");
    rsu::UnrollMode m;
    switch (mode) {
      case RSU_MODE_TEMPORAL: m = rsu::UnrollMode::temporal; break;
      case RSU_MODE_SPATIAL: m = rsu::UnrollMode::spatial; break;
      case RSU_MODE_FUSED: m = rsu::UnrollMode::fused; break;
      case RSU_MODE_MOA: m = rsu::UnrollMode::moa; break;
      default: throw rsu::Error(rsu::ErrorCode::argument, "unknown mode");
    }
    const rsu::TimeMap first = to_map(map1);
    const rsu::TimeMap target = to_map(dst);
    std::optional<rsu::TimeMap> second_map;
    std::optional<rsu::SecondFrame> second;
    if (m == rsu::UnrollMode::moa) {
      require(rs2 != nullptr && map2 != nullptr, "moa mode needs a second RS frame");
      second_map = to_map(map2);
      second.emplace(rsu::SecondFrame{rs2->value, *second_map});
    }
    *out = new rsu_frame{rsu::unroll(m, rs1->value, first, second, events->value, target,
                                     to_moa(params))};
  });
}

rsu_status rsu_flow_create(int32_t height, int32_t width, const double* data, rsu_flow** out) {
  return guarded([&] {
    require(out != nullptr, "output is null");
    rsu::FlowField f(height, width, 2);
    if (data) std::copy(data, data + f.size(), f.values().begin());
    *out = new rsu_flow{std::move(f)};
  });
}

void rsu_flow_destroy(rsu_flow* flow) { delete flow; }

rsu_status rsu_flow_shape(const rsu_flow* flow, int32_t* height, int32_t* width) {
  return guarded([&] {
    require(flow != nullptr, "flow is null");
    if (height) *height = flow->value.height();
    if (width) *width = flow->value.width();
  });
}

const double* rsu_flow_data(const rsu_flow* flow) {
  return flow ? flow->value.values().data() : nullptr;
}

rsu_status rsu_flow_read(const char* path, rsu_flow** out) {
  return guarded([&] {
    require(path && out, "path and output are required");
    *out = new rsu_flow{rsu::io::read_flow(path)};
  });
}

rsu_status rsu_flow_write(const rsu_flow* flow, const char* path) {
  return guarded([&] {
    require(flow && path, "flow and path are required");
    rsu::io::write_flow(flow->value, path);
  });
}

rsu_status rsu_estimate_flow(const rsu_events* events, const rsu_time_map* src,
                             const rsu_time_map* dst, const rsu_flow_params* params,
                             rsu_flow** out) {
  return guarded([&] {
    require(events && out, "events and output are required");
    const rsu::FlowParams p = params ? to_flow_params(*params) : rsu::FlowParams{};
    *out = new rsu_flow{rsu::estimate_flow(events->value, to_map(src), to_map(dst), p)};
  });
}

rsu_status rsu_warp(const rsu_frame* frame, const rsu_flow* flow, rsu_frame** out,
                    uint8_t* valid) {
  return guarded([&] {
    require(frame && flow && out, "frame, flow and output are required");
    rsu::WarpResult r = rsu::warp_backward(frame->value, flow->value);
    if (valid) std::copy(r.valid.values().begin(), r.valid.values().end(), valid);
    *out = new rsu_frame{std::move(r.frame)};
  });
}

rsu_status rsu_consistency(const rsu_frame* rs1, const rsu_frame* rs2,
                           const rsu_events* events, const rsu_time_map* map1,
                           const rsu_time_map* map2, const rsu_time_map* dst, rsu_mode eic,
                           const rsu_params* params, const double* weights,
                           rsu_loss_report* out) {
  return guarded([&] {
    require(rs1 && rs2 && events && out, "frames, events and output are required");
    *out = from_report(rsu::consistency_report(rs1->value, rs2->value, events->value,
                                               to_map(map1), to_map(map2), to_map(dst),
                                               to_kind(eic), to_moa(params), to_weights(weights)));
  });
}

rsu_status rsu_total_loss(double lc, double cc, double tc, double tv, double dcc,
                          const double* weights, rsu_loss_report* out) {
  return guarded([&] {
    require(out != nullptr, "output is null");
    *out = from_report(rsu::total_loss(lc, cc, tc, tv, dcc, to_weights(weights)));
  });
}

rsu_status rsu_format_loss_report(const rsu_loss_report* report, char* buffer,
                                  size_t capacity, size_t* needed) {
  if (!report) {
    g_last_error = "report is null";
    return RSU_ERR_ARGUMENT;
  }
  rsu::LossReport r;
  r.lc = report->lc;
  r.cc = report->cc;
  r.tc = report->tc;
  r.tv = report->tv;
  r.dcc = report->dcc;
  r.total = report->total;
  for (int i = 0; i < 4; ++i) r.weights[i] = report->weights[i];
  return write_text(rsu::format_report(r), buffer, capacity, needed);
}

rsu_status rsu_format_metric_report(const char* const* names, const double* psnr,
                                    const double* ssim, size_t count, char* buffer,
                                    size_t capacity, size_t* needed) {
  if (count > 0 && (!names || !psnr || !ssim)) {
    g_last_error = "names and metric arrays are required";
    return RSU_ERR_ARGUMENT;
  }
  std::vector<rsu::FrameMetrics> frames;
  for (size_t i = 0; i < count; ++i) frames.push_back({names[i], psnr[i], ssim[i]});
  return write_text(rsu::format_report(rsu::summarize(std::move(frames))), buffer, capacity,
                    needed);
}

rsu_status rsu_psnr(const rsu_frame* a, const rsu_frame* b, double* out) {
  return guarded([&] {
    require(a && b && out, "frames and output are required");
    *out = rsu::psnr(a->value, b->value);
  });
}

rsu_status rsu_ssim(const rsu_frame* a, const rsu_frame* b, double* out) {
  return guarded([&] {
    require(a && b && out, "frames and output are required");
    *out = rsu::ssim(a->value, b->value);
  });
}

rsu_status rsu_voxelize(const rsu_events* events, const rsu_time_map* src,
                        const rsu_time_map* dst, int32_t bins, rsu_voxels** out) {
  return guarded([&] {
    require(events && out, "events and output are required");
    require(bins >= 1, "bins must be >= 1");
    const rsu::TimeMap s = to_map(src);
    const rsu::TimeMap d = to_map(dst);
    rsu::require_coverage(events->value, s, d);
    *out = new rsu_voxels{rsu::voxelize(rsu::orient(rsu::segment(events->value, s, d)), bins)};
  });
}

void rsu_voxels_destroy(rsu_voxels* voxels) { delete voxels; }

rsu_status rsu_voxels_info(const rsu_voxels* voxels, int32_t* bins, int32_t* height,
                           int32_t* width, uint64_t* positive, uint64_t* negative) {
  return guarded([&] {
    require(voxels != nullptr, "voxels are null");
    const auto& g = voxels->value;
    if (bins) *bins = g.bins;
    if (height) *height = g.height;
    if (width) *width = g.width;
    if (positive) *positive = g.total_positive();
    if (negative) *negative = g.total_negative();
  });
}

const uint32_t* rsu_voxels_data(const rsu_voxels* voxels) {
  return voxels ? voxels->value.counts.data() : nullptr;
}

rsu_status rsu_voxels_write(const rsu_voxels* voxels, const char* path) {
  return guarded([&] {
    require(voxels && path, "voxels and path are required");
    rsu::io::write_voxels(voxels->value, path);
  });
}

rsu_status rsu_voxels_read(const char* path, rsu_voxels** out) {
  return guarded([&] {
    require(path && out, "path and output are required");
    *out = new rsu_voxels{rsu::io::read_voxels(path)};
  });
}

rsu_status rsu_config_read(const char* path, rsu_config* out) {
  return guarded([&] {
    require(path && out, "path and output are required");
    const rsu::io::TimingConfig c = rsu::io::read_timing_config(path);
    *out = {c.t0_us,  c.readout_us, c.interframe_gap_us,        c.height,
            c.width,  c.eta,        c.bins,                     from_flow_params(c.flow),
            c.lambda_len, c.has_coverage ? 1 : 0, c.coverage_start_us, c.coverage_end_us};
  });
}

rsu_status rsu_config_write(const rsu_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "config and path are required");
    rsu::io::TimingConfig c;
    c.t0_us = cfg->t0_us;
    c.readout_us = cfg->readout_us;
    c.interframe_gap_us = cfg->interframe_gap_us;
    c.height = cfg->height;
    c.width = cfg->width;
    c.eta = cfg->eta;
    c.bins = cfg->bins;
    c.flow = to_flow_params(cfg->flow);
    c.lambda_len = cfg->lambda_len;
    c.has_coverage = cfg->has_coverage != 0;
    c.coverage_start_us = cfg->coverage_start_us;
    c.coverage_end_us = cfg->coverage_end_us;
    const std::string text = rsu::io::format_timing_config(c);
    // validate what we are about to write
    rsu::io::parse_timing_config(rsu::io::parse_key_values(text));
    rsu::io::write_file(path, text);
  });
}

rsu_time_map rsu_config_rs_map(const rsu_config* cfg, int32_t index) {
  if (!cfg) return rsu_global_map(0);
  return rsu_rolling_map(cfg->t0_us + static_cast<int64_t>(index) *
                                          (cfg->readout_us + cfg->interframe_gap_us),
                         cfg->readout_us, cfg->height);
}

}  // extern "C"
