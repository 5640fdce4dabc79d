/* rsunroll: rolling-shutter to global-shutter reconstruction from events. */
#ifndef RSUNROLL_RSUNROLL_H
#define RSUNROLL_RSUNROLL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RSU_BUILDING)
#    define RSU_API __declspec(dllexport)
#  else
#    define RSU_API __declspec(dllimport)
#  endif
#else
#  define RSU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsu_status {
  RSU_OK = 0,
  RSU_ERR_ARGUMENT = 1,
  RSU_ERR_SHAPE = 2,
  RSU_ERR_ORDER = 3,
  RSU_ERR_RANGE = 4,
  RSU_ERR_COVERAGE = 5,
  RSU_ERR_FORMAT = 6,
  RSU_ERR_GEOMETRY = 7,
  RSU_ERR_UNSORTED = 8,
  RSU_ERR_IO = 9,
  RSU_ERR_INTERNAL = 10
} rsu_status;

/* Short machine-readable name ("coverage", "format", ...). */
RSU_API const char* rsu_status_name(rsu_status status);
/* Message of the last failed call on this thread; "" after success. */
RSU_API const char* rsu_last_error(void);

typedef struct rsu_frame rsu_frame;
typedef struct rsu_events rsu_events;
typedef struct rsu_trajectory rsu_trajectory;
typedef struct rsu_flow rsu_flow;
typedef struct rsu_voxels rsu_voxels;

typedef enum rsu_map_kind { RSU_MAP_GLOBAL = 0, RSU_MAP_ROLLING = 1 } rsu_map_kind;

/* Global: every row at t. Rolling: row y at t + round(y * readout / rows). */
typedef struct rsu_time_map {
  int32_t kind;
  int64_t t;
  int64_t readout;
  int32_t rows;
} rsu_time_map;

typedef struct rsu_event {
  int64_t t;
  uint16_t x;
  uint16_t y;
  int8_t p;
} rsu_event;

typedef struct rsu_sim_config {
  double eta;
  int64_t refractory_us;
  double noise;
  uint64_t seed;
} rsu_sim_config;

typedef struct rsu_flow_params {
  int32_t levels;
  int32_t patch;
  int32_t radius;
  int32_t min_events;
} rsu_flow_params;

typedef struct rsu_params {
  double eta;
  rsu_flow_params flow;
  double lambda_len;
  int32_t force_confidence; /* nonzero: use forced_confidence everywhere */
  double forced_confidence;
} rsu_params;

typedef enum rsu_mode {
  RSU_MODE_TEMPORAL = 0,
  RSU_MODE_SPATIAL = 1,
  RSU_MODE_FUSED = 2,
  RSU_MODE_MOA = 3
} rsu_mode;

typedef struct rsu_loss_report {
  double lc, cc, tc, tv, dcc;
  double total;
  double weights[4];
} rsu_loss_report;

typedef struct rsu_config {
  int64_t t0_us;
  int64_t readout_us;
  int64_t interframe_gap_us;
  int32_t height;
  int32_t width;
  double eta;
  int32_t bins;
  rsu_flow_params flow;
  double lambda_len;
  int32_t has_coverage;
  int64_t coverage_start_us;
  int64_t coverage_end_us;
} rsu_config;

typedef struct rsu_texture_params {
  int32_t height;
  int32_t width;
  double lo;
  double hi;
  double cell;
  uint64_t seed;
  double vx; /* px per microsecond */
  double vy;
  double margin;
  double ramp;
} rsu_texture_params;

RSU_API void rsu_sim_config_default(rsu_sim_config* cfg);
RSU_API void rsu_params_default(rsu_params* params);
RSU_API void rsu_texture_params_default(rsu_texture_params* params);
RSU_API rsu_time_map rsu_global_map(int64_t t);
RSU_API rsu_time_map rsu_rolling_map(int64_t t0, int64_t readout, int32_t rows);
RSU_API rsu_status rsu_map_row_time(const rsu_time_map* map, int32_t y, int64_t* t);

/* Frames: normalized intensities, H x W x C interleaved doubles. */
RSU_API rsu_status rsu_frame_create(int32_t height, int32_t width, int32_t channels,
                                    const double* data, rsu_frame** out);
RSU_API void rsu_frame_destroy(rsu_frame* frame);
RSU_API rsu_status rsu_frame_shape(const rsu_frame* frame, int32_t* height,
                                   int32_t* width, int32_t* channels);
RSU_API const double* rsu_frame_data(const rsu_frame* frame);
RSU_API rsu_status rsu_frame_read_png(const char* path, rsu_frame** out);
RSU_API rsu_status rsu_frame_write_png(const rsu_frame* frame, const char* path,
                                       int32_t bit_depth);

/* Events. With sort != 0 the input is put into canonical order first;
 * otherwise unsorted input is rejected. */
RSU_API rsu_status rsu_events_create(int32_t height, int32_t width, int64_t t_min,
                                     int64_t t_max, const rsu_event* events,
                                     size_t count, int32_t sort, rsu_events** out);
RSU_API void rsu_events_destroy(rsu_events* events);
RSU_API rsu_status rsu_events_info(const rsu_events* events, int32_t* height,
                                   int32_t* width, int64_t* t_min, int64_t* t_max,
                                   size_t* count);
/* Copies up to `capacity` events starting at `first`; `copied` may be NULL. */
RSU_API rsu_status rsu_events_copy(const rsu_events* events, size_t first,
                                   rsu_event* buffer, size_t capacity, size_t* copied);
RSU_API rsu_status rsu_events_set_coverage(rsu_events* events, int64_t t_min,
                                           int64_t t_max);
/* EVT1 binary, or the text form for paths ending in ".txt". */
RSU_API rsu_status rsu_events_read(const char* path, rsu_events** out);
RSU_API rsu_status rsu_events_write(const rsu_events* events, const char* path);

/* Simulation. */
RSU_API rsu_status rsu_trajectory_create(const rsu_frame* const* frames,
                                         const int64_t* timestamps, size_t count,
                                         rsu_trajectory** out);
RSU_API void rsu_trajectory_destroy(rsu_trajectory* trajectory);
RSU_API rsu_status rsu_trajectory_sample(const rsu_trajectory* trajectory,
                                         const rsu_time_map* map, rsu_frame** out);
RSU_API rsu_status rsu_simulate(const rsu_trajectory* trajectory,
                                const rsu_sim_config* cfg, rsu_events** out);
RSU_API rsu_status rsu_render_texture(const rsu_texture_params* params, int64_t t,
                                      rsu_frame** out);

/* Reconstruction. rs2 and map2 are required for RSU_MODE_MOA and ignored
 * otherwise. */
RSU_API rsu_status rsu_unroll(rsu_mode mode, const rsu_frame* rs1,
                              const rsu_time_map* map1, const rsu_frame* rs2,
                              const rsu_time_map* map2, const rsu_events* events,
                              const rsu_time_map* dst, const rsu_params* params,
                              rsu_frame** out);

/* Flow: two bands (dx, dy), backward convention. */
RSU_API rsu_status rsu_flow_create(int32_t height, int32_t width, const double* data,
                                   rsu_flow** out);
RSU_API void rsu_flow_destroy(rsu_flow* flow);
RSU_API rsu_status rsu_flow_shape(const rsu_flow* flow, int32_t* height, int32_t* width);
RSU_API const double* rsu_flow_data(const rsu_flow* flow);
RSU_API rsu_status rsu_flow_read(const char* path, rsu_flow** out);
RSU_API rsu_status rsu_flow_write(const rsu_flow* flow, const char* path);
RSU_API rsu_status rsu_estimate_flow(const rsu_events* events, const rsu_time_map* src,
                                     const rsu_time_map* dst,
                                     const rsu_flow_params* params, rsu_flow** out);
/* `valid` (H * W bytes) may be NULL. */
RSU_API rsu_status rsu_warp(const rsu_frame* frame, const rsu_flow* flow,
                            rsu_frame** out, uint8_t* valid);

/* Consistency. `eic` is temporal, spatial or fused; `weights` may be NULL for
 * the defaults (1, 1, 1, 0.01). */
RSU_API rsu_status rsu_consistency(const rsu_frame* rs1, const rsu_frame* rs2,
                                   const rsu_events* events, const rsu_time_map* map1,
                                   const rsu_time_map* map2, const rsu_time_map* dst,
                                   rsu_mode eic, const rsu_params* params,
                                   const double* weights, rsu_loss_report* out);
RSU_API rsu_status rsu_total_loss(double lc, double cc, double tc, double tv, double dcc,
                                  const double* weights, rsu_loss_report* out);

/* Writes a NUL-terminated report into buffer; `needed` receives the full
 * length including the terminator. RSU_ERR_RANGE when capacity is short. */
RSU_API rsu_status rsu_format_loss_report(const rsu_loss_report* report, char* buffer,
                                          size_t capacity, size_t* needed);
RSU_API rsu_status rsu_format_metric_report(const char* const* names, const double* psnr,
                                            const double* ssim, size_t count, char* buffer,
                                            size_t capacity, size_t* needed);

/* Metrics. PSNR is +inf for identical frames. */
RSU_API rsu_status rsu_psnr(const rsu_frame* a, const rsu_frame* b, double* out);
RSU_API rsu_status rsu_ssim(const rsu_frame* a, const rsu_frame* b, double* out);

/* Voxel grids. */
RSU_API rsu_status rsu_voxelize(const rsu_events* events, const rsu_time_map* src,
                                const rsu_time_map* dst, int32_t bins, rsu_voxels** out);
RSU_API void rsu_voxels_destroy(rsu_voxels* voxels);
RSU_API rsu_status rsu_voxels_info(const rsu_voxels* voxels, int32_t* bins,
                                   int32_t* height, int32_t* width, uint64_t* positive,
                                   uint64_t* negative);
RSU_API const uint32_t* rsu_voxels_data(const rsu_voxels* voxels);
RSU_API rsu_status rsu_voxels_write(const rsu_voxels* voxels, const char* path);
RSU_API rsu_status rsu_voxels_read(const char* path, rsu_voxels** out);

/* Flat key = value configuration. */
RSU_API rsu_status rsu_config_read(const char* path, rsu_config* out);
RSU_API rsu_status rsu_config_write(const rsu_config* cfg, const char* path);
RSU_API rsu_time_map rsu_config_rs_map(const rsu_config* cfg, int32_t index);

#ifdef __cplusplus
}
#endif

#endif
