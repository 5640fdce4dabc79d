// Command-line front end. Talks to the library only through the C API.

#include <rsunroll/rsunroll.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string code;
  std::string message;
  int exit_code = 1;
};

[[noreturn]] void usage_error(const std::string& message) { throw Failure{"usage", message, 2}; }

void check(rsu_status status, const std::string& context = {}) {
  if (status == RSU_OK) return;
  std::string message = rsu_last_error();
  if (!context.empty()) message = context + ": " + message;
  throw Failure{rsu_status_name(status), message, 1};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using FramePtr = std::unique_ptr<rsu_frame, Deleter<rsu_frame, rsu_frame_destroy>>;
using EventsPtr = std::unique_ptr<rsu_events, Deleter<rsu_events, rsu_events_destroy>>;
using TrajectoryPtr =
    std::unique_ptr<rsu_trajectory, Deleter<rsu_trajectory, rsu_trajectory_destroy>>;
using VoxelsPtr = std::unique_ptr<rsu_voxels, Deleter<rsu_voxels, rsu_voxels_destroy>>;

FramePtr read_png(const fs::path& path) {
  rsu_frame* f = nullptr;
  check(rsu_frame_read_png(path.string().c_str(), &f), path.string());
  return FramePtr(f);
}

void write_png(const rsu_frame* frame, const fs::path& path, int depth) {
  check(rsu_frame_write_png(frame, path.string().c_str(), depth), path.string());
}

rsu_config read_config(const fs::path& path) {
  rsu_config cfg{};
  check(rsu_config_read(path.string().c_str(), &cfg), path.string());
  return cfg;
}

// Events with the coverage recorded in the config, if any.
EventsPtr read_events(const fs::path& path, const rsu_config& cfg) {
  rsu_events* e = nullptr;
  check(rsu_events_read(path.string().c_str(), &e), path.string());
  EventsPtr events(e);
  int32_t h = 0, w = 0;
  check(rsu_events_info(e, &h, &w, nullptr, nullptr, nullptr));
  if (h != cfg.height || w != cfg.width)
    throw Failure{"geometry", "event geometry " + std::to_string(h) + "x" + std::to_string(w) +
                                  " differs from config " + std::to_string(cfg.height) + "x" +
                                  std::to_string(cfg.width)};
  if (cfg.has_coverage)
    check(rsu_events_set_coverage(e, cfg.coverage_start_us, cfg.coverage_end_us), "coverage");
  return events;
}

// "1500" is an absolute time in microseconds; "0.25T" is t0 + 0.25 * readout.
int64_t parse_time(const std::string& text, const rsu_config& cfg) {
  if (text.empty()) usage_error("empty time value");
  try {
    size_t used = 0;
    if (text.back() == 'T') {
      const std::string num = text.substr(0, text.size() - 1);
      const double k = num.empty() ? 1.0 : std::stod(num, &used);
      if (!num.empty() && used != num.size()) throw std::invalid_argument(text);
      return cfg.t0_us + static_cast<int64_t>(std::llround(k * static_cast<double>(cfg.readout_us)));
    }
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::logic_error&) {
    usage_error("cannot parse time `" + text + "` (microseconds or <k>T)");
  }
}

// "rs:<index>" or "gs:<time>".
rsu_time_map parse_map(const std::string& text, const rsu_config& cfg) {
  if (text.rfind("rs:", 0) == 0) {
    try {
      return rsu_config_rs_map(&cfg, std::stoi(text.substr(3)));
    } catch (const std::logic_error&) {
      usage_error("bad RS frame index in `" + text + "`");
    }
  }
  if (text.rfind("gs:", 0) == 0) return rsu_global_map(parse_time(text.substr(3), cfg));
  usage_error("time map must be rs:<index> or gs:<time>, got `" + text + "`");
}

std::string time_tag(int64_t t) {
  char buf[40];
  if (t < 0)
    std::snprintf(buf, sizeof buf, "n%012lld", static_cast<long long>(-t));
  else
    std::snprintf(buf, sizeof buf, "%012lld", static_cast<long long>(t));
  return buf;
}

std::string gs_name(int64_t t) { return "gs_" + time_tag(t) + ".png"; }

rsu_params params_from(const rsu_config& cfg) {
  rsu_params p;
  rsu_params_default(&p);
  p.eta = cfg.eta;
  p.flow = cfg.flow;
  p.lambda_len = cfg.lambda_len;
  return p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{"io", "cannot create " + dir.string() + ": " + ec.message()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{"io", "cannot write " + path.string()};
}

// Runs job(i) for i in [0, n) on a small pool; the first failure in index
// order is rethrown.
template <class Job>
void parallel_for(size_t n, Job job) {
  std::vector<std::unique_ptr<Failure>> failures(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < n;) {
      try {
        job(i);
      } catch (const Failure& f) {
        failures[i] = std::make_unique<Failure>(f);
      }
    }
  };
  const size_t threads = std::clamp<size_t>(std::thread::hardware_concurrency(), 1, std::max<size_t>(n, 1));
  std::vector<std::thread> pool;
  for (size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) throw *f;
}

std::string format_loss(const rsu_loss_report& r) {
  size_t needed = 0;
  rsu_format_loss_report(&r, nullptr, 0, &needed);
  std::string buf(needed, '\0');
  check(rsu_format_loss_report(&r, buf.data(), buf.size(), nullptr));
  buf.pop_back();
  return buf;
}

// --- scene -----------------------------------------------------------------

struct SceneArgs {
  fs::path out;
  int count = 241;
  int64_t dt = 50;
  int64_t t0 = 0;
  rsu_texture_params texture{};
  int bit_depth = 16;
};

int run_scene(const SceneArgs& a) {
  ensure_dir(a.out);
  std::ostringstream index;
  for (int i = 0; i < a.count; ++i) {
    const int64_t t = a.t0 + i * a.dt;
    rsu_frame* f = nullptr;
    check(rsu_render_texture(&a.texture, t, &f));
    FramePtr frame(f);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.png", i);
    write_png(frame.get(), a.out / name, a.bit_depth);
    index << name << ' ' << t << '\n';
  }
  write_text(a.out / "timestamps.txt", index.str());
  std::cout << "frames=" << a.count << "\n";
  return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  fs::path frames;
  fs::path config;
  fs::path out;
  int rs_count = 2;
  std::vector<std::string> gt_times;
  rsu_sim_config sim{};
  bool eta_given = false;
  int bit_depth = 16;
};

int run_simulate(SimulateArgs a) {
  rsu_config cfg = read_config(a.config);
  if (!a.eta_given) a.sim.eta = cfg.eta;
  if (a.rs_count < 0) usage_error("--rs-count must be >= 0");

  std::ifstream index(a.frames / "timestamps.txt");
  if (!index) throw Failure{"io", "missing " + (a.frames / "timestamps.txt").string()};
  std::vector<FramePtr> frames;
  std::vector<int64_t> times;
  std::string line;
  while (std::getline(index, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    long long t;
    if (!(ls >> name >> t)) throw Failure{"format", "bad timestamps line: " + line};
    frames.push_back(read_png(a.frames / name));
    times.push_back(t);
  }
  if (frames.empty()) throw Failure{"argument", "no frames listed in " + a.frames.string()};
  std::vector<const rsu_frame*> raw;
  for (auto& f : frames) raw.push_back(f.get());
  rsu_trajectory* tr = nullptr;
  check(rsu_trajectory_create(raw.data(), times.data(), raw.size(), &tr), "frames");
  TrajectoryPtr trajectory(tr);
  int32_t h = 0, w = 0;
  check(rsu_frame_shape(raw[0], &h, &w, nullptr));
  if (h != cfg.height || w != cfg.width)
    throw Failure{"geometry", "frames are " + std::to_string(h) + "x" + std::to_string(w) +
                                  " but config says " + std::to_string(cfg.height) + "x" +
                                  std::to_string(cfg.width)};

  rsu_events* ev = nullptr;
  check(rsu_simulate(trajectory.get(), &a.sim, &ev));
  EventsPtr events(ev);

  ensure_dir(a.out);
  ensure_dir(a.out / "gt");
  std::ostringstream manifest;
  for (int i = 0; i < a.rs_count; ++i) {
    const rsu_time_map map = rsu_config_rs_map(&cfg, i);
    rsu_frame* f = nullptr;
    check(rsu_trajectory_sample(trajectory.get(), &map, &f), "RS frame " + std::to_string(i));
    FramePtr frame(f);
    char name[32];
    std::snprintf(name, sizeof name, "rs_%04d.png", i);
    write_png(frame.get(), a.out / name, a.bit_depth);
    manifest << name << " rolling t0=" << map.t << " readout=" << map.readout
             << " rows=" << map.rows << "\n";
  }
  for (const std::string& spec : a.gt_times) {
    const int64_t t = parse_time(spec, cfg);
    const rsu_time_map map = rsu_global_map(t);
    rsu_frame* f = nullptr;
    check(rsu_trajectory_sample(trajectory.get(), &map, &f), "GT at " + spec);
    FramePtr frame(f);
    const std::string name = "gt/" + gs_name(t);
    write_png(frame.get(), a.out / name, a.bit_depth);
    manifest << name << " global t=" << t << " request=" << spec << "\n";
  }
  check(rsu_events_write(events.get(), (a.out / "events.evt1").string().c_str()), "events");
  size_t count = 0;
  int64_t t_min = 0, t_max = 0;
  check(rsu_events_info(events.get(), nullptr, nullptr, &t_min, &t_max, &count));
  manifest << "events.evt1 events count=" << count << " coverage=" << t_min << "," << t_max
           << "\n";
  write_text(a.out / "manifest.txt", manifest.str());

  cfg.has_coverage = 1;
  cfg.coverage_start_us = t_min;
  cfg.coverage_end_us = t_max;
  check(rsu_config_write(&cfg, (a.out / "config.txt").string().c_str()), "config");
  std::cout << "events=" << count << "\nrs_frames=" << a.rs_count
            << "\ngt_frames=" << a.gt_times.size() << "\n";
  return 0;
}

// --- unroll ----------------------------------------------------------------

struct UnrollArgs {
  fs::path rs;
  fs::path rs2;
  fs::path events;
  fs::path config;
  fs::path out;
  std::vector<std::string> times;
  std::string mode = "fused";
  int rs_index = 0;
  int bit_depth = 16;
};

rsu_mode parse_mode(const std::string& mode, bool allow_moa) {
  if (mode == "temporal") return RSU_MODE_TEMPORAL;
  if (mode == "spatial") return RSU_MODE_SPATIAL;
  if (mode == "fused") return RSU_MODE_FUSED;
  if (mode == "moa" && allow_moa) return RSU_MODE_MOA;
  usage_error("unknown mode `" + mode + "`");
}

int run_unroll(const UnrollArgs& a) {
  const rsu_mode mode = parse_mode(a.mode, true);
  if (mode == RSU_MODE_MOA && a.rs2.empty()) usage_error("--mode moa requires --rs2");
  if (a.times.empty()) usage_error("--t needs at least one time");
  const rsu_config cfg = read_config(a.config);
  const EventsPtr events = read_events(a.events, cfg);
  const FramePtr rs1 = read_png(a.rs);
  FramePtr rs2;
  if (mode == RSU_MODE_MOA) rs2 = read_png(a.rs2);
  const rsu_time_map map1 = rsu_config_rs_map(&cfg, a.rs_index);
  const rsu_time_map map2 = rsu_config_rs_map(&cfg, a.rs_index + 1);
  const rsu_params params = params_from(cfg);

  std::vector<int64_t> targets;
  for (const std::string& s : a.times) targets.push_back(parse_time(s, cfg));
  ensure_dir(a.out);
  std::vector<std::string> names(targets.size());
  parallel_for(targets.size(), [&](size_t i) {
    const rsu_time_map dst = rsu_global_map(targets[i]);
    rsu_frame* f = nullptr;
    check(rsu_unroll(mode, rs1.get(), &map1, rs2.get(), &map2, events.get(), &dst, &params, &f),
          "t=" + a.times[i]);
    FramePtr frame(f);
    names[i] = gs_name(targets[i]);
    write_png(frame.get(), a.out / names[i], a.bit_depth);
  });
  for (size_t i = 0; i < targets.size(); ++i)
    std::cout << names[i] << " t=" << targets[i] << "\n";
  return 0;
}

// --- consistency -----------------------------------------------------------

struct ConsistencyArgs {
  fs::path rs;
  fs::path rs2;
  fs::path events;
  fs::path config;
  fs::path out;
  std::string time = "0.5T";
  std::string eic = "fused";
  std::vector<double> weights;
  int rs_index = 0;
};

int run_consistency(const ConsistencyArgs& a) {
  const rsu_mode eic = parse_mode(a.eic, false);
  if (!a.weights.empty() && a.weights.size() != 4) usage_error("--weights takes four values");
  const rsu_config cfg = read_config(a.config);
  const EventsPtr events = read_events(a.events, cfg);
  const FramePtr rs1 = read_png(a.rs);
  const FramePtr rs2 = read_png(a.rs2);
  const rsu_time_map map1 = rsu_config_rs_map(&cfg, a.rs_index);
  const rsu_time_map map2 = rsu_config_rs_map(&cfg, a.rs_index + 1);
  const rsu_time_map dst = rsu_global_map(parse_time(a.time, cfg));
  const rsu_params params = params_from(cfg);
  rsu_loss_report report{};
  check(rsu_consistency(rs1.get(), rs2.get(), events.get(), &map1, &map2, &dst, eic, &params,
                        a.weights.empty() ? nullptr : a.weights.data(), &report));
  const std::string text = format_loss(report);
  std::cout << text;
  if (!a.out.empty()) write_text(a.out, text);
  return 0;
}

// --- evaluate --------------------------------------------------------------

std::vector<std::string> png_names(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) usage_error(dir.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

int run_evaluate(const fs::path& pred, const fs::path& gt, const fs::path& out) {
  const auto pred_names = png_names(pred);
  const auto gt_names = png_names(gt);
  if (pred_names.empty() || gt_names.empty()) usage_error("prediction and GT directories need PNG files");
  if (pred_names != gt_names) {
    std::vector<std::string> diff;
    std::set_symmetric_difference(pred_names.begin(), pred_names.end(), gt_names.begin(),
                                  gt_names.end(), std::back_inserter(diff));
    throw Failure{"argument", "filename mismatch, e.g. " + diff.front()};
  }
  const size_t n = pred_names.size();
  std::vector<double> psnr(n), ssim(n);
  std::vector<std::string> stems(n);
  parallel_for(n, [&](size_t i) {
    const FramePtr p = read_png(pred / pred_names[i]);
    const FramePtr g = read_png(gt / gt_names[i]);
    check(rsu_psnr(p.get(), g.get(), &psnr[i]), pred_names[i]);
    check(rsu_ssim(p.get(), g.get(), &ssim[i]), pred_names[i]);
    stems[i] = fs::path(pred_names[i]).stem().string();
  });
  std::vector<const char*> raw;
  for (const auto& s : stems) raw.push_back(s.c_str());
  size_t needed = 0;
  rsu_format_metric_report(raw.data(), psnr.data(), ssim.data(), n, nullptr, 0, &needed);
  std::string text(needed, '\0');
  check(rsu_format_metric_report(raw.data(), psnr.data(), ssim.data(), n, text.data(),
                                 text.size(), nullptr));
  text.pop_back();
  std::cout << text;
  if (!out.empty()) write_text(out, text);
  return 0;
}

// --- voxelize --------------------------------------------------------------

struct VoxelizeArgs {
  fs::path events;
  fs::path config;
  fs::path out;
  std::string src = "rs:0";
  std::string dst = "gs:0.5T";
  int bins = 0;
};

int run_voxelize(const VoxelizeArgs& a) {
  const rsu_config cfg = read_config(a.config);
  const EventsPtr events = read_events(a.events, cfg);
  const rsu_time_map src = parse_map(a.src, cfg);
  const rsu_time_map dst = parse_map(a.dst, cfg);
  const int bins = a.bins > 0 ? a.bins : cfg.bins;
  rsu_voxels* v = nullptr;
  check(rsu_voxelize(events.get(), &src, &dst, bins, &v));
  const VoxelsPtr voxels(v);
  check(rsu_voxels_write(voxels.get(), a.out.string().c_str()), a.out.string());
  int32_t n = 0, h = 0, w = 0;
  uint64_t pos = 0, neg = 0;
  check(rsu_voxels_info(voxels.get(), &n, &h, &w, &pos, &neg));
  std::cout << "bins=" << n << "\nheight=" << h << "\nwidth=" << w << "\npositive=" << pos
            << "\nnegative=" << neg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rolling-shutter unrolling with event streams"};
  app.require_subcommand(1);

  SceneArgs scene;
  rsu_texture_params_default(&scene.texture);
  auto* sc = app.add_subcommand("scene", "Render a translating value-noise texture sequence");
  sc->add_option("--out", scene.out, "Output directory")->required();
  sc->add_option("--count", scene.count, "Number of frames")->check(CLI::PositiveNumber);
  sc->add_option("--dt", scene.dt, "Frame spacing (us)")->check(CLI::PositiveNumber);
  sc->add_option("--t0", scene.t0, "First timestamp (us)");
  sc->add_option("--height", scene.texture.height);
  sc->add_option("--width", scene.texture.width);
  sc->add_option("--lo", scene.texture.lo);
  sc->add_option("--hi", scene.texture.hi);
  sc->add_option("--cell", scene.texture.cell);
  sc->add_option("--seed", scene.texture.seed);
  sc->add_option("--vx", scene.texture.vx, "px per us");
  sc->add_option("--vy", scene.texture.vy, "px per us");
  sc->add_option("--margin", scene.texture.margin);
  sc->add_option("--ramp", scene.texture.ramp);
  sc->add_option("--bit-depth", scene.bit_depth)->check(CLI::IsMember({8, 16}));

  SimulateArgs sim;
  rsu_sim_config_default(&sim.sim);
  auto* si = app.add_subcommand("simulate", "Synthesize RS frames, GT frames and events");
  si->add_option("--frames", sim.frames, "Directory with timestamps.txt and PNG frames")->required();
  si->add_option("--config", sim.config, "Timing config")->required();
  si->add_option("--out", sim.out, "Output directory")->required();
  si->add_option("--rs-count", sim.rs_count, "Number of RS frames");
  si->add_option("--gt-t", sim.gt_times, "GT timestamps (us or <k>T)")->delimiter(',')->allow_extra_args(false);
  si->add_option("--eta", sim.sim.eta, "Contrast threshold (default: config)")
      ->each([&](const std::string&) { sim.eta_given = true; });
  si->add_option("--noise", sim.sim.noise);
  si->add_option("--refractory", sim.sim.refractory_us, "us");
  si->add_option("--seed", sim.sim.seed);
  si->add_option("--bit-depth", sim.bit_depth)->check(CLI::IsMember({8, 16}));

  UnrollArgs un;
  auto* ur = app.add_subcommand("unroll", "Reconstruct GS frames at requested times");
  ur->add_option("--rs", un.rs, "First RS frame")->required();
  ur->add_option("--rs2", un.rs2, "Second RS frame (moa)");
  ur->add_option("--events", un.events)->required();
  ur->add_option("--config", un.config)->required();
  ur->add_option("--t", un.times, "Target times (us or <k>T)")->required()->delimiter(',')->allow_extra_args(false);
  ur->add_option("--mode", un.mode, "temporal|spatial|fused|moa");
  ur->add_option("--rs-index", un.rs_index, "Index of --rs in the RS sequence");
  ur->add_option("--out", un.out)->required();
  ur->add_option("--bit-depth", un.bit_depth)->check(CLI::IsMember({8, 16}));

  ConsistencyArgs co;
  auto* cs = app.add_subcommand("consistency", "Report self-supervised consistency losses");
  cs->add_option("--rs", co.rs)->required();
  cs->add_option("--rs2", co.rs2)->required();
  cs->add_option("--events", co.events)->required();
  cs->add_option("--config", co.config)->required();
  cs->add_option("--t", co.time, "Latent GS time (us or <k>T)");
  cs->add_option("--eic", co.eic, "temporal|spatial|fused");
  cs->add_option("--weights", co.weights, "lambda1..lambda4")->delimiter(',')->allow_extra_args(false);
  cs->add_option("--rs-index", co.rs_index);
  cs->add_option("--out", co.out, "Report file");

  fs::path pred, gt, eval_out;
  auto* ev = app.add_subcommand("evaluate", "PSNR/SSIM of predicted frames against GT");
  ev->add_option("--pred", pred)->required();
  ev->add_option("--gt", gt)->required();
  ev->add_option("--out", eval_out, "Report file");

  VoxelizeArgs vx;
  auto* vo = app.add_subcommand("voxelize", "Bin an event segment into a 2N x H x W grid");
  vo->add_option("--events", vx.events)->required();
  vo->add_option("--config", vx.config)->required();
  vo->add_option("--src", vx.src, "rs:<index> or gs:<time>");
  vo->add_option("--dst", vx.dst, "rs:<index> or gs:<time>");
  vo->add_option("--bins", vx.bins, "Bins per polarity (default: config bins_N)");
  vo->add_option("--out", vx.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sc) return run_scene(scene);
    if (*si) return run_simulate(sim);
    if (*ur) return run_unroll(un);
    if (*cs) return run_consistency(co);
    if (*ev) return run_evaluate(pred, gt, eval_out);
    if (*vo) return run_voxelize(vx);
  } catch (const Failure& f) {
    std::cout.flush();
    std::cerr << "error: " << f.code << ": " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
