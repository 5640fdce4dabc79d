// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance <path-to-rsunroll-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "compensator.hpp"
#include "consistency.hpp"
#include "fixtures.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "moa.hpp"
#include "segmentation.hpp"
#include "spatial.hpp"
#include "temporal.hpp"

namespace fs = std::filesystem;
using namespace rsu;
using namespace rsu::testing;

namespace {

// Pinned tolerances.
constexpr double kLogSlack = 1e-9;
constexpr double kMinScenePsnr = 30.0;
constexpr double kCriterion1Seconds = 5.0;
constexpr double kInvolutionRel = 1e-9;
constexpr double kCycleTol = 1e-6;
constexpr double kCriterion2Seconds = 10.0;
constexpr double kNullTol = 1e-9;
constexpr double kMaxMedianEpe = 0.5;
constexpr int kMinEventsForEpe = 5;
constexpr double kMinWarpPsnr = 35.0;
constexpr double kCriterion5Seconds = 10.0;
constexpr double kFusionSlackDb = 0.1;
constexpr double kMoaGainDb = 0.5;
constexpr double kPsnrGolden = 48.1308;
constexpr double kPsnrGoldenTol = 1e-4;
constexpr int kRoundTripCases = 100;
constexpr std::uint64_t kRoundTripSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome quantization_bound() {
  const auto start = Clock::now();
  const double eta = 0.2;
  StandardScene s(eta);
  const TemporalResult r = temporal_transition(s.seq.gt(s.rs1), s.seq.stream, s.rs1, s.mid, eta);
  const Frame gt = s.seq.gt(s.mid);
  double worst = 0.0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      if (r.saturated(y, x)) continue;
      worst = std::max(worst, std::abs(std::log(r.frame(y, x)) - std::log(gt(y, x))));
    }
  const double p = psnr(r.frame, gt);
  const double elapsed = seconds_since(start);
  return {worst <= eta + kLogSlack && p >= kMinScenePsnr && elapsed < kCriterion1Seconds,
          "max |dlog| " + fmt("%.6f", worst) + " (bound " + fmt("%.6f", eta + kLogSlack) +
              "), PSNR " + fmt("%.2f", p) + " dB, " + fmt("%.2f", elapsed) + " s"};
}

TimeMap random_map(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, int rows) {
  if (rng() % 2 == 0) return TimeMap::global(std::uniform_int_distribution<std::int64_t>(lo, hi)(rng));
  const std::int64_t a = std::uniform_int_distribution<std::int64_t>(lo, hi - 1)(rng);
  return TimeMap::rolling(a, std::uniform_int_distribution<std::int64_t>(1, hi - a)(rng), rows);
}

Outcome involution() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  double worst_rel = 0.0;
  double worst_cycle = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    TextureParams tp;
    tp.height = 24 + static_cast<int>(rng() % 24);
    tp.width = 24 + static_cast<int>(rng() % 24);
    tp.seed = rng();
    tp.lo = 0.02 + 0.1 * std::uniform_real_distribution<>(0, 1)(rng);
    tp.hi = tp.lo + 0.3 + 0.5 * std::uniform_real_distribution<>(0, 1)(rng) * (0.95 - tp.lo - 0.3);
    tp.vx = std::uniform_real_distribution<>(-0.01, 0.01)(rng);
    tp.vy = std::uniform_real_distribution<>(-0.005, 0.005)(rng);
    SimConfig cfg;
    cfg.eta = std::uniform_real_distribution<>(0.1, 0.4)(rng);
    cfg.noise = trial % 3 == 0 ? 0.0 : 0.05;
    cfg.refractory_us = trial % 4 == 1 ? 100 : 0;
    cfg.seed = rng();
    const TranslatingTexture scene(tp);
    const Sequence seq = simulate_sequence(scene, 0, 40, 101, cfg);
    const TimeMap a = random_map(rng, 0, 4000, tp.height);
    const TimeMap b = random_map(rng, 0, 4000, tp.height);
    const Frame source = seq.gt(a);
    const auto forward = temporal_transition(source, seq.stream, a, b, cfg.eta, false);
    const auto back = temporal_transition(forward.frame, seq.stream, b, a, cfg.eta, false);
    for (size_t i = 0; i < source.size(); ++i)
      worst_rel = std::max(worst_rel, std::abs(back.frame.values()[i] - source.values()[i]) /
                                          std::abs(source.values()[i]));
    const TemporalCompensator eic(cfg.eta);
    worst_cycle = std::max(worst_cycle, cycle_consistency(source, seq.stream, a, b, eic));
  }
  const double elapsed = seconds_since(start);
  return {worst_rel <= kInvolutionRel && worst_cycle <= kCycleTol && elapsed < kCriterion2Seconds,
          "max rel err " + fmt("%.3g", worst_rel) + ", max cycle loss " +
              fmt("%.3g", worst_cycle) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome static_null() {
  TextureParams tp = StandardScene::params(3);
  tp.vx = 0.0;
  const TranslatingTexture scene(tp);
  const Sequence seq = simulate_sequence(scene, 0, 50, 241, {0.2, 0, 0.0, 0});
  const TimeMap m1 = TimeMap::rolling(2000, 4000, tp.height);
  const TimeMap m2 = TimeMap::rolling(7000, 4000, tp.height);
  const TimeMap dst = TimeMap::global(4000);
  const Frame rs1 = seq.gt(m1);
  const Frame rs2 = seq.gt(m2);
  const TemporalCompensator eic(0.2);
  MoaParams mp;
  const double lc = latent_consistency(rs1, rs2, seq.stream, m1, m2, dst, eic);
  const double cc = cycle_consistency(rs1, seq.stream, m1, dst, eic);
  const double tc = temporal_consistency(rs1, rs2, seq.stream, m1, m2, eic);
  const double tv = tv_loss(estimate_flow(seq.stream, m1, dst));
  const double dcc = dual_cycle_consistency(rs1, rs2, seq.stream, m1, m2, dst, mp);
  const LossReport report = total_loss(lc, cc, tc, tv, dcc);
  const bool zeros = lc <= kNullTol && cc <= kNullTol && tc <= kNullTol && tv <= kNullTol &&
                     dcc <= kNullTol && report.total <= kNullTol;
  const bool weights = report.weights == LossWeights{1.0, 1.0, 1.0, 0.01} &&
                       total_loss(1, 1, 1, 1, 0).total == 1.0 + 1.0 + 1.0 + 0.01;
  const std::string printed = format_report(report);
  const bool printed_ok = printed.find("lambda4=0.01\n") != std::string::npos &&
                          printed.find("lambda1=1\n") != std::string::npos;
  return {zeros && weights && printed_ok && seq.stream.size() == 0,
          "events " + std::to_string(seq.stream.size()) + ", lc " + fmt("%.3g", lc) + " cc " +
              fmt("%.3g", cc) + " tc " + fmt("%.3g", tc) + " tv " + fmt("%.3g", tv) + " dcc " +
              fmt("%.3g", dcc) + ", weights (1, 1, 1, 0.01)"};
}

Outcome event_count_oracle() {
  const double eta = 0.2;
  const int H = 8, W = 8;
  bool ok = true;
  std::string detail;
  for (int k : {0, 1, 3, 7}) {
    // log ramp of amplitude k*eta over samples 0..8, then held for two samples
    std::vector<std::int64_t> times;
    std::vector<Frame> frames;
    for (int i = 0; i <= 10; ++i) {
      times.push_back(100 * i);
      const double f = std::min(i, 8) / 8.0;
      Frame frame(H, W);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          frame(y, x) = 0.05 * (1.0 + 0.01 * (y * W + x)) * std::exp(f * k * eta);
      frames.push_back(std::move(frame));
    }
    const EventStream stream = simulate_events(build_trajectory(frames, times), {eta, 0, 0.0, 0});
    Grid<int> pos(H, W), neg(H, W);
    for (const Event& e : stream.events()) (e.p > 0 ? pos : neg)(e.y, e.x) += 1;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) ok = ok && pos(y, x) == k && neg(y, x) == 0;

    const EventSegment seg = orient(segment(stream, TimeMap::global(0), TimeMap::global(1000)));
    const EventVoxelGrid grid = voxelize(seg);
    ok = ok && grid.bins == 16 &&
         grid.total_positive() == static_cast<std::uint64_t>(k) * H * W &&
         grid.total_negative() == 0;
    detail += "k=" + std::to_string(k) + ":" + std::to_string(stream.size()) + " ";
  }

  // Row-aware window on a moving scene: checksum against a brute-force count.
  StandardScene s;
  const EventVoxelGrid grid = voxelize(orient(segment(s.seq.stream, s.rs1, s.mid)));
  std::uint64_t pos = 0, neg = 0;
  for (const Event& e : s.seq.stream.events()) {
    const std::int64_t a = std::min(s.rs1.row_time(e.y), s.mid.row_time(e.y));
    const std::int64_t b = std::max(s.rs1.row_time(e.y), s.mid.row_time(e.y));
    if (e.t < a || e.t >= b) continue;
    // rows read after mid run backward, which flips polarity
    const bool backward = s.rs1.row_time(e.y) > s.mid.row_time(e.y);
    ((e.p > 0) != backward ? pos : neg) += 1;
  }
  ok = ok && grid.bins == kDefaultBins && grid.total_positive() == pos &&
       grid.total_negative() == neg && pos + neg > 0;
  detail += "| RS2GS checksum (+" + std::to_string(grid.total_positive()) + ", -" +
            std::to_string(grid.total_negative()) + ") vs oracle (+" + std::to_string(pos) +
            ", -" + std::to_string(neg) + "), N=" + std::to_string(grid.bins);
  return {ok, detail};
}

Outcome flow_sanity() {
  const auto start = Clock::now();
  TextureParams tp;
  tp.height = 64;
  tp.width = 64;
  tp.lo = 0.05;
  tp.hi = 0.8;
  tp.cell = 6.0;
  tp.seed = 11;
  tp.vx = 0.005;  // 3 px over 600 us
  tp.margin = 6.0;
  tp.ramp = 4.0;
  const TranslatingTexture scene(tp);
  const Sequence seq = simulate_sequence(scene, 0, 50, 25, {0.1, 0, 0.0, 0});
  const TimeMap src = TimeMap::global(300);
  const TimeMap dst = TimeMap::global(900);
  const FlowField flow = estimate_flow(seq.stream, src, dst);

  Grid<int> counts(tp.height, tp.width);
  for (const Event& e : seq.stream.events())
    if (e.t >= 300 && e.t < 900) counts(e.y, e.x) += 1;
  std::vector<double> epe;
  for (int y = 0; y < tp.height; ++y)
    for (int x = 0; x < tp.width; ++x)
      if (counts(y, x) >= kMinEventsForEpe)
        epe.push_back(std::hypot(flow(y, x, 0) - (-3.0), flow(y, x, 1)));
  double median = std::numeric_limits<double>::infinity();
  if (!epe.empty()) {
    std::nth_element(epe.begin(), epe.begin() + epe.size() / 2, epe.end());
    median = epe[epe.size() / 2];
  }

  FlowField truth(tp.height, tp.width, 2);
  for (int y = 0; y < tp.height; ++y)
    for (int x = 0; x < tp.width; ++x) truth(y, x, 0) = -3.0;
  const WarpResult warped = warp_backward(seq.gt(src), truth);
  const double p = psnr(warped.frame, seq.gt(dst));
  const double elapsed = seconds_since(start);
  return {median <= kMaxMedianEpe && p >= kMinWarpPsnr && elapsed < kCriterion5Seconds,
          "median EPE " + fmt("%.3f", median) + " px over " + std::to_string(epe.size()) +
              " px, GT warp PSNR " + fmt("%.2f", p) + " dB, " + fmt("%.2f", elapsed) + " s"};
}

Outcome fusion_dominance() {
  StandardScene s;
  const Frame rs = s.seq.gt(s.rs1);
  const Frame gt = s.seq.gt(s.mid);
  const double eta = 0.2;
  auto run = [&](CompensatorKind kind) {
    return psnr(make_compensator(kind, eta)->apply(rs, s.seq.stream, s.rs1, s.mid).frame, gt);
  };
  const double pt = run(CompensatorKind::temporal);
  const double ps = run(CompensatorKind::spatial);
  const double pf = run(CompensatorKind::fused);
  const bool standard_ok = pf >= std::max(pt, ps) - kFusionSlackDb;

  // Occlusion: bar sliding over a static background between two RS frames.
  OcclusionParams op;
  op.background = StandardScene::params(5);
  op.background.vx = 0.0;
  op.bar_x0 = 10.0;
  op.bar_width = 12.0;
  op.bar_vx = 0.005;
  const OcclusionScene scene(op);
  const Sequence seq = simulate_sequence(scene, 0, 50, 145, {eta, 0, 0.0, 0});
  const TimeMap m1 = TimeMap::rolling(0, 3200, 64);
  const TimeMap m2 = TimeMap::rolling(4000, 3200, 64);
  const TimeMap dst = TimeMap::global(3600);
  const Frame rs1 = seq.gt(m1);
  const Frame rs2 = seq.gt(m2);
  const Frame truth = seq.gt(dst);
  Mask region(64, 64);
  int region_size = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const bool at_dst = scene.in_bar(3600.0, x);
      const bool at1 = scene.in_bar(static_cast<double>(m1.row_time(y)), x);
      const bool at2 = scene.in_bar(static_cast<double>(m2.row_time(y)), x);
      region(y, x) = !at_dst && (at1 || at2);
      region_size += region(y, x);
    }
  MoaParams mp;
  mp.eta = eta;
  const MoaResult moa = selfunroll_m(rs1, rs2, seq.stream, m1, m2, dst, mp);
  const double p_moa = masked_psnr(moa.frame, truth, region);
  const double p1 = masked_psnr(moa.side1.candidate, truth, region);
  const double p2 = masked_psnr(moa.side2.candidate, truth, region);
  const bool occlusion_ok = p_moa >= std::max(p1, p2) + kMoaGainDb;
  return {standard_ok && occlusion_ok && region_size > 0,
          "standard: fused " + fmt("%.2f", pf) + " / spatial " + fmt("%.2f", ps) +
              " / temporal " + fmt("%.2f", pt) + " dB; occlusion (" +
              std::to_string(region_size) + " px): moa " + fmt("%.2f", p_moa) + " vs sides " +
              fmt("%.2f", p1) + " / " + fmt("%.2f", p2) + " dB"};
}

Outcome timestamp_sweep(const fs::path& cli, const fs::path& scratch);

Outcome metric_goldens() {
  std::mt19937_64 rng(5);
  Frame a(32, 32), b(32, 32);
  for (size_t i = 0; i < a.size(); ++i) {
    const int v = static_cast<int>(rng() % 255);
    a.values()[i] = v / 255.0;
    b.values()[i] = (v + 1) / 255.0;
  }
  const double p = psnr(a, b);
  const double s = ssim(a, a);
  const double inf = psnr(a, a);
  const std::string line = format_number(inf);
  return {std::abs(p - kPsnrGolden) <= kPsnrGoldenTol && s == 1.0 && std::isinf(inf) &&
              inf > 0 && line == "inf",
          "offset-1 PSNR " + fmt("%.6f", p) + " dB, ssim(a,a) " + fmt("%.17g", s) +
              ", identical PSNR " + line};
}

Outcome format_round_trips(const fs::path& scratch) {
  std::mt19937_64 rng(kRoundTripSeed);
  int evt_ok = 0, flow_ok = 0;
  for (int i = 0; i < kRoundTripCases; ++i) {
    const int H = 1 + static_cast<int>(rng() % 300);
    const int W = 1 + static_cast<int>(rng() % 300);
    std::vector<Event> events(rng() % 400);
    for (Event& e : events) {
      e.t = static_cast<std::int64_t>(rng() % 5'000'000'000ull);
      e.x = static_cast<std::uint16_t>(rng() % W);
      e.y = static_cast<std::uint16_t>(rng() % H);
      e.p = rng() % 2 ? 1 : -1;
    }
    const auto t_lo = static_cast<std::int64_t>(0);
    const auto t_hi = static_cast<std::int64_t>(5'000'000'000ll);
    const EventStream stream = EventStream::from_unsorted({H, W}, t_lo, t_hi, events);
    const fs::path evt = scratch / "rt.evt1";
    io::write_events(stream, evt);
    const std::string first = io::read_file(evt);
    const EventStream back = io::read_events(evt);
    io::write_events(back, evt);
    const auto a = stream.events();
    const auto b = back.events();
    if (io::read_file(evt) == first && std::equal(a.begin(), a.end(), b.begin(), b.end()))
      ++evt_ok;

    FlowField flow(H % 64 + 1, W % 64 + 1, 2);
    std::normal_distribution<float> n(0.0f, 5.0f);
    for (double& v : flow.values()) v = n(rng);
    const fs::path flo = scratch / "rt.flo";
    io::write_flow(flow, flo);
    const std::string fbytes = io::read_file(flo);
    const FlowField fback = io::read_flow(flo);
    io::write_flow(fback, flo);
    if (io::read_file(flo) == fbytes && fback == flow) ++flow_ok;
  }

  EventStream two({4, 4}, 0, 10, {{1, 0, 0, 1}, {5, 1, 1, -1}});
  std::string bytes = io::encode_events(two);
  // swap the two records so timestamps decrease
  std::swap_ranges(bytes.begin() + 20, bytes.begin() + 34, bytes.begin() + 34);
  bool rejected = false;
  try {
    io::decode_events(bytes);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::unsorted;
  }
  return {evt_ok == kRoundTripCases && flow_ok == kRoundTripCases && rejected,
          "EVT1 " + std::to_string(evt_ok) + "/" + std::to_string(kRoundTripCases) + ", PIEH " +
              std::to_string(flow_ok) + "/" + std::to_string(kRoundTripCases) +
              ", unsorted input " + (rejected ? "rejected" : "accepted")};
}

int run(const std::string& command, const fs::path& log) {
  const int rc = std::system((command + " >" + log.string() + " 2>&1").c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string last_line(const fs::path& log) {
  std::ifstream in(log);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return last;
}

// Events cover [t0 - 0.25T, t0 + 1.25T] with t0 = T = 4000 us.
Outcome timestamp_sweep(const fs::path& cli, const fs::path& scratch) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found"};
  const fs::path dir = scratch / "sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.txt");
    cfg << "t0_us = 4000\nreadout_T_us = 4000\nH = 48\nW = 48\neta = 0.2\n";
  }
  const std::string exe = cli.string();
  const fs::path log = dir / "log.txt";
  const std::string d = dir.string();
  if (run(exe + " scene --out " + d + "/frames --height 48 --width 48 --count 121 --dt 50 --t0 3000 --vx 0.005", log) != 0 ||
      run(exe + " simulate --frames " + d + "/frames --config " + d + "/config.txt --out " + d + "/seq --rs-count 1", log) != 0)
    return {false, "setup failed: " + last_line(log)};

  const std::string base = exe + " unroll --rs " + d + "/seq/rs_0000.png --events " + d +
                           "/seq/events.evt1 --config " + d + "/seq/config.txt --mode fused";
  const std::vector<std::pair<std::string, std::int64_t>> inside = {
      {"-0.25T", 3000}, {"0.25T", 5000}, {"0.5T", 6000}, {"0.75T", 7000}, {"1.25T", 9000}};
  int ok = 0;
  std::string joined;
  for (const auto& [spec, t] : inside) joined += (joined.empty() ? "" : ",") + spec;
  const int rc = run(base + " --out " + d + "/gs --t=" + joined, log);
  for (const auto& [spec, t] : inside) {
    char name[40];
    std::snprintf(name, sizeof name, "gs_%012lld.png", static_cast<long long>(t));
    ok += rc == 0 && fs::exists(dir / "gs" / name);
  }
  int rejected = 0;
  const std::vector<std::string> outside = {"-0.5T", "-0.26T", "1.26T", "1.5T"};
  for (const std::string& spec : outside) {
    const int code = run(base + " --out " + d + "/bad --t=" + spec, log);
    rejected += code != 0 && last_line(log).rfind("error: coverage:", 0) == 0;
  }
  return {ok == 5 && rejected == static_cast<int>(outside.size()),
          std::to_string(ok) + "/5 in-coverage frames written, " + std::to_string(rejected) + "/" +
              std::to_string(outside.size()) + " out-of-coverage requests rejected with a coverage error"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path cli = argc > 1 ? argv[1] : "";
  const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "rsu_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"quantization-bound reconstruction", quantization_bound},
      {"exact involution", involution},
      {"consistency null test", static_null},
      {"event-count oracle", event_count_oracle},
      {"flow sanity", flow_sanity},
      {"fusion dominance", fusion_dominance},
      {"timestamp sweep", [&] { return timestamp_sweep(cli, scratch); }},
      {"metric goldens", metric_goldens},
      {"format round trips", [&] { return format_round_trips(scratch); }},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
