#include "consistency.hpp"

#include <cmath>
#include <cstdio>

namespace rsu {

namespace {

double masked_mean_abs(const Frame& a, const Frame& b, const Mask* va,
                       const Mask* vb) {
  if (!a.same_shape(b))
    throw Error(ErrorCode::shape, "loss operands differ in shape");
  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (va && !va->empty() && !(*va)(y, x)) continue;
      if (vb && !vb->empty() && !(*vb)(y, x)) continue;
      for (int c = 0; c < a.channels(); ++c) {
        sum += std::abs(a(y, x, c) - b(y, x, c));
        ++n;
      }
    }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

double latent_consistency(const Frame& rs1, const Frame& rs2,
                          const EventStream& stream, const TimeMap& map1,
                          const TimeMap& map2, const TimeMap& dst,
                          const Compensator& eic) {
  const Transition a = eic.apply(rs1, stream, map1, dst);
  const Transition b = eic.apply(rs2, stream, map2, dst);
  return masked_mean_abs(a.frame, b.frame, &a.valid, &b.valid);
}

double cycle_consistency(const Frame& rs, const EventStream& stream,
                         const TimeMap& rs_map, const TimeMap& dst,
                         const Compensator& eic) {
  const Transition gs = eic.apply(rs, stream, rs_map, dst);
  const Transition back = eic.apply(gs.frame, stream, dst, rs_map);
  return masked_mean_abs(back.frame, rs, &gs.valid, &back.valid);
}

double temporal_consistency(const Frame& rs1, const Frame& rs2,
                            const EventStream& stream, const TimeMap& map1,
                            const TimeMap& map2, const Compensator& eic) {
  const Transition to2 = eic.apply(rs1, stream, map1, map2);
  const Transition to1 = eic.apply(rs2, stream, map2, map1);
  return masked_mean_abs(to2.frame, rs2, &to2.valid, nullptr) +
         masked_mean_abs(to1.frame, rs1, &to1.valid, nullptr);
}

double tv_loss(const FlowField& flow) {
  const int H = flow.height();
  const int W = flow.width();
  double total = 0.0;
  for (int c = 0; c < flow.channels(); ++c) {
    double gx = 0.0, gy = 0.0;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x + 1 < W; ++x) gx += std::abs(flow(y, x + 1, c) - flow(y, x, c));
    for (int y = 0; y + 1 < H; ++y)
      for (int x = 0; x < W; ++x) gy += std::abs(flow(y + 1, x, c) - flow(y, x, c));
    if (W > 1) total += gx / (static_cast<double>(H) * (W - 1));
    if (H > 1) total += gy / (static_cast<double>(H - 1) * W);
  }
  return total;
}

double dual_cycle_consistency(const Frame& rs1, const Frame& rs2,
                              const EventStream& stream, const TimeMap& map1,
                              const TimeMap& map2, const TimeMap& dst,
                              const MoaParams& params) {
  const Frame gs = selfunroll_m(rs1, rs2, stream, map1, map2, dst, params).frame;
  const Frame rs1_again =
      fuse_two_sources(gs, dst, rs2, map2, stream, map1, params).frame;
  const Frame rs2_again =
      fuse_two_sources(gs, dst, rs1, map1, stream, map2, params).frame;
  return masked_mean_abs(rs1_again, rs1, nullptr, nullptr) +
         masked_mean_abs(rs2_again, rs2, nullptr, nullptr);
}

LossReport total_loss(double lc, double cc, double tc, double tv, double dcc,
                      const LossWeights& weights) {
  for (double v : {lc, cc, tc, tv, dcc})
    if (!(v >= 0.0)) throw Error(ErrorCode::argument, "loss components must be >= 0");
  LossReport r;
  r.lc = lc;
  r.cc = cc;
  r.tc = tc;
  r.tv = tv;
  r.dcc = dcc;
  r.weights = weights;
  r.total = weights[0] * lc + weights[1] * cc + weights[2] * tc + weights[3] * tv;
  return r;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string format_report(const LossReport& r) {
  std::string out;
  auto line = [&](const char* name, double v) {
    out += name;
    out += '=';
    out += format_number(v);
    out += '\n';
  };
  line("lc", r.lc);
  line("cc", r.cc);
  line("tc", r.tc);
  line("tv", r.tv);
  line("dcc", r.dcc);
  line("total", r.total);
  line("lambda1", r.weights[0]);
  line("lambda2", r.weights[1]);
  line("lambda3", r.weights[2]);
  line("lambda4", r.weights[3]);
  return out;
}

}  // namespace rsu
