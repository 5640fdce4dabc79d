#include "spatial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "segmentation.hpp"
#include "temporal.hpp"

namespace rsu {

FlowField zero_flow(int height, int width) { return FlowField(height, width, 2); }

namespace {

double bilinear(const Frame& f, double sx, double sy, int c) {
  const int W = f.width();
  const int H = f.height();
  sx = std::clamp(sx, 0.0, static_cast<double>(W - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(H - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, W - 1);
  const int y1 = std::min(y0 + 1, H - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const double top = (1.0 - fx) * f(y0, x0, c) + fx * f(y0, x1, c);
  const double bottom = (1.0 - fx) * f(y1, x0, c) + fx * f(y1, x1, c);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

WarpResult warp_backward(const Frame& frame, const FlowField& flow) {
  if (!frame.same_plane(flow) || flow.channels() != 2)
    throw Error(ErrorCode::shape, "flow field does not match the frame");
  constexpr double kEdge = 1e-9;
  const int H = frame.height();
  const int W = frame.width();
  WarpResult out{Frame(H, W, frame.channels()), Mask(H, W)};
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double sx = x + flow(y, x, 0);
      const double sy = y + flow(y, x, 1);
      const bool inside = sx >= -kEdge && sx <= W - 1 + kEdge &&
                          sy >= -kEdge && sy <= H - 1 + kEdge;
      out.valid(y, x) = inside ? 1 : 0;
      for (int c = 0; c < frame.channels(); ++c)
        out.frame(y, x, c) = bilinear(frame, sx, sy, c);
    }
  return out;
}

namespace {

using Plane = Grid<double>;

Plane box3(const Plane& in) {
  const int H = in.height();
  const int W = in.width();
  Plane out(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
          sum += in(yy, xx);
          ++n;
        }
      out(y, x) = sum / n;
    }
  return out;
}

Plane pool2(const Plane& in) {
  const int H = std::max(1, in.height() / 2);
  const int W = std::max(1, in.width() / 2);
  Plane out(H, W);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      out(std::min(y / 2, H - 1), std::min(x / 2, W - 1)) += in(y, x);
  return out;
}

double median9(std::array<double, 9> v) {
  std::nth_element(v.begin(), v.begin() + 4, v.end());
  return v[4];
}

/// Patch tiling of one pyramid level.
struct Tiling {
  int size_y = 0, size_x = 0;
  std::vector<int> top, left;  // patch origins

  static std::vector<int> origins(int extent, int size) {
    if (extent <= size) return {0};
    const int stride = std::max(1, size / 2);
    const int n = (extent - size + stride - 1) / stride + 1;
    std::vector<int> o(n);
    for (int i = 0; i < n; ++i)
      o[i] = static_cast<int>(std::lround(static_cast<double>(i) * (extent - size) / (n - 1)));
    return o;
  }

  Tiling(int H, int W, int patch)
      : size_y(std::min(patch, H)), size_x(std::min(patch, W)),
        top(origins(H, size_y)), left(origins(W, size_x)) {}

  double center_y(int i) const { return top[i] + 0.5 * (size_y - 1); }
  double center_x(int j) const { return left[j] + 0.5 * (size_x - 1); }
};

/// Values on a patch-center lattice, interpolated bilinearly between centers.
struct CenterField {
  std::vector<double> cy, cx;  // center coordinates (level-0 pixels)
  Grid<double> value;          // rows x cols x 2

  std::array<double, 2> sample(double y, double x) const {
    auto locate = [](const std::vector<double>& c, double v, int& i0, double& f) {
      if (c.size() == 1 || v <= c.front()) { i0 = 0; f = 0.0; return; }
      if (v >= c.back()) { i0 = static_cast<int>(c.size()) - 2; f = 1.0; return; }
      i0 = static_cast<int>(std::upper_bound(c.begin(), c.end(), v) - c.begin()) - 1;
      f = (v - c[i0]) / (c[i0 + 1] - c[i0]);
    };
    int iy, ix;
    double fy, fx;
    locate(cy, y, iy, fy);
    locate(cx, x, ix, fx);
    const int iy1 = std::min(iy + 1, value.height() - 1);
    const int ix1 = std::min(ix + 1, value.width() - 1);
    std::array<double, 2> out{};
    for (int c = 0; c < 2; ++c) {
      const double top = (1 - fx) * value(iy, ix, c) + fx * value(iy, ix1, c);
      const double bottom = (1 - fx) * value(iy1, ix, c) + fx * value(iy1, ix1, c);
      out[c] = (1 - fy) * top + fy * bottom;
    }
    return out;
  }
};

/// Replaces invalid lattice entries by the mean of valid 8-neighbours,
/// growing outward until every entry is filled or nothing is valid.
void fill_invalid(Grid<double>& value, Mask& valid) {
  const int R = value.height();
  const int C = value.width();
  bool any = false;
  for (auto v : valid.values()) any = any || v;
  if (!any) return;
  for (;;) {
    Mask next = valid;
    bool changed = false;
    bool missing = false;
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        if (valid(i, j)) continue;
        double sx = 0, sy = 0;
        int n = 0;
        for (int di = -1; di <= 1; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || ii >= R || jj < 0 || jj >= C || !valid(ii, jj)) continue;
            sx += value(ii, jj, 0);
            sy += value(ii, jj, 1);
            ++n;
          }
        if (n == 0) { missing = true; continue; }
        value(i, j, 0) = sx / n;
        value(i, j, 1) = sy / n;
        next(i, j) = 1;
        changed = true;
      }
    valid = std::move(next);
    if (!missing || !changed) return;
  }
}

struct Match {
  bool ok = false;
  double dx = 0, dy = 0;
};

double ncc(const Plane& b, const Plane& a, int top, int left, int sy, int sx,
           int oy, int ox) {
  const int H = a.height();
  const int W = a.width();
  double sb = 0, sa = 0, sbb = 0, saa = 0, sab = 0;
  const double n = static_cast<double>(sy) * sx;
  for (int y = top; y < top + sy; ++y)
    for (int x = left; x < left + sx; ++x) {
      const double vb = b(y, x);
      const int ya = y + oy, xa = x + ox;
      const double va = (ya >= 0 && ya < H && xa >= 0 && xa < W) ? a(ya, xa) : 0.0;
      sb += vb;
      sa += va;
      sbb += vb * vb;
      saa += va * va;
      sab += va * vb;
    }
  const double vb = sbb - sb * sb / n;
  const double va = saa - sa * sa / n;
  if (vb <= 1e-12 || va <= 1e-12) return -1.0;
  return (sab - sa * sb / n) / std::sqrt(vb * va);
}

double parabola_peak(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

Match match_patch(const Plane& a, const Plane& b, const Plane& raw_a,
                  const Plane& raw_b, int top, int left, int sy, int sx,
                  double pred_y, double pred_x, const FlowParams& p) {
  double count_b = 0;
  for (int y = top; y < top + sy; ++y)
    for (int x = left; x < left + sx; ++x) count_b += raw_b(y, x);
  double count_a = 0;
  for (int y = std::max(0, top - p.radius); y < std::min(a.height(), top + sy + p.radius); ++y)
    for (int x = std::max(0, left - p.radius); x < std::min(a.width(), left + sx + p.radius); ++x)
      count_a += raw_a(y, x);
  if (count_b < p.min_events || count_a < p.min_events) return {};

  const int r = p.radius;
  const int side = 2 * r + 1;
  const int base_y = static_cast<int>(std::lround(pred_y));
  const int base_x = static_cast<int>(std::lround(pred_x));
  std::vector<double> score(static_cast<size_t>(side) * side);
  double best = -std::numeric_limits<double>::infinity();
  int bi = r, bj = r;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      const double s = ncc(b, a, top, left, sy, sx, base_y + i - r, base_x + j - r);
      score[static_cast<size_t>(i) * side + j] = s;
      // strict improvement keeps the first maximum in scan order
      if (s > best) { best = s; bi = i; bj = j; }
    }
  if (best <= 0.0) return {};
  auto at = [&](int i, int j) { return score[static_cast<size_t>(i) * side + j]; };
  double fy = 0.0, fx = 0.0;
  if (bi > 0 && bi < side - 1) fy = parabola_peak(at(bi - 1, bj), best, at(bi + 1, bj));
  if (bj > 0 && bj < side - 1) fx = parabola_peak(at(bi, bj - 1), best, at(bi, bj + 1));
  return {true, base_x + bj - r + fx, base_y + bi - r + fy};
}

}  // namespace

PatchCorrelationFlow::PatchCorrelationFlow(FlowParams params) : params_(params) {
  if (params_.levels < 1 || params_.patch < 2 || params_.radius < 1)
    throw Error(ErrorCode::argument, "invalid flow estimator parameters");
}

FlowField PatchCorrelationFlow::estimate(const EventStream& stream,
                                         const TimeMap& src,
                                         const TimeMap& dst) const {
  require_coverage(stream, src, dst);
  const EventSegment seg = segment(stream, src, dst);
  const int H = seg.geometry.height;
  const int W = seg.geometry.width;

  std::vector<double> duration(H), length(H);
  Plane first(H, W), second(H, W), weighted_len(H, W);
  for (int y = 0; y < H; ++y) {
    const RowSlice& row = seg.rows[y];
    duration[y] = static_cast<double>(dst.row_time(y) - src.row_time(y));
    length[y] = static_cast<double>(row.length());
    for (const Event& e : row.events) {
      if (2 * (e.t - row.start) < row.length()) first(y, e.x) += 1.0;
      else second(y, e.x) += 1.0;
      weighted_len(y, e.x) += length[y];
    }
  }

  std::vector<Plane> pyr_a{first}, pyr_b{second};
  for (int l = 1; l < params_.levels; ++l) {
    if (pyr_a.back().height() / 2 < params_.patch ||
        pyr_a.back().width() / 2 < params_.patch)
      break;
    pyr_a.push_back(pool2(pyr_a.back()));
    pyr_b.push_back(pool2(pyr_b.back()));
  }

  // displacement lattice carried between levels, in level-0 pixels
  CenterField previous;
  bool have_previous = false;
  CenterField disp;
  Mask disp_valid;
  for (int l = static_cast<int>(pyr_a.size()) - 1; l >= 0; --l) {
    const Plane& raw_a = pyr_a[l];
    const Plane& raw_b = pyr_b[l];
    const Plane a = box3(raw_a);
    const Plane b = box3(raw_b);
    const double scale = std::ldexp(1.0, l);
    const Tiling tiles(a.height(), a.width(), params_.patch);
    const int rows = static_cast<int>(tiles.top.size());
    const int cols = static_cast<int>(tiles.left.size());

    CenterField field;
    field.value = Grid<double>(rows, cols, 2);
    Mask valid(rows, cols);
    for (int i = 0; i < rows; ++i) field.cy.push_back((tiles.center_y(i) + 0.5) * scale - 0.5);
    for (int j = 0; j < cols; ++j) field.cx.push_back((tiles.center_x(j) + 0.5) * scale - 0.5);

    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        std::array<double, 2> pred{0.0, 0.0};
        if (have_previous) pred = previous.sample(field.cy[i], field.cx[j]);
        const Match m = match_patch(a, b, raw_a, raw_b, tiles.top[i], tiles.left[j],
                                    tiles.size_y, tiles.size_x, pred[1] / scale,
                                    pred[0] / scale, params_);
        if (m.ok) {
          field.value(i, j, 0) = m.dx * scale;
          field.value(i, j, 1) = m.dy * scale;
          valid(i, j) = 1;
        } else {
          field.value(i, j, 0) = pred[0];
          field.value(i, j, 1) = pred[1];
        }
      }
    Mask filled = valid;
    fill_invalid(field.value, filled);
    previous = field;
    have_previous = true;
    disp = std::move(field);
    disp_valid = std::move(valid);
  }

  // per-patch rate q = 2 d / L using the event-weighted window length
  const Tiling tiles(H, W, params_.patch);
  CenterField rate = disp;
  Mask rate_valid(rate.value.height(), rate.value.width());
  for (int i = 0; i < rate.value.height(); ++i)
    for (int j = 0; j < rate.value.width(); ++j) {
      double events = 0, len = 0;
      for (int y = tiles.top[i]; y < tiles.top[i] + tiles.size_y; ++y)
        for (int x = tiles.left[j]; x < tiles.left[j] + tiles.size_x; ++x) {
          events += first(y, x) + second(y, x);
          len += weighted_len(y, x);
        }
      const bool ok = disp_valid(i, j) && events > 0 && len > 0;
      const double mean_len = ok ? len / events : 0.0;
      for (int c = 0; c < 2; ++c)
        rate.value(i, j, c) = ok ? 2.0 * disp.value(i, j, c) / mean_len : 0.0;
      rate_valid(i, j) = ok ? 1 : 0;
    }
  fill_invalid(rate.value, rate_valid);

  Grid<double> q(H, W, 2);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const auto v = rate.sample(y, x);
      q(y, x, 0) = v[0];
      q(y, x, 1) = v[1];
    }

  const double bound = std::max(H, W);
  FlowField flow(H, W, 2);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < 2; ++c) {
        std::array<double, 9> window{};
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, H - 1);
            const int xx = std::clamp(x + dx, 0, W - 1);
            window[n++] = q(yy, xx, c);
          }
        const double f = median9(window) * duration[y];
        flow(y, x, c) = std::clamp(f, -bound, bound);
      }
  return flow;
}

FlowField estimate_flow(const EventStream& stream, const TimeMap& src,
                        const TimeMap& dst, const FlowParams& params) {
  return PatchCorrelationFlow(params).estimate(stream, src, dst);
}

}  // namespace rsu
