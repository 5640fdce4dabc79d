#include "metrics.hpp"

#include <cmath>
#include <limits>

#include "consistency.hpp"

namespace rsu {

double psnr(const Frame& a, const Frame& b, double peak) {
  if (!a.same_shape(b)) throw Error(ErrorCode::shape, "psnr operands differ in shape");
  if (a.empty()) throw Error(ErrorCode::shape, "psnr of empty frames");
  double se = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Frame& a, const Frame& b, const SsimParams& params) {
  if (!a.same_shape(b)) throw Error(ErrorCode::shape, "ssim operands differ in shape");
  const Frame ga = luminance(a);
  const Frame gb = luminance(b);
  const int H = ga.height();
  const int W = ga.width();
  const int n = params.window;
  if (H < n || W < n)
    throw Error(ErrorCode::shape, "ssim needs images at least as large as the window");

  std::vector<double> kernel(static_cast<size_t>(n) * n);
  double ksum = 0.0;
  const int half = n / 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d2 = static_cast<double>((i - half) * (i - half) + (j - half) * (j - half));
      kernel[static_cast<size_t>(i) * n + j] = std::exp(-d2 / (2.0 * params.sigma * params.sigma));
      ksum += kernel[static_cast<size_t>(i) * n + j];
    }
  for (double& k : kernel) k /= ksum;

  const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
  const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
  double total = 0.0;
  size_t count = 0;
  for (int y = 0; y + n <= H; ++y)
    for (int x = 0; x + n <= W; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double k = kernel[static_cast<size_t>(i) * n + j];
          const double va = ga(y + i, x + j);
          const double vb = gb(y + i, x + j);
          ma += k * va;
          mb += k * vb;
          saa += k * (va * va);
          sbb += k * (vb * vb);
          sab += k * (va * vb);
        }
      const double var_a = saa - ma * ma;
      const double var_b = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2 * (ma * mb) + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

MetricReport summarize(std::vector<FrameMetrics> frames) {
  MetricReport r;
  r.frames = std::move(frames);
  if (r.frames.empty()) return r;
  for (const FrameMetrics& f : r.frames) {
    r.mean_psnr += f.psnr;
    r.mean_ssim += f.ssim;
  }
  r.mean_psnr /= static_cast<double>(r.frames.size());
  r.mean_ssim /= static_cast<double>(r.frames.size());
  return r;
}

std::string format_report(const MetricReport& report) {
  std::string out;
  for (const FrameMetrics& f : report.frames) {
    out += f.name + ".psnr=" + format_number(f.psnr) + "\n";
    out += f.name + ".ssim=" + format_number(f.ssim) + "\n";
  }
  out += "frames=" + std::to_string(report.frames.size()) + "\n";
  out += "mean_psnr=" + format_number(report.mean_psnr) + "\n";
  out += "mean_ssim=" + format_number(report.mean_ssim) + "\n";
  return out;
}

}  // namespace rsu
