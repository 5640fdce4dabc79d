#pragma once

#include <string>
#include <vector>

#include "types.hpp"

namespace rsu {

/// 10 log10(peak^2 / MSE) over all channels; +inf for identical frames.
double psnr(const Frame& a, const Frame& b, double peak = 1.0);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

/// Gaussian-windowed SSIM averaged over every fully inside window. Color
/// frames are compared on luminance.
double ssim(const Frame& a, const Frame& b, const SsimParams& params = {});

struct FrameMetrics {
  std::string name;
  double psnr = 0;
  double ssim = 0;
};

struct MetricReport {
  std::vector<FrameMetrics> frames;
  double mean_psnr = 0;  // +inf when any frame is identical
  double mean_ssim = 0;
};

MetricReport summarize(std::vector<FrameMetrics> frames);

/// `<name>.psnr=`, `<name>.ssim=` per frame, then frames, mean_psnr, mean_ssim.
std::string format_report(const MetricReport& report);

}  // namespace rsu
