#include "framesift/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "framesift/error.hpp"

namespace framesift {

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params) {
  if (a.empty() || b.empty()) throw ValidationError("ssim: empty image");
  if (a.width != b.width || a.height != b.height)
    throw ValidationError("ssim: size mismatch " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                          " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  return kernels::parallel::ssim(a, b, params);
}

double blur_score(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw ValidationError("blur_score: image must be at least 3x3");
  return kernels::parallel::laplacian_variance(img);
}

std::vector<double> normalize_blur(std::span<const double> scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double range = *hi - *lo;
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = range > 0.0 ? (scores[i] - *lo) / range : 0.5;
  return out;
}

int night_flag(const GrayImage& img, double luminance_threshold) {
  if (img.empty()) throw ValidationError("night_flag: empty image");
  const double mean = std::accumulate(img.pixels.begin(), img.pixels.end(), 0.0) / img.pixels.size();
  return mean < luminance_threshold ? 1 : 0;
}

}  // namespace framesift
