#pragma once

#include <span>
#include <vector>

#include "framesift/image.hpp"
#include "framesift/kernels.hpp"

namespace framesift {

inline constexpr double kDefaultNightThreshold = 0.25;

/// Mean local SSIM in [-1, 1]. Throws ValidationError on a size mismatch or empty image.
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params = {});

/// Variance of the 3x3 Laplacian response; larger means sharper.
/// Throws ValidationError for images smaller than 3x3.
double blur_score(const GrayImage& img);

/// Min-max normalization to [0, 1]. A constant batch maps to 0.5.
std::vector<double> normalize_blur(std::span<const double> scores);

/// 1 when the mean luminance is below `luminance_threshold`.
int night_flag(const GrayImage& img, double luminance_threshold = kDefaultNightThreshold);

}  // namespace framesift
