#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace framesift {

/// Row-major grayscale image with pixels in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0);
  GrayImage(int w, int h, std::vector<double> px);

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const { return pixels.empty(); }
  bool operator==(const GrayImage&) const = default;
};

/// Interleaved RGB, channels in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> channels;  // r, g, b per pixel
};

inline constexpr std::array<double, 3> kBt601Weights{0.299, 0.587, 0.114};

/// Weighted channel sum, clamped to [0, 1]. Weights must be non-negative.
GrayImage to_gray(const RgbImage& image, const std::array<double, 3>& weights = kBt601Weights);

/// Decodes PNG/JPEG/PNM (8 or 16 bit) from disk.
RgbImage load_rgb(const std::filesystem::path& path);
GrayImage load_gray(const std::filesystem::path& path,
                    const std::array<double, 3>& weights = kBt601Weights);
/// 8-bit grayscale PNG; used for fixtures.
void save_gray_png(const GrayImage& image, const std::filesystem::path& path);

}  // namespace framesift
