#pragma once

// Synthetic images, in-memory frame loaders and scratch directories for tests.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "framesift/image.hpp"
#include "framesift/selector.hpp"
#include "framesift/types.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using framesift::FrameKey;
using framesift::FrameRef;
using framesift::GrayImage;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("framesift_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GrayImage constant(int w, int h, double v) { return GrayImage(w, h, v); }

inline GrayImage noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = u(rng);
  return img;
}

inline GrayImage checkerboard(int w, int h, int cell) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = ((x / cell + y / cell) % 2) ? 1.0 : 0.0;
  return img;
}

/// Box filter with replicated borders; radius 2 is a 5x5 box.
inline GrayImage box_blur(const GrayImage& src, int radius) {
  GrayImage out(src.width, src.height);
  const double area = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = std::clamp(x + dx, 0, src.width - 1);
          const int yy = std::clamp(y + dy, 0, src.height - 1);
          acc += src.at(xx, yy);
        }
      out.at(x, y) = acc / area;
    }
  return out;
}

/// Smooth random scene: a few Gaussian blobs on a gradient. Distinct seeds
/// give structurally different images; nearby pixels are correlated so
/// small perturbations keep SSIM high.
inline GrayImage scene(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  const double gx = u(rng) - 0.5, gy = u(rng) - 0.5;
  struct Blob { double cx, cy, r, a; };
  std::vector<Blob> blobs;
  for (int i = 0; i < 6; ++i) blobs.push_back({u(rng) * w, u(rng) * h, 2.0 + u(rng) * w / 4.0, u(rng) - 0.5});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.5 + gx * (x - w / 2.0) / w + gy * (y - h / 2.0) / h;
      for (const auto& b : blobs) {
        const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
        v += b.a * std::exp(-d2 / (2 * b.r * b.r));
      }
      img.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

/// Adds small uniform jitter, clamped to [0, 1].
inline GrayImage jitter(const GrayImage& src, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  GrayImage out = src;
  for (auto& p : out.pixels) p = std::clamp(p + u(rng), 0.0, 1.0);
  return out;
}

inline std::vector<FrameRef> frames(const std::string& seq, std::size_t n) {
  std::vector<FrameRef> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({seq, static_cast<std::int64_t>(i), std::nullopt});
  return out;
}

/// Frame loader backed by a map; throws for unknown frames.
struct MemoryImages {
  std::map<FrameKey, GrayImage> images;
  mutable std::size_t loads = 0;

  void put(const FrameRef& f, GrayImage img) { images[f.key()] = std::move(img); }

  framesift::FrameLoader loader() const {
    return [this](const FrameRef& f) -> GrayImage {
      ++loads;
      auto it = images.find(f.key());
      if (it == images.end()) throw std::runtime_error("no image for " + f.sequence_id + "#" +
                                                       std::to_string(f.frame_index));
      return it->second;
    };
  }
};

}  // namespace fixtures
