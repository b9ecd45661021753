#include "framesift/image.hpp"

#include <algorithm>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "framesift/error.hpp"

namespace framesift {

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ValidationError("image dimensions must be positive");
  if (!(fill >= 0.0 && fill <= 1.0)) throw ValidationError("pixel values must be in [0,1]");
  pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

GrayImage::GrayImage(int w, int h, std::vector<double> px) : width(w), height(h), pixels(std::move(px)) {
  if (w <= 0 || h <= 0) throw ValidationError("image dimensions must be positive");
  if (pixels.size() != static_cast<std::size_t>(w) * h)
    throw ValidationError("pixel count does not match " + std::to_string(w) + "x" + std::to_string(h));
  for (double v : pixels)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("pixel values must be in [0,1]");
}

GrayImage to_gray(const RgbImage& image, const std::array<double, 3>& weights) {
  if (image.width <= 0 || image.height <= 0 || image.channels.empty())
    throw ValidationError("cannot convert an empty image");
  if (image.channels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw ValidationError("RGB buffer size does not match its dimensions");
  for (double w : weights)
    if (!(w >= 0.0)) throw ValidationError("grayscale weights must be non-negative");
  GrayImage gray(image.width, image.height);
  for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
    const double* px = &image.channels[3 * i];
    gray.pixels[i] = std::clamp(weights[0] * px[0] + weights[1] * px[1] + weights[2] * px[2], 0.0, 1.0);
  }
  return gray;
}

RgbImage load_rgb(const std::filesystem::path& path) {
  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
  if (raw.empty()) throw IoError("cannot read image " + path.string());
  const double scale = raw.depth() == CV_16U ? 1.0 / 65535.0 : raw.depth() == CV_8U ? 1.0 / 255.0 : 1.0;
  cv::Mat img;
  raw.convertTo(img, CV_64FC3, scale);
  RgbImage out;
  out.width = img.cols;
  out.height = img.rows;
  out.channels.resize(static_cast<std::size_t>(img.cols) * img.rows * 3);
  for (int y = 0; y < img.rows; ++y) {
    const auto* row = img.ptr<cv::Vec3d>(y);
    for (int x = 0; x < img.cols; ++x) {
      double* dst = &out.channels[(static_cast<std::size_t>(y) * img.cols + x) * 3];
      dst[0] = row[x][2];  // OpenCV stores BGR
      dst[1] = row[x][1];
      dst[2] = row[x][0];
    }
  }
  return out;
}

GrayImage load_gray(const std::filesystem::path& path, const std::array<double, 3>& weights) {
  return to_gray(load_rgb(path), weights);
}

void save_gray_png(const GrayImage& image, const std::filesystem::path& path) {
  cv::Mat m(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      m.at<unsigned char>(y, x) =
          static_cast<unsigned char>(std::clamp(image.at(x, y), 0.0, 1.0) * 255.0 + 0.5);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), m)) throw IoError("cannot write image " + path.string());
}

}  // namespace framesift
