#include <algorithm>
#include <cmath>

#include "framesift/kernels.hpp"

namespace framesift::kernels {

std::vector<double> gaussian_taps(int radius, double sigma) {
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

int effective_radius(int width, int height, int radius) {
  return std::max(0, std::min(radius, (std::min(width, height) - 1) / 2));
}

}  // namespace framesift::kernels
