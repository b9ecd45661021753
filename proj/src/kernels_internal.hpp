#pragma once

#include <algorithm>

namespace framesift::kernels::detail {

/// SSIM of one window from its weighted moments. Written so that swapping
/// (a, b) or passing a == b gives bit-identical results.
inline double local_ssim(double mu_a, double mu_b, double e_aa, double e_bb, double e_ab, double c1, double c2) {
  const double mu_ab = mu_a * mu_b;
  const double var_a = e_aa - mu_a * mu_a;
  const double var_b = e_bb - mu_b * mu_b;
  const double cov = e_ab - mu_ab;
  const double num = (2.0 * mu_ab + c1) * (2.0 * cov + c2);
  const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return num / den;
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

/// 4-neighbour Laplacian at (x, y) with replicated borders.
template <class Img>
inline double laplacian_at(const Img& img, int x, int y) {
  const int xl = std::max(x - 1, 0), xr = std::min(x + 1, img.width - 1);
  const int yu = std::max(y - 1, 0), yd = std::min(y + 1, img.height - 1);
  return img.at(xl, y) + img.at(xr, y) + img.at(x, yu) + img.at(x, yd) - 4.0 * img.at(x, y);
}

}  // namespace framesift::kernels::detail
