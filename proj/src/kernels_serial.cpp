#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "framesift/kernels.hpp"
#include "kernels_internal.hpp"

namespace framesift::kernels::serial {

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p) {
  const int r = effective_radius(a.width, a.height, p.radius);
  const auto g = gaussian_taps(r, p.sigma);
  const int ow = a.width - 2 * r, oh = a.height - 2 * r;
  double total = 0.0;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double mu_a = 0, mu_b = 0, e_aa = 0, e_bb = 0, e_ab = 0;
      for (int dy = 0; dy <= 2 * r; ++dy) {
        for (int dx = 0; dx <= 2 * r; ++dx) {
          const double w = g[dy] * g[dx];
          const double va = a.at(ox + dx, oy + dy), vb = b.at(ox + dx, oy + dy);
          mu_a += w * va;
          mu_b += w * vb;
          e_aa += w * (va * va);
          e_bb += w * (vb * vb);
          e_ab += w * (va * vb);
        }
      }
      total += detail::local_ssim(mu_a, mu_b, e_aa, e_bb, e_ab, p.c1, p.c2);
    }
  }
  return detail::clamp_unit(total / (static_cast<double>(ow) * oh));
}

double laplacian_variance(const GrayImage& img) {
  std::vector<double> resp;
  resp.reserve(img.pixels.size());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) resp.push_back(detail::laplacian_at(img, x, y));
  double mean = 0.0;
  for (double v : resp) mean += v;
  mean /= static_cast<double>(resp.size());
  double var = 0.0;
  for (double v : resp) var += (v - mean) * (v - mean);
  return var / static_cast<double>(resp.size());
}

namespace {

double squared_distance(const Matrix& x, Eigen::Index j, Eigen::Index k) {
  double d2 = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double d = x(j, c) - x(k, c);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

Matrix rbf_affinity(const Matrix& x, double gamma) {
  const auto n = x.rows();
  Matrix w(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) w(j, k) = j == k ? 0.0 : std::exp(-gamma * squared_distance(x, j, k));
  return w;
}

Matrix knn_affinity(const Matrix& x, int k) {
  const auto n = x.rows();
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index o = 0; o < n; ++o)
      if (o != j) cand.emplace_back(squared_distance(x, j, o), o);
    std::sort(cand.begin(), cand.end());
    for (int i = 0; i < k; ++i) m(j, cand[i].second) = 1.0;
  }
  Matrix w(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index o = 0; o < n; ++o) w(j, o) = std::max(m(j, o), m(o, j));
  return w;
}

Matrix normalize_laplacian(const Matrix& w) {
  const auto n = w.rows();
  std::vector<double> inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) d += w(i, j);
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = w(i, j) * (inv_sqrt[i] * inv_sqrt[j]);
  return s;
}

void spread_step(const Matrix& s, const Matrix& y, const Matrix& y0, double nu, Matrix& out) {
  const auto n = s.rows(), c = y.cols();
  out.resize(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < c; ++l) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) acc += s(i, k) * y(k, l);
      out(i, l) = nu * acc + (1.0 - nu) * y0(i, l);
    }
  }
}

}  // namespace framesift::kernels::serial
