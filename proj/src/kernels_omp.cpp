#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <omp.h>

#include "framesift/kernels.hpp"
#include "kernels_internal.hpp"

namespace framesift::kernels::parallel {

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p) {
  const int r = effective_radius(a.width, a.height, p.radius);
  const auto g = gaussian_taps(r, p.sigma);
  const int taps = 2 * r + 1;
  const int w = a.width, h = a.height;
  const int ow = w - 2 * r, oh = h - 2 * r;
  const std::size_t plane = static_cast<std::size_t>(ow) * h;

  // Horizontal pass: five moment planes of size ow x h.
  std::vector<double> hz(5 * plane);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < ow; ++ox) {
      std::array<double, 5> m{};
      for (int d = 0; d < taps; ++d) {
        const double va = a.at(ox + d, y), vb = b.at(ox + d, y);
        m[0] += g[d] * va;
        m[1] += g[d] * vb;
        m[2] += g[d] * (va * va);
        m[3] += g[d] * (vb * vb);
        m[4] += g[d] * (va * vb);
      }
      const std::size_t at = static_cast<std::size_t>(y) * ow + ox;
      for (int f = 0; f < 5; ++f) hz[f * plane + at] = m[f];
    }
  }

  // Vertical pass fused with the SSIM map; per-row sums combined in order.
  std::vector<double> row_sum(oh, 0.0);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < oh; ++oy) {
    double acc = 0.0;
    for (int ox = 0; ox < ow; ++ox) {
      std::array<double, 5> m{};
      for (int d = 0; d < taps; ++d) {
        const std::size_t at = static_cast<std::size_t>(oy + d) * ow + ox;
        for (int f = 0; f < 5; ++f) m[f] += g[d] * hz[f * plane + at];
      }
      acc += detail::local_ssim(m[0], m[1], m[2], m[3], m[4], p.c1, p.c2);
    }
    row_sum[oy] = acc;
  }
  double total = 0.0;
  for (double s : row_sum) total += s;
  return detail::clamp_unit(total / (static_cast<double>(ow) * oh));
}

double laplacian_variance(const GrayImage& img) {
  const int w = img.width, h = img.height;
  std::vector<double> resp(img.pixels.size());
  std::vector<double> row_sum(h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    for (int x = 0; x < w; ++x) {
      const double v = detail::laplacian_at(img, x, y);
      resp[static_cast<std::size_t>(y) * w + x] = v;
      acc += v;
    }
    row_sum[y] = acc;
  }
  double mean = 0.0;
  for (double s : row_sum) mean += s;
  mean /= static_cast<double>(resp.size());

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double acc = 0.0;
    for (int x = 0; x < w; ++x) {
      const double d = resp[static_cast<std::size_t>(y) * w + x] - mean;
      acc += d * d;
    }
    row_sum[y] = acc;
  }
  double var = 0.0;
  for (double s : row_sum) var += s;
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
  // Upper triangle mirrored: every cell has exactly one writer.
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    w(j, j) = 0.0;
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double v = std::exp(-gamma * squared_distance(x, j, k));
      w(j, k) = v;
      w(k, j) = v;
    }
  }
  return w;
}

Matrix knn_affinity(const Matrix& x, int k) {
  const auto n = x.rows();
  Matrix m = Matrix::Zero(n, n);
#pragma omp parallel
  {
    std::vector<std::pair<double, Eigen::Index>> cand;
    cand.reserve(n);
#pragma omp for schedule(dynamic, 16)
    for (Eigen::Index j = 0; j < n; ++j) {
      cand.clear();
      for (Eigen::Index o = 0; o < n; ++o)
        if (o != j) cand.emplace_back(squared_distance(x, j, o), o);
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
      for (int i = 0; i < k; ++i) m(j, cand[i].second) = 1.0;
    }
  }
  Matrix w(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index o = 0; o < n; ++o) w(j, o) = std::max(m(j, o), m(o, j));
  return w;
}

Matrix normalize_laplacian(const Matrix& w) {
  const auto n = w.rows();
  std::vector<double> inv_sqrt(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) d += w(i, j);
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix s(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = w(i, j) * (inv_sqrt[i] * inv_sqrt[j]);
  return s;
}

void spread_step(const Matrix& s, const Matrix& y, const Matrix& y0, double nu, Matrix& out) {
  const auto n = s.rows(), c = y.cols();
  out.resize(n, c);
#pragma omp parallel
  {
    std::vector<double> acc(c);
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double sik = s(i, k);
        for (Eigen::Index l = 0; l < c; ++l) acc[l] += sik * y(k, l);
      }
      for (Eigen::Index l = 0; l < c; ++l) out(i, l) = nu * acc[l] + (1.0 - nu) * y0(i, l);
    }
  }
}

}  // namespace framesift::kernels::parallel
