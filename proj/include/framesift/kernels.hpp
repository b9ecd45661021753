#pragma once

// Numeric hot loops in two flavours: `serial` is the straightforward
// reference kept for testing, `parallel` is the OpenMP version the library
// calls. Parallel kernels combine per-row partials in row order, so results
// do not depend on the thread count.

#include <Eigen/Dense>

#include "framesift/image.hpp"

namespace framesift {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// SSIM window parameters (Gaussian 11x11, sigma 1.5, dynamic range 1).
struct SsimParams {
  int radius = 5;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

namespace kernels {

/// Normalized 1-D Gaussian taps, length 2*radius+1.
std::vector<double> gaussian_taps(int radius, double sigma);
/// Window radius actually used for an image: the default shrunk to fit.
int effective_radius(int width, int height, int radius);

namespace serial {
/// Brute-force 2-D window SSIM averaged over all fully-contained windows.
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p = {});
/// Population variance of the 4-neighbour Laplacian with replicated borders.
double laplacian_variance(const GrayImage& img);
Matrix rbf_affinity(const Matrix& x, double gamma);
Matrix knn_affinity(const Matrix& x, int k);
Matrix normalize_laplacian(const Matrix& w);
/// out = nu * S * y + (1 - nu) * y0
void spread_step(const Matrix& s, const Matrix& y, const Matrix& y0, double nu, Matrix& out);
}  // namespace serial

namespace parallel {
/// Separable-filter SSIM; matches serial::ssim to rounding.
double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& p = {});
double laplacian_variance(const GrayImage& img);
Matrix rbf_affinity(const Matrix& x, double gamma);
Matrix knn_affinity(const Matrix& x, int k);
Matrix normalize_laplacian(const Matrix& w);
void spread_step(const Matrix& s, const Matrix& y, const Matrix& y0, double nu, Matrix& out);
}  // namespace parallel

}  // namespace kernels
}  // namespace framesift
