#pragma once

#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "framesift/kernels.hpp"
#include "framesift/types.hpp"

namespace framesift {

struct PcaModel {
  Eigen::VectorXd mean;                // input_dim
  Matrix components;                   // dims x input_dim, orthonormal rows
  Eigen::VectorXd explained_variance;  // dims, descending

  int input_dim() const { return static_cast<int>(mean.size()); }
  int dims() const { return static_cast<int>(components.rows()); }
};

/// Rows of `x` are samples. Components are sorted by explained variance and
/// signed so the largest-magnitude coefficient of each is positive.
/// Throws ValidationError if there are fewer than dims+1 samples, the input
/// dimension is below dims, or the centred data has rank below dims.
PcaModel fit_pca(const Matrix& x, int dims);
PcaModel fit_pca(std::span<const EmbeddingVector> train, int dims);

Eigen::VectorXd transform(const PcaModel& model, const Eigen::VectorXd& v);
EmbeddingVector transform(const PcaModel& model, const EmbeddingVector& v);
/// Row-wise transform.
Matrix transform(const PcaModel& model, const Matrix& x);
/// Back-projection into input space: components^T z + mean.
Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::VectorXd& z);

/// "FSPC" u32 input_dim u32 dims, then mean, components (row-major) and
/// explained variance as little-endian f32.
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

/// Stacks embedding values into a sample matrix; all rows must share a dim.
Matrix to_matrix(std::span<const EmbeddingVector> rows);

}  // namespace framesift
