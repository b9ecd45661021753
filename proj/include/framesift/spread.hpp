#pragma once

// Graph label spreading over frame embeddings.
//
//   W[j,k] = exp(-gamma * |x_j - x_k|^2), W[j,j] = 0
//   S      = D^-1/2 W D^-1/2,  D[i,i] = sum_j W[i,j]
//   Y(t+1) = nu * S * Y(t) + (1 - nu) * Y(0)
//
// Labeled rows of Y(0) are one-hot, unlabeled rows are zero. Iteration stops
// when the largest entry change drops below convergence_tol or after
// max_steps. Predictions are row argmaxes with ties to the lowest class.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "framesift/kernels.hpp"
#include "framesift/pca.hpp"
#include "framesift/types.hpp"

namespace framesift {

Matrix affinity_rbf(const Matrix& x, double gamma);
/// 1 where k' is among j's k nearest neighbours or vice versa. Distance ties
/// go to the lower sample index. Throws ValidationError unless 1 <= k < n.
Matrix affinity_knn(const Matrix& x, int k);
/// Zero-degree rows stay zero.
Matrix normalize_laplacian(const Matrix& w);
/// Affinity chosen by cfg.kernel, then normalized.
Matrix spreading_operator(const Matrix& x, const SpreadConfig& cfg);

/// n x n_classes; labels[i] < 0 marks an unlabeled row.
Matrix initial_labels(std::span<const int> labels, int n_classes);
/// Row argmax, lowest index on ties (all-zero rows give 0).
std::vector<int> argmax_rows(const Matrix& y);

struct SpreadState {
  Matrix labels;
  int steps = 0;
  bool converged = false;

  std::vector<int> predictions() const { return argmax_rows(labels); }
};

SpreadState spread_labels(const Matrix& s, const Matrix& y0, const SpreadConfig& cfg);

/// [begin, end) test-row ranges such that n_train + chunk <= batch_limit.
/// Throws ValidationError when the training set leaves no room for test rows.
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n_train, std::size_t n_test,
                                                              std::size_t batch_limit);

/// Spreads training labels to test rows chunk by chunk, in row order.
/// `train_classes` holds class indices in [0, n_classes).
std::vector<int> spread_batched(const Matrix& train, std::span<const int> train_classes,
                                const Matrix& test, int n_classes, const SpreadConfig& cfg);

/// Dense class indices over the composite codes seen in training, ascending.
class ClassIndex {
 public:
  explicit ClassIndex(std::span<const SceneTag> tags);

  int size() const { return static_cast<int>(codes_.size()); }
  int index_of(const SceneTag& tag) const;  // -1 if unseen
  SceneTag tag_at(int index) const { return SceneTag::from_composite(codes_.at(index)); }
  int code_at(int index) const { return codes_.at(index); }

 private:
  std::vector<int> codes_;
};

struct SpreadProblem {
  std::vector<EmbeddingVector> train;
  std::vector<SceneTag> train_tags;
  std::vector<EmbeddingVector> test;
  std::optional<PcaModel> pca;  // applied to both sides when present
};

/// Predicted tag per test frame, in the order of problem.test. Test frames are
/// chunked in (seq, idx) order so the result does not depend on input order.
std::vector<SceneTag> classify_by_spreading(const SpreadProblem& problem, const SpreadConfig& cfg);

struct InstabilityResult {
  std::vector<FrameRef> keyframes;               // (seq, idx) order
  std::vector<std::vector<int>> run_labels;      // per test frame (problem order), composite code per run
  std::vector<std::pair<double, double>> runs;   // (gamma, nu) of each run
};

/// Repeats classify_by_spreading once per scheduled (gamma, nu); a test frame
/// is a key-frame when its predicted triple is not the same in every run.
InstabilityResult keyframes_by_instability(const SpreadProblem& problem, const BoundaryConfig& bcfg,
                                           const SpreadConfig& cfg);

}  // namespace framesift
