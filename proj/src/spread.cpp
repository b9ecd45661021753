#include "framesift/spread.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <string>

#include "framesift/error.hpp"

namespace framesift {

Matrix affinity_rbf(const Matrix& x, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("affinity_rbf: gamma must be positive");
  return kernels::parallel::rbf_affinity(x, gamma);
}

Matrix affinity_knn(const Matrix& x, int k) {
  if (k < 1 || k >= x.rows())
    throw ValidationError("affinity_knn: need 1 <= k < n, got k=" + std::to_string(k) + " n=" +
                          std::to_string(x.rows()));
  return kernels::parallel::knn_affinity(x, k);
}

Matrix normalize_laplacian(const Matrix& w) {
  if (w.rows() != w.cols()) throw ValidationError("normalize_laplacian: W must be square");
  if ((w.array() < 0.0).any()) throw ValidationError("normalize_laplacian: W must be non-negative");
  return kernels::parallel::normalize_laplacian(w);
}

Matrix spreading_operator(const Matrix& x, const SpreadConfig& cfg) {
  if (cfg.kernel == AffinityKernel::knn) {
    // Tiny batches cannot host k neighbours; fall back to all other samples.
    const int k = std::min<int>(cfg.knn_k, static_cast<int>(x.rows()) - 1);
    if (k < 1) return Matrix::Zero(x.rows(), x.rows());
    return normalize_laplacian(affinity_knn(x, k));
  }
  return normalize_laplacian(affinity_rbf(x, cfg.gamma));
}

Matrix initial_labels(std::span<const int> labels, int n_classes) {
  if (n_classes < 1) throw ValidationError("initial_labels: need at least one class");
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes)
      throw ValidationError("initial_labels: class " + std::to_string(labels[i]) + " out of range");
    if (labels[i] >= 0) y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

std::vector<int> argmax_rows(const Matrix& y) {
  std::vector<int> out(static_cast<std::size_t>(y.rows()), 0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < y.cols(); ++c)
      if (y(i, c) > y(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

SpreadState spread_labels(const Matrix& s, const Matrix& y0, const SpreadConfig& cfg) {
  cfg.validate();
  if (s.rows() != s.cols()) throw ValidationError("spread_labels: S must be square");
  if (s.rows() != y0.rows())
    throw ValidationError("spread_labels: S is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                          " but Y(0) has " + std::to_string(y0.rows()) + " rows");
  SpreadState state;
  state.labels = y0;
  Matrix next;
  for (int t = 1; t <= cfg.max_steps; ++t) {
    kernels::parallel::spread_step(s, state.labels, y0, cfg.nu, next);
    const double change = next.size() ? (next - state.labels).cwiseAbs().maxCoeff() : 0.0;
    state.labels.swap(next);
    state.steps = t;
    if (change < cfg.convergence_tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n_train, std::size_t n_test,
                                                              std::size_t batch_limit) {
  if (n_train > batch_limit)
    throw ValidationError("training set of " + std::to_string(n_train) + " samples exceeds batch_limit " +
                          std::to_string(batch_limit));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (n_test == 0) return ranges;
  const std::size_t capacity = batch_limit - n_train;
  if (capacity == 0)
    throw ValidationError("training set of " + std::to_string(n_train) + " samples fills batch_limit " +
                          std::to_string(batch_limit) + "; no room for test samples");
  for (std::size_t begin = 0; begin < n_test; begin += capacity)
    ranges.emplace_back(begin, std::min(n_test, begin + capacity));
  return ranges;
}

std::vector<int> spread_batched(const Matrix& train, std::span<const int> train_classes, const Matrix& test,
                                int n_classes, const SpreadConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(train.rows()) != train_classes.size())
    throw ValidationError("spread_batched: one class per training row required");
  if (test.rows() > 0 && train.cols() != test.cols())
    throw ValidationError("spread_batched: train and test dims differ");
  for (int c : train_classes)
    if (c < 0 || c >= n_classes) throw ValidationError("spread_batched: training class out of range");

  const auto n_train = static_cast<std::size_t>(train.rows());
  std::vector<int> predicted;
  predicted.reserve(static_cast<std::size_t>(test.rows()));
  for (const auto& [begin, end] : chunk_ranges(n_train, static_cast<std::size_t>(test.rows()), cfg.batch_limit)) {
    const auto chunk = static_cast<Eigen::Index>(end - begin);
    Matrix x(static_cast<Eigen::Index>(n_train) + chunk, train.cols());
    x.topRows(static_cast<Eigen::Index>(n_train)) = train;
    x.bottomRows(chunk) = test.middleRows(static_cast<Eigen::Index>(begin), chunk);

    std::vector<int> labels(train_classes.begin(), train_classes.end());
    labels.resize(n_train + static_cast<std::size_t>(chunk), -1);
    const auto state = spread_labels(spreading_operator(x, cfg), initial_labels(labels, n_classes), cfg);
    const auto pred = state.predictions();
    predicted.insert(predicted.end(), pred.begin() + static_cast<std::ptrdiff_t>(n_train), pred.end());
  }
  return predicted;
}

ClassIndex::ClassIndex(std::span<const SceneTag> tags) {
  for (const auto& t : tags) codes_.push_back(t.composite_code());
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
}

int ClassIndex::index_of(const SceneTag& tag) const {
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), tag.composite_code());
  return it != codes_.end() && *it == tag.composite_code() ? static_cast<int>(it - codes_.begin()) : -1;
}

namespace {

struct Prepared {
  Matrix train;
  std::vector<int> train_classes;
  Matrix test;                     // rows in (seq, idx) order
  std::vector<std::size_t> order;  // order[r] = problem index of sorted test row r
  ClassIndex classes;
};

Prepared prepare(const SpreadProblem& problem) {
  if (problem.train.size() != problem.train_tags.size())
    throw ValidationError("one tag per training embedding required");
  if (problem.train.empty() && !problem.test.empty())
    throw ValidationError("label spreading needs at least one labeled training frame");

  Prepared p{Matrix(), {}, Matrix(), {}, ClassIndex(problem.train_tags)};
  p.train = to_matrix(problem.train);
  if (problem.pca) p.train = transform(*problem.pca, p.train);
  for (const auto& t : problem.train_tags) p.train_classes.push_back(p.classes.index_of(t));

  p.order.resize(problem.test.size());
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  std::stable_sort(p.order.begin(), p.order.end(), [&](std::size_t a, std::size_t b) {
    return frame_less(problem.test[a].frame, problem.test[b].frame);
  });
  std::vector<EmbeddingVector> sorted;
  sorted.reserve(problem.test.size());
  for (std::size_t i : p.order) sorted.push_back(problem.test[i]);
  p.test = to_matrix(sorted);
  if (problem.pca && p.test.rows() > 0) p.test = transform(*problem.pca, p.test);
  if (p.test.rows() > 0 && p.train.cols() != p.test.cols())
    throw ValidationError("train and test embeddings differ in dim");
  return p;
}

/// Composite codes in problem order.
std::vector<int> run_once(const Prepared& p, const SpreadConfig& cfg) {
  std::vector<int> codes(p.order.size());
  if (p.order.empty()) return codes;
  const auto pred = spread_batched(p.train, p.train_classes, p.test, p.classes.size(), cfg);
  for (std::size_t r = 0; r < pred.size(); ++r) codes[p.order[r]] = p.classes.code_at(pred[r]);
  return codes;
}

}  // namespace

std::vector<SceneTag> classify_by_spreading(const SpreadProblem& problem, const SpreadConfig& cfg) {
  cfg.validate();
  const auto p = prepare(problem);
  std::vector<SceneTag> tags;
  tags.reserve(problem.test.size());
  for (int code : run_once(p, cfg)) tags.push_back(SceneTag::from_composite(code));
  return tags;
}

InstabilityResult keyframes_by_instability(const SpreadProblem& problem, const BoundaryConfig& bcfg,
                                           const SpreadConfig& cfg) {
  cfg.validate();
  InstabilityResult result;
  result.runs = bcfg.run_schedule();
  const auto p = prepare(problem);
  const auto n_runs = static_cast<int>(result.runs.size());

  std::vector<std::vector<int>> per_run(result.runs.size());
  std::exception_ptr failure;
  // Runs are independent; nested kernels run single-threaded inside this region.
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < n_runs; ++r) {
    try {
      SpreadConfig run_cfg = cfg;
      run_cfg.gamma = result.runs[r].first;
      run_cfg.nu = result.runs[r].second;
      per_run[r] = run_once(p, run_cfg);
    } catch (...) {
#pragma omp critical(framesift_instability_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  result.run_labels.assign(problem.test.size(), std::vector<int>(result.runs.size()));
  for (std::size_t i = 0; i < problem.test.size(); ++i)
    for (std::size_t r = 0; r < result.runs.size(); ++r) result.run_labels[i][r] = per_run[r][i];

  for (std::size_t i : p.order) {
    const auto& row = result.run_labels[i];
    if (std::adjacent_find(row.begin(), row.end(), std::not_equal_to<>()) != row.end())
      result.keyframes.push_back(problem.test[i].frame);
  }
  return result;
}

}  // namespace framesift
