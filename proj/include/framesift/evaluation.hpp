#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "framesift/types.hpp"

namespace framesift {

struct ClassMetrics {
  int code = 0;  // composite class code
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;  // union of predicted and true classes, ascending code
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted], per_class order

  std::string to_json() const;
  std::string to_text() const;
  std::string confusion_csv() const;
};

/// Empty precision/recall denominators give 0. Macro averages run over the
/// classes present in `truth`; weighted averages use truth support.
/// Throws ValidationError on empty or length-mismatched input.
MetricsReport score(std::span<const SceneTag> predicted, std::span<const SceneTag> truth);

struct KeyframeOverlap {
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t count_both = 0;
  double percent_a = 0.0;
  double percent_b = 0.0;
  double percent_both = 0.0;

  std::string to_json() const;
};

/// Set overlap on (seq, idx); percentages of `total`.
KeyframeOverlap keyframe_overlap(std::span<const FrameRef> a, std::span<const FrameRef> b,
                                 std::size_t total);

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> validation;
};

/// Sequence-level k-fold split. Fold sizes differ by at most one.
std::vector<Fold> kfold_split(std::span<const std::string> sequences, int k, std::uint64_t seed);

}  // namespace framesift
