#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "framesift/selector.hpp"
#include "framesift/types.hpp"

namespace framesift {

/// Maps detector class names onto the P and V counts. Defaults are MS-COCO names.
struct ClassVocabulary {
  std::set<std::string> pedestrian{"person", "bicycle"};
  std::set<std::string> vehicle{"car", "truck", "bus", "airplane", "motorcycle"};

  /// {"pedestrian": [...], "vehicle": [...]}
  static ClassVocabulary from_file(const std::filesystem::path& path);
};

struct RuleOutcome {
  FrameRef frame;
  SceneTag tag;
  ContentSummary summary;
  int matched_rule = -1;  // 0..9, -1 for Other
};

/// P, V, B and U for one frame; windowed_uncertainty is left at 0.
ContentSummary summarize_frame(const FrameDetections& dets, int night,
                               const ClassVocabulary& vocab = {});

/// Fills windowed_uncertainty with the mean U of the up-to-5 previous and
/// up-to-5 next frames (centre excluded, divisor = neighbours present).
void windowed_uncertainty(std::span<ContentSummary> summaries);

/// First matching rule of the ten-rule scene table, else Other.
RuleOutcome classify_frame(const ContentSummary& summary, const RuleParams& params);

/// summarize -> windowed_uncertainty -> classify_frame over one ordered sequence.
std::vector<RuleOutcome> classify_sequence(std::span<const FrameDetections> dets,
                                           std::span<const int> night_flags, const RuleParams& params,
                                           const ClassVocabulary& vocab = {});

/// Indices i with U[i] > U[i-1], U[i] > U[i+1] and U[i] > eta; endpoints never qualify.
std::vector<std::size_t> uncertainty_peaks(std::span<const double> u, double eta);

/// Peak candidates on U, then the structural and quality selector when a
/// loader is given. Without one the bare candidates are returned.
std::vector<SelectedFrame> keyframes_by_peaks(std::span<const RuleOutcome> outcomes, double eta,
                                              const SelectorConfig& selector_cfg,
                                              const FrameLoader* load = nullptr);

/// Annotated summaries (U_bar already filled) of one training sequence.
struct LabeledSequence {
  std::string id;
  std::vector<ContentSummary> summaries;
  std::vector<SceneTag> truth;
};

struct RuleGrid {
  double step = 0.05;  // beta and delta both swept over {0, step, ..., 1}
  int folds = 5;
  std::uint64_t seed = 0;
};

/// Grid search over (beta, delta) maximizing mean validation accuracy across
/// sequence-level folds. Ties go to smaller beta, then smaller delta.
/// `base` supplies eta and the vehicle threshold. Throws ValidationError with
/// fewer sequences than folds.
RuleParams fit_rule_params(std::span<const LabeledSequence> train, const RuleGrid& grid = {},
                           const RuleParams& base = {});

}  // namespace framesift
