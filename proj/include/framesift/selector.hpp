#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "framesift/image.hpp"
#include "framesift/types.hpp"

namespace framesift {

/// Supplies pixels for a frame. Must throw if the frame has no readable image.
using FrameLoader = std::function<GrayImage(const FrameRef&)>;

/// Loads `frame.image_path` from disk; throws IoError naming the frame otherwise.
FrameLoader image_file_loader(const std::array<double, 3>& weights = kBt601Weights);

struct SelectedFrame {
  FrameRef frame;
  std::optional<double> ssim_to_prev_ref;  // absent for the first frame of a sequence
  std::optional<double> blur_norm;         // set once the quality filter has run

  bool operator==(const SelectedFrame&) const = default;
};

struct SelectionResult {
  std::vector<SelectedFrame> selected;
  std::size_t input_count = 0;
  std::size_t structural_count = 0;  // before the quality filter
  double retained_fraction = 0.0;    // selected.size() / input_count

  std::vector<FrameRef> frames() const;
};

/// Reference-chaining SSIM selection over one ordered sequence. Frame 0 is
/// always kept; every `step`-th frame is compared to the current reference and
/// the first one with ssim < alpha becomes the new reference. The probe index
/// is clamped to the last frame.
SelectionResult select_structural(std::span<const FrameRef> frames, const SelectorConfig& cfg,
                                  const FrameLoader& load);

/// Keeps frames whose batch-normalized blur score is >= blur_threshold.
std::vector<SelectedFrame> filter_quality(std::span<const SelectedFrame> frames, double blur_threshold,
                                          const FrameLoader& load);
std::vector<SelectedFrame> filter_quality(std::span<const FrameRef> frames, double blur_threshold,
                                          const FrameLoader& load);

/// filter_quality(select_structural(seq)) for each sequence, concatenated.
SelectionResult select_training_subset(std::span<const std::vector<FrameRef>> sequences,
                                       const SelectorConfig& cfg, const FrameLoader& load);

}  // namespace framesift
