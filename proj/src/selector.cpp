#include "framesift/selector.hpp"

#include <algorithm>
#include <string>

#include "framesift/error.hpp"
#include "framesift/metrics.hpp"

namespace framesift {

namespace {

std::string describe(const FrameRef& f) { return f.sequence_id + "#" + std::to_string(f.frame_index); }

GrayImage load_checked(const FrameLoader& load, const FrameRef& f) {
  try {
    return load(f);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError("frame " + describe(f) + ": " + e.what());
  }
}

}  // namespace

FrameLoader image_file_loader(const std::array<double, 3>& weights) {
  return [weights](const FrameRef& f) -> GrayImage {
    if (!f.image_path) throw IoError("frame " + describe(f) + " has no image path");
    if (!std::filesystem::exists(*f.image_path))
      throw IoError("frame " + describe(f) + ": missing image " + f.image_path->string());
    try {
      return load_gray(*f.image_path, weights);
    } catch (const Error& e) {
      throw IoError("frame " + describe(f) + ": " + e.what());
    }
  };
}

std::vector<FrameRef> SelectionResult::frames() const {
  std::vector<FrameRef> out;
  out.reserve(selected.size());
  for (const auto& s : selected) out.push_back(s.frame);
  return out;
}

SelectionResult select_structural(std::span<const FrameRef> frames, const SelectorConfig& cfg,
                                  const FrameLoader& load) {
  cfg.validate();
  if (frames.empty()) throw ValidationError("select_structural: empty sequence");
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].sequence_id != frames[0].sequence_id || frames[i].frame_index <= frames[i - 1].frame_index)
      throw ValidationError("select_structural: frames must be one sequence in increasing order (at " +
                            describe(frames[i]) + ")");

  SelectionResult out;
  out.input_count = frames.size();
  out.selected.push_back({frames[0], std::nullopt, std::nullopt});

  const std::size_t last = frames.size() - 1;
  const std::size_t step = static_cast<std::size_t>(cfg.step);
  if (last > 0) {
    GrayImage ref = load_checked(load, frames[0]);
    std::size_t j = 0;
    while (j < last) {
      double s = 1.0;
      GrayImage probe;
      bool switched = false;
      while (j < last) {
        j = std::min(j + step, last);
        probe = load_checked(load, frames[j]);
        if (probe.width != ref.width || probe.height != ref.height)
          throw ValidationError("frame " + describe(frames[j]) + " differs in size from its reference");
        s = ssim(ref, probe);
        if (s < cfg.alpha) {
          switched = true;
          break;
        }
      }
      if (switched) {
        ref = std::move(probe);
        out.selected.push_back({frames[j], s, std::nullopt});
      }
    }
  }
  out.structural_count = out.selected.size();
  out.retained_fraction = static_cast<double>(out.selected.size()) / static_cast<double>(out.input_count);
  return out;
}

std::vector<SelectedFrame> filter_quality(std::span<const SelectedFrame> frames, double blur_threshold,
                                          const FrameLoader& load) {
  std::vector<double> scores;
  scores.reserve(frames.size());
  for (const auto& f : frames) scores.push_back(blur_score(load_checked(load, f.frame)));
  const auto norm = normalize_blur(scores);
  std::vector<SelectedFrame> kept;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (norm[i] >= blur_threshold) {
      kept.push_back(frames[i]);
      kept.back().blur_norm = norm[i];
    }
  }
  return kept;
}

std::vector<SelectedFrame> filter_quality(std::span<const FrameRef> frames, double blur_threshold,
                                          const FrameLoader& load) {
  std::vector<SelectedFrame> wrapped;
  wrapped.reserve(frames.size());
  for (const auto& f : frames) wrapped.push_back({f, std::nullopt, std::nullopt});
  return filter_quality(std::span<const SelectedFrame>(wrapped), blur_threshold, load);
}

SelectionResult select_training_subset(std::span<const std::vector<FrameRef>> sequences,
                                       const SelectorConfig& cfg, const FrameLoader& load) {
  SelectionResult total;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    auto structural = select_structural(seq, cfg, load);
    auto kept = filter_quality(std::span<const SelectedFrame>(structural.selected), cfg.blur_threshold, load);
    total.input_count += structural.input_count;
    total.structural_count += structural.structural_count;
    total.selected.insert(total.selected.end(), kept.begin(), kept.end());
  }
  total.retained_fraction =
      total.input_count ? static_cast<double>(total.selected.size()) / static_cast<double>(total.input_count) : 0.0;
  return total;
}

}  // namespace framesift
