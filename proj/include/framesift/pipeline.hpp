#pragma once

// End-to-end commands behind the `framesift` CLI. Each command validates its
// inputs first, writes every output under output_dir, and prints a short
// summary to `out`. Failures surface as framesift::Error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "framesift/types.hpp"

namespace framesift {

namespace fs = std::filesystem;

struct PipelineConfig {
  std::optional<fs::path> manifest_path;
  std::optional<fs::path> detections_path;
  std::optional<fs::path> embeddings_path;
  std::optional<fs::path> vocabulary_path;
  fs::path output_dir = "out";
  SelectorConfig selector;
  RuleParams rules;
  SpreadConfig spread;
  BoundaryConfig boundary;
  double night_threshold = 0.25;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = OpenMP default

  void validate() const;
};

/// Applies the keys present in a JSON config object on top of `cfg`.
/// Relative paths resolve against `base_dir`.
void apply_config_json(PipelineConfig& cfg, const std::string& json_text, const fs::path& base_dir);
void apply_config_file(PipelineConfig& cfg, const fs::path& path);

/// Environment variable naming a default config file.
inline constexpr const char* kConfigEnvVar = "FRAMESIFT_CONFIG";

/// Structural + quality selection over the training split.
/// With alpha_sweep non-empty, one manifest per alpha plus sweep_summary.csv.
void cmd_select(const PipelineConfig& cfg, const std::vector<double>& alpha_sweep, std::ostream& out);

/// Rule-based tags.csv and keyframes.csv.
void cmd_classify_rule(const PipelineConfig& cfg, std::ostream& out);

/// pca_model.bin, tags.csv, run_labels.csv and keyframes.csv.
void cmd_classify_spread(const PipelineConfig& cfg, std::ostream& out);

/// Cross-validated beta/delta written to rule_params.json.
void cmd_fit_params(const PipelineConfig& cfg, std::ostream& out);

enum class KeyframeMethod { rule, spread };
/// Key-frame manifest only.
void cmd_keyframes(const PipelineConfig& cfg, KeyframeMethod method, std::ostream& out);

struct EvaluateInputs {
  fs::path predictions;                // tags CSV
  std::optional<fs::path> truth;       // tags CSV; otherwise the manifest annotations
  std::optional<fs::path> keyframes_a;
  std::optional<fs::path> keyframes_b;
  std::optional<std::size_t> total;    // frames the key-frame fractions refer to
};

/// metrics.json, metrics.txt, confusion.csv and, with two key-frame files, overlap.json.
void cmd_evaluate(const PipelineConfig& cfg, const EvaluateInputs& in, std::ostream& out);

}  // namespace framesift
