#pragma once

// Readers and writers for every on-disk format the pipeline exchanges.
//
//   detections   JSON lines  {"seq": str, "idx": int, "dets": [{"cls", "score", "bbox"}]}
//   embeddings   JSON lines  {"seq": str, "idx": int, "vec": [float...]}
//                or binary   "FSEM" u32 dim u64 count, then per record
//                            u32 len, seq bytes, i64 idx, dim x f32 (all little-endian)
//   tags         CSV         seq,idx,time_of_day,lighting,scene,P,V,B,U,U_bar,label
//   selection    CSV         seq,idx,ssim_to_prev_ref,blur_norm
//   run labels   CSV         seq,idx,run_0,...,run_{n-1}   (composite class codes)
//   manifest     JSON        see Manifest below

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framesift/types.hpp"

namespace framesift {

namespace fs = std::filesystem;

/// Parses, validates, drops detections with score <= score_floor, and sorts by
/// (seq, idx). Duplicate (seq, idx) keys are rejected.
std::vector<FrameDetections> read_detections(const fs::path& path, double score_floor = kScoreFloor);
void write_detections(std::span<const FrameDetections> frames, const fs::path& path);

/// Reads either embedding encoding (detected by the binary magic). File order is kept.
std::vector<EmbeddingVector> read_embeddings(const fs::path& path);
void write_embeddings_jsonl(std::span<const EmbeddingVector> rows, const fs::path& path);
void write_embeddings_binary(std::span<const EmbeddingVector> rows, const fs::path& path);

struct TagRecord {
  FrameRef frame;
  SceneTag tag;
  std::optional<ContentSummary> summary;  // absent for the spreading path

  bool operator==(const TagRecord&) const = default;
};

void write_tags(std::span<const TagRecord> tags, const fs::path& path);
std::vector<TagRecord> read_tags(const fs::path& path);

struct SelectionRecord {
  FrameRef frame;
  std::optional<double> ssim_to_prev_ref;
  std::optional<double> blur_norm;

  bool operator==(const SelectionRecord&) const = default;
};

void write_selection(std::span<const SelectionRecord> rows, const fs::path& path);
std::vector<SelectionRecord> read_selection(const fs::path& path);

/// One row per frame; labels[i][r] is the composite class code of frame i in run r.
void write_run_labels(std::span<const FrameRef> frames, const std::vector<std::vector<int>>& labels,
                      const fs::path& path);

enum class Split { train, test };

struct ManifestFrame {
  std::int64_t index = 0;
  std::optional<fs::path> image;
  std::optional<int> night;       // explicit B flag; otherwise estimated from the image
  std::optional<SceneTag> tag;    // overrides the sequence annotation for this frame
};

struct ManifestSequence {
  std::string id;
  Split split = Split::test;
  std::optional<SceneTag> tag;
  std::vector<ManifestFrame> frames;
};

/// {"sequences": [{"id": "0001", "split": "train", "tag": [tod, light, scene],
///                 "frames": [{"idx": 0, "image": "a.png", "night": 0, "tag": [...]}, ...]}]}
///
/// "frames" may instead be {"dir": "imgs/0001", "pattern": "%06d.png", "count": 120}.
/// Relative image paths resolve against the manifest's directory.
struct Manifest {
  std::vector<ManifestSequence> sequences;

  /// Rebuilds the lookup tables; call after editing `sequences` by hand.
  void build_index();

  const ManifestSequence* find(const std::string& id) const;
  const ManifestFrame* find(const FrameKey& key) const;
  /// Per-frame annotation: the frame override, else the sequence tag.
  std::optional<SceneTag> tag_of(const FrameKey& key) const;
  std::optional<Split> split_of(const std::string& sequence_id) const;
  /// Frame list of one sequence with image paths attached.
  std::vector<FrameRef> frames_of(const ManifestSequence& seq) const;

 private:
  std::map<std::string, std::size_t> by_sequence_;
  std::map<FrameKey, std::pair<std::size_t, std::size_t>> by_frame_;
};

Manifest read_manifest(const fs::path& path);
Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir);

}  // namespace framesift
