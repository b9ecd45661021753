#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace framesift {

/// Detections at or below this objectness score are dropped at ingestion.
inline constexpr double kScoreFloor = 0.2;

struct FrameKey {
  std::string sequence_id;
  std::int64_t frame_index = 0;

  auto operator<=>(const FrameKey&) const = default;
  bool operator==(const FrameKey&) const = default;
};

struct FrameRef {
  std::string sequence_id;
  std::int64_t frame_index = 0;
  std::optional<std::filesystem::path> image_path;

  FrameKey key() const { return {sequence_id, frame_index}; }
  bool operator==(const FrameRef&) const = default;
};

/// Orders frames by (sequence_id, frame_index); ignores image_path.
inline bool frame_less(const FrameRef& a, const FrameRef& b) {
  return a.key() < b.key();
}

struct Detection {
  std::string class_name;
  double score = 0.0;
  std::array<double, 4> bbox{};  // x_min, y_min, x_max, y_max

  bool operator==(const Detection&) const = default;
};

struct FrameDetections {
  FrameRef frame;
  std::vector<Detection> detections;

  bool operator==(const FrameDetections&) const = default;
};

struct EmbeddingVector {
  FrameRef frame;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

enum class TimeOfDay : int { day = 0, night = 1 };
enum class Lighting : int { good = 0, poor = 1 };
enum class Scene : int { city = 0, pedestrians = 1, freeway = 2, parked_cars = 3, other = 4 };

inline constexpr int kSceneCount = 5;
inline constexpr int kCompositeCount = 2 * 2 * kSceneCount;

std::string_view to_string(TimeOfDay v);
std::string_view to_string(Lighting v);
std::string_view to_string(Scene v);

/// The annotation triple. Tables and metrics treat the whole triple as one class.
struct SceneTag {
  TimeOfDay time_of_day = TimeOfDay::day;
  Lighting lighting = Lighting::good;
  Scene scene = Scene::city;

  /// Dense code in [0, 20): (time_of_day * 2 + lighting) * 5 + scene.
  int composite_code() const;
  static SceneTag from_composite(int code);
  /// Validating constructor from raw integer codes.
  static SceneTag from_codes(int time_of_day, int lighting, int scene);
  /// e.g. "day/poor/parked_cars".
  std::string label() const;

  bool operator==(const SceneTag&) const = default;
};

/// Per-frame detection aggregates used by the rule table.
struct ContentSummary {
  FrameRef frame;
  int pedestrians = 0;   // P: person + bicycle detections
  int vehicles = 0;      // V: car, truck, bus, airplane, motorcycle
  int night = 0;         // B: 1 = night
  double uncertainty = 0.0;           // U = sigma_r / r_med
  double windowed_uncertainty = 0.0;  // mean U of up to 5 previous and 5 next frames

  bool operator==(const ContentSummary&) const = default;
};

struct RuleParams {
  double beta = 0.5;
  double delta = 0.3;
  double eta = 0.5;
  int vehicle_city_threshold = 3;

  void validate() const;
};

enum class AffinityKernel { rbf, knn };

struct SpreadConfig {
  double gamma = 1.0;
  double nu = 0.9;
  int max_steps = 30;
  double convergence_tol = 1e-6;
  AffinityKernel kernel = AffinityKernel::rbf;
  int knn_k = 7;
  std::size_t batch_limit = 10000;
  int pca_dims = 10;

  void validate() const;
};

struct SelectorConfig {
  double alpha = 0.6;
  int step = 2;
  double blur_threshold = 0.4;

  void validate() const;
};

/// 10 log-spaced values in [0.1, 20].
std::vector<double> default_gamma_grid();

struct BoundaryConfig {
  int n_runs = 20;
  std::vector<double> gamma_grid = default_gamma_grid();
  std::vector<double> nu_grid = {0.6, 0.99};
  std::uint64_t seed = 0;

  void validate() const;
  /// The (gamma, nu) pair for every run: the grid product, shuffled by `seed`, cycled to n_runs.
  std::vector<std::pair<double, double>> run_schedule() const;
};

}  // namespace framesift
