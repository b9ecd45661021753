#include "framesift/types.hpp"

#include <cmath>
#include <string>

#include "framesift/error.hpp"
#include "framesift/random.hpp"

namespace framesift {

std::string_view to_string(TimeOfDay v) { return v == TimeOfDay::night ? "night" : "day"; }

std::string_view to_string(Lighting v) { return v == Lighting::poor ? "poor" : "good"; }

std::string_view to_string(Scene v) {
  switch (v) {
    case Scene::city: return "city";
    case Scene::pedestrians: return "pedestrians";
    case Scene::freeway: return "freeway";
    case Scene::parked_cars: return "parked_cars";
    case Scene::other: return "other";
  }
  return "other";
}

int SceneTag::composite_code() const {
  return (static_cast<int>(time_of_day) * 2 + static_cast<int>(lighting)) * kSceneCount +
         static_cast<int>(scene);
}

SceneTag SceneTag::from_composite(int code) {
  if (code < 0 || code >= kCompositeCount)
    throw ValidationError("composite class code out of range: " + std::to_string(code));
  return from_codes(code / (2 * kSceneCount), (code / kSceneCount) % 2, code % kSceneCount);
}

SceneTag SceneTag::from_codes(int time_of_day, int lighting, int scene) {
  if (time_of_day < 0 || time_of_day > 1)
    throw ValidationError("time_of_day code must be 0 or 1, got " + std::to_string(time_of_day));
  if (lighting < 0 || lighting > 1)
    throw ValidationError("lighting code must be 0 or 1, got " + std::to_string(lighting));
  if (scene < 0 || scene >= kSceneCount)
    throw ValidationError("scene code must be in [0,4], got " + std::to_string(scene));
  return {static_cast<TimeOfDay>(time_of_day), static_cast<Lighting>(lighting), static_cast<Scene>(scene)};
}

std::string SceneTag::label() const {
  std::string s{to_string(time_of_day)};
  s += '/';
  s += to_string(lighting);
  s += '/';
  s += to_string(scene);
  return s;
}

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError(std::string(name) + " must be in [0,1], got " + std::to_string(v));
}

}  // namespace

void RuleParams::validate() const {
  require_unit(beta, "beta");
  require_unit(delta, "delta");
  if (!(eta >= 0.5 && eta <= 1.0))
    throw ValidationError("eta must be in [0.5,1], got " + std::to_string(eta));
  if (vehicle_city_threshold < 0)
    throw ValidationError("vehicle_city_threshold must be non-negative");
}

void SpreadConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be positive");
  require_unit(nu, "nu");
  if (max_steps < 1) throw ValidationError("max_steps must be positive");
  if (!(convergence_tol > 0.0)) throw ValidationError("convergence_tol must be positive");
  if (knn_k < 1) throw ValidationError("knn_k must be positive");
  if (batch_limit < 1) throw ValidationError("batch_limit must be positive");
  if (pca_dims < 1) throw ValidationError("pca_dims must be positive");
}

void SelectorConfig::validate() const {
  // alpha may sit just above 1 to force every probe to be selected.
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be >= 0");
  if (step < 1) throw ValidationError("step must be positive");
  require_unit(blur_threshold, "blur_threshold");
}

std::vector<double> default_gamma_grid() {
  constexpr int n = 10;
  constexpr double lo = 0.1, hi = 20.0;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return grid;
}

void BoundaryConfig::validate() const {
  if (n_runs < 1) throw ValidationError("n_runs must be positive");
  if (gamma_grid.empty() || nu_grid.empty()) throw ValidationError("boundary grids must be non-empty");
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw ValidationError("gamma_grid values must be positive");
  for (double v : nu_grid) require_unit(v, "nu_grid value");
}

std::vector<std::pair<double, double>> BoundaryConfig::run_schedule() const {
  validate();
  std::vector<std::pair<double, double>> pairs;
  for (double g : gamma_grid)
    for (double v : nu_grid) pairs.emplace_back(g, v);
  const auto order = seeded_permutation(pairs.size(), seed);
  std::vector<std::pair<double, double>> runs;
  runs.reserve(n_runs);
  for (int r = 0; r < n_runs; ++r) runs.push_back(pairs[order[r % pairs.size()]]);
  return runs;
}

}  // namespace framesift
