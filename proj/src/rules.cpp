#include "framesift/rules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "framesift/error.hpp"
#include "framesift/evaluation.hpp"

namespace framesift {

ClassVocabulary ClassVocabulary::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed vocabulary: ") + e.what(), 0);
  }
  ClassVocabulary v;
  try {
    v.pedestrian = j.at("pedestrian").get<std::set<std::string>>();
    v.vehicle = j.at("vehicle").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("vocabulary needs \"pedestrian\" and \"vehicle\" string lists: ") + e.what(), 0);
  }
  return v;
}

ContentSummary summarize_frame(const FrameDetections& dets, int night, const ClassVocabulary& vocab) {
  ContentSummary s;
  s.frame = dets.frame;
  s.night = night ? 1 : 0;
  std::vector<double> scores;
  for (const auto& d : dets.detections) {
    if (vocab.pedestrian.count(d.class_name)) {
      ++s.pedestrians;
      scores.push_back(d.score);
    } else if (vocab.vehicle.count(d.class_name)) {
      ++s.vehicles;
      scores.push_back(d.score);
    }
  }
  if (scores.size() < 2) return s;
  if (*std::min_element(scores.begin(), scores.end()) == *std::max_element(scores.begin(), scores.end())) return s;

  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  const double median = n % 2 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
  double mean = 0.0;
  for (double r : scores) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : scores) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n);
  // Scores sit above the 0.2 ingestion floor, so a zero median only arises from hand-built input.
  s.uncertainty = median > 0.0 ? std::sqrt(var) / median : 0.0;
  return s;
}

void windowed_uncertainty(std::span<ContentSummary> summaries) {
  constexpr std::ptrdiff_t half = 5;
  const auto n = static_cast<std::ptrdiff_t>(summaries.size());
  std::vector<double> u(summaries.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) u[i] = summaries[i].uncertainty;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      if (j == i) continue;
      sum += u[j];
      ++count;
    }
    summaries[i].windowed_uncertainty = count ? sum / count : 0.0;
  }
}

namespace {

struct Rule {
  std::function<bool(const ContentSummary&, const RuleParams&)> when;
  SceneTag tag;
};

const std::array<Rule, 10>& rule_table() {
  using T = TimeOfDay;
  using L = Lighting;
  using S = Scene;
  static const std::array<Rule, 10> rules{{
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians > c.vehicles && c.vehicles < p.vehicle_city_threshold && c.night == 1;
       },
       {T::night, L::good, S::pedestrians}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians > c.vehicles && c.vehicles < p.vehicle_city_threshold && c.night == 0 &&
                c.windowed_uncertainty <= p.beta;
       },
       {T::day, L::good, S::pedestrians}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians > c.vehicles && c.vehicles < p.vehicle_city_threshold && c.night == 0 &&
                c.windowed_uncertainty > p.beta;
       },
       {T::day, L::poor, S::pedestrians}},
      {[](const ContentSummary& c, const RuleParams&) {
         return c.pedestrians == 0 && c.vehicles > 0 && c.night == 1;
       },
       {T::night, L::good, S::freeway}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians == 0 && c.vehicles > 0 && c.night == 0 && c.uncertainty > p.delta &&
                c.windowed_uncertainty <= p.beta;
       },
       {T::day, L::good, S::freeway}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians == 0 && c.vehicles > 0 && c.night == 0 && c.uncertainty > p.delta &&
                c.windowed_uncertainty > p.beta;
       },
       {T::day, L::poor, S::freeway}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians == 0 && c.vehicles > 0 && c.night == 0 && c.uncertainty < p.delta &&
                c.windowed_uncertainty < p.beta;
       },
       {T::day, L::poor, S::parked_cars}},
      {[](const ContentSummary& c, const RuleParams&) {
         return c.pedestrians >= 0 && c.vehicles >= 0 && c.night == 1;
       },
       {T::night, L::good, S::city}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians >= 0 && c.vehicles >= 0 && c.night == 0 && c.windowed_uncertainty <= p.beta;
       },
       {T::day, L::good, S::city}},
      {[](const ContentSummary& c, const RuleParams& p) {
         return c.pedestrians > 0 && c.vehicles >= 0 && c.night == 0 && c.windowed_uncertainty > p.beta;
       },
       {T::day, L::poor, S::city}},
  }};
  return rules;
}

}  // namespace

RuleOutcome classify_frame(const ContentSummary& summary, const RuleParams& params) {
  RuleOutcome out;
  out.frame = summary.frame;
  out.summary = summary;
  const auto& rules = rule_table();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].when(summary, params)) {
      out.tag = rules[i].tag;
      out.matched_rule = static_cast<int>(i);
      return out;
    }
  }
  // Unmatched frames are always daytime with U_bar above beta.
  out.tag = {TimeOfDay::day, Lighting::poor, Scene::other};
  out.matched_rule = -1;
  return out;
}

std::vector<RuleOutcome> classify_sequence(std::span<const FrameDetections> dets, std::span<const int> night_flags,
                                           const RuleParams& params, const ClassVocabulary& vocab) {
  if (dets.size() != night_flags.size())
    throw ValidationError("classify_sequence: " + std::to_string(dets.size()) + " frames but " +
                          std::to_string(night_flags.size()) + " night flags");
  std::vector<ContentSummary> summaries;
  summaries.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) summaries.push_back(summarize_frame(dets[i], night_flags[i], vocab));
  windowed_uncertainty(summaries);
  std::vector<RuleOutcome> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back(classify_frame(s, params));
  return out;
}

std::vector<std::size_t> uncertainty_peaks(std::span<const double> u, double eta) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    if (u[i] > u[i - 1] && u[i] > u[i + 1] && u[i] > eta) peaks.push_back(i);
  return peaks;
}

std::vector<SelectedFrame> keyframes_by_peaks(std::span<const RuleOutcome> outcomes, double eta,
                                              const SelectorConfig& selector_cfg, const FrameLoader* load) {
  std::vector<double> u;
  u.reserve(outcomes.size());
  for (const auto& o : outcomes) u.push_back(o.summary.uncertainty);
  std::vector<FrameRef> candidates;
  for (std::size_t i : uncertainty_peaks(u, eta)) candidates.push_back(outcomes[i].frame);

  if (!load || candidates.empty()) {
    std::vector<SelectedFrame> out;
    for (auto& f : candidates) out.push_back({std::move(f), std::nullopt, std::nullopt});
    return out;
  }
  auto structural = select_structural(candidates, selector_cfg, *load);
  return filter_quality(std::span<const SelectedFrame>(structural.selected), selector_cfg.blur_threshold, *load);
}

RuleParams fit_rule_params(std::span<const LabeledSequence> train, const RuleGrid& grid, const RuleParams& base) {
  if (grid.folds < 2) throw ValidationError("fit_rule_params: need at least 2 folds");
  if (train.size() < static_cast<std::size_t>(grid.folds))
    throw ValidationError("fit_rule_params: " + std::to_string(train.size()) + " training sequences cannot form " +
                          std::to_string(grid.folds) + " folds");
  if (!(grid.step > 0.0 && grid.step <= 1.0)) throw ValidationError("fit_rule_params: grid step must be in (0,1]");

  std::map<std::string, const LabeledSequence*> by_id;
  std::vector<std::string> ids;
  for (const auto& seq : train) {
    if (seq.summaries.size() != seq.truth.size())
      throw ValidationError("sequence " + seq.id + ": summaries and truth differ in length");
    if (!by_id.emplace(seq.id, &seq).second) throw ValidationError("duplicate training sequence " + seq.id);
    ids.push_back(seq.id);
  }
  const auto folds = kfold_split(ids, grid.folds, grid.seed);

  const int steps = static_cast<int>(std::lround(1.0 / grid.step));
  std::vector<double> values;
  for (int k = 0; k <= steps; ++k) values.push_back(std::min(1.0, k * grid.step));

  RuleParams best = base;
  double best_score = -1.0;
  for (double beta : values) {
    for (double delta : values) {
      RuleParams p = base;
      p.beta = beta;
      p.delta = delta;
      double total = 0.0;
      for (const auto& fold : folds) {
        std::size_t hits = 0, frames = 0;
        for (const auto& id : fold.validation) {
          const auto& seq = *by_id.at(id);
          for (std::size_t i = 0; i < seq.summaries.size(); ++i) {
            hits += classify_frame(seq.summaries[i], p).tag == seq.truth[i];
            ++frames;
          }
        }
        total += frames ? static_cast<double>(hits) / static_cast<double>(frames) : 0.0;
      }
      const double mean = total / static_cast<double>(folds.size());
      if (mean > best_score) {
        best_score = mean;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace framesift
