#include "framesift/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "framesift/error.hpp"
#include "framesift/random.hpp"

namespace framesift {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

MetricsReport score(std::span<const SceneTag> predicted, std::span<const SceneTag> truth) {
  if (predicted.size() != truth.size())
    throw ValidationError("score: " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(truth.size()) + " truth labels");
  if (truth.empty()) throw ValidationError("score: no samples");

  std::set<int> codes;
  for (const auto& t : truth) codes.insert(t.composite_code());
  for (const auto& p : predicted) codes.insert(p.composite_code());
  std::map<int, std::size_t> slot;
  for (int c : codes) slot.emplace(c, slot.size());

  MetricsReport r;
  const std::size_t k = codes.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = slot.at(truth[i].composite_code());
    const auto p = slot.at(predicted[i].composite_code());
    ++r.confusion[t][p];
    correct += t == p;
  }
  const std::size_t n = truth.size();
  r.accuracy = ratio(correct, n);

  std::size_t present = 0;
  for (int c : codes) {
    const auto s = slot.at(c);
    std::size_t support = 0, predicted_count = 0;
    for (std::size_t j = 0; j < k; ++j) {
      support += r.confusion[s][j];
      predicted_count += r.confusion[j][s];
    }
    ClassMetrics m;
    m.code = c;
    m.support = support;
    m.precision = ratio(r.confusion[s][s], predicted_count);
    m.recall = ratio(r.confusion[s][s], support);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (support > 0) {
      ++present;
      r.macro_precision += m.precision;
      r.macro_recall += m.recall;
      r.macro_f1 += m.f1;
      const double w = ratio(support, n);
      r.weighted_precision += w * m.precision;
      r.weighted_recall += w * m.recall;
      r.weighted_f1 += w * m.f1;
    }
    r.per_class.push_back(m);
  }
  r.macro_precision /= static_cast<double>(present);
  r.macro_recall /= static_cast<double>(present);
  r.macro_f1 /= static_cast<double>(present);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["macro"] = {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}};
  j["weighted"] = {{"precision", weighted_precision}, {"recall", weighted_recall}, {"f1", weighted_f1}};
  auto classes = nlohmann::ordered_json::array();
  for (const auto& m : per_class)
    classes.push_back({{"code", m.code},
                       {"label", SceneTag::from_composite(m.code).label()},
                       {"support", m.support},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1}});
  j["per_class"] = std::move(classes);
  j["confusion"] = confusion;
  return j.dump(2) + "\n";
}

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "accuracy            %6.2f%%\n", 100.0 * accuracy);
  os << buf;
  std::snprintf(buf, sizeof(buf), "macro    P/R/F1     %6.2f %6.2f %6.2f\n", 100.0 * macro_precision,
                100.0 * macro_recall, 100.0 * macro_f1);
  os << buf;
  std::snprintf(buf, sizeof(buf), "weighted P/R/F1     %6.2f %6.2f %6.2f\n", 100.0 * weighted_precision,
                100.0 * weighted_recall, 100.0 * weighted_f1);
  os << buf << "\nclass                         support  precision  recall     f1\n";
  for (const auto& m : per_class) {
    std::snprintf(buf, sizeof(buf), "%-28s %8zu  %9.4f  %6.4f  %6.4f\n",
                  SceneTag::from_composite(m.code).label().c_str(), m.support, m.precision, m.recall, m.f1);
    os << buf;
  }
  return os.str();
}

std::string MetricsReport::confusion_csv() const {
  std::ostringstream os;
  os << "truth\\predicted";
  for (const auto& m : per_class) os << ',' << SceneTag::from_composite(m.code).label();
  os << '\n';
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    os << SceneTag::from_composite(per_class[i].code).label();
    for (std::size_t v : confusion[i]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

KeyframeOverlap keyframe_overlap(std::span<const FrameRef> a, std::span<const FrameRef> b, std::size_t total) {
  if (total == 0) throw ValidationError("keyframe_overlap: total must be positive");
  std::set<FrameKey> sa, sb;
  for (const auto& f : a) sa.insert(f.key());
  for (const auto& f : b) sb.insert(f.key());
  KeyframeOverlap o;
  o.count_a = sa.size();
  o.count_b = sb.size();
  for (const auto& k : sa) o.count_both += sb.count(k);
  const double t = static_cast<double>(total);
  o.percent_a = 100.0 * static_cast<double>(o.count_a) / t;
  o.percent_b = 100.0 * static_cast<double>(o.count_b) / t;
  o.percent_both = 100.0 * static_cast<double>(o.count_both) / t;
  return o;
}

std::string KeyframeOverlap::to_json() const {
  nlohmann::ordered_json j;
  j["count_a"] = count_a;
  j["count_b"] = count_b;
  j["count_both"] = count_both;
  j["percent_a"] = percent_a;
  j["percent_b"] = percent_b;
  j["percent_both"] = percent_both;
  return j.dump(2) + "\n";
}

std::vector<Fold> kfold_split(std::span<const std::string> sequences, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_split: k must be at least 2");
  if (sequences.size() < static_cast<std::size_t>(k))
    throw ValidationError("kfold_split: " + std::to_string(sequences.size()) + " sequences cannot form " +
                          std::to_string(k) + " folds");
  const auto perm = seeded_permutation(sequences.size(), seed);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    const std::size_t owner = pos % static_cast<std::size_t>(k);
    for (std::size_t f = 0; f < folds.size(); ++f)
      (f == owner ? folds[f].validation : folds[f].train).push_back(sequences[perm[pos]]);
  }
  return folds;
}

}  // namespace framesift
