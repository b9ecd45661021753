#include "framesift/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "framesift/error.hpp"
#include "framesift/evaluation.hpp"
#include "framesift/io.hpp"
#include "framesift/metrics.hpp"
#include "framesift/pca.hpp"
#include "framesift/rules.hpp"
#include "framesift/selector.hpp"
#include "framesift/spread.hpp"

namespace framesift {

using nlohmann::json;

// ---- configuration ----------------------------------------------------------------

void PipelineConfig::validate() const {
  for (const auto* p : {&manifest_path, &detections_path, &embeddings_path, &vocabulary_path})
    if (*p && !fs::exists(**p)) throw IoError("input not found: " + (*p)->string());
  selector.validate();
  rules.validate();
  spread.validate();
  boundary.validate();
  if (!(night_threshold >= 0.0 && night_threshold <= 1.0))
    throw ValidationError("night_threshold must be in [0,1]");
  if (threads < 0) throw ValidationError("threads must be non-negative");
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ValidationError("unknown config key " + where + key);
  }
}

template <class T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void take_path(const json& obj, const char* key, std::optional<fs::path>& dst, const fs::path& base) {
  if (!obj.contains(key)) return;
  fs::path p = obj.at(key).get<std::string>();
  dst = p.is_absolute() ? p : base / p;
}

}  // namespace

void apply_config_json(PipelineConfig& cfg, const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
  try {
    reject_unknown(j,
                   {"manifest", "detections", "embeddings", "vocabulary", "output_dir", "selector", "rules",
                    "spread", "boundary", "night_threshold", "seed", "threads"},
                   "");
    take_path(j, "manifest", cfg.manifest_path, base_dir);
    take_path(j, "detections", cfg.detections_path, base_dir);
    take_path(j, "embeddings", cfg.embeddings_path, base_dir);
    take_path(j, "vocabulary", cfg.vocabulary_path, base_dir);
    if (j.contains("output_dir")) {
      fs::path p = j["output_dir"].get<std::string>();
      cfg.output_dir = p.is_absolute() ? p : base_dir / p;
    }
    if (j.contains("selector")) {
      const auto& s = j["selector"];
      reject_unknown(s, {"alpha", "step", "blur_threshold"}, "selector.");
      take(s, "alpha", cfg.selector.alpha);
      take(s, "step", cfg.selector.step);
      take(s, "blur_threshold", cfg.selector.blur_threshold);
    }
    if (j.contains("rules")) {
      const auto& r = j["rules"];
      reject_unknown(r, {"beta", "delta", "eta", "vehicle_city_threshold"}, "rules.");
      take(r, "beta", cfg.rules.beta);
      take(r, "delta", cfg.rules.delta);
      take(r, "eta", cfg.rules.eta);
      take(r, "vehicle_city_threshold", cfg.rules.vehicle_city_threshold);
    }
    if (j.contains("spread")) {
      const auto& s = j["spread"];
      reject_unknown(s,
                     {"gamma", "nu", "max_steps", "convergence_tol", "kernel", "knn_k", "batch_limit", "pca_dims"},
                     "spread.");
      take(s, "gamma", cfg.spread.gamma);
      take(s, "nu", cfg.spread.nu);
      take(s, "max_steps", cfg.spread.max_steps);
      take(s, "convergence_tol", cfg.spread.convergence_tol);
      take(s, "knn_k", cfg.spread.knn_k);
      take(s, "batch_limit", cfg.spread.batch_limit);
      take(s, "pca_dims", cfg.spread.pca_dims);
      if (s.contains("kernel")) {
        const auto k = s["kernel"].get<std::string>();
        if (k == "rbf")
          cfg.spread.kernel = AffinityKernel::rbf;
        else if (k == "knn")
          cfg.spread.kernel = AffinityKernel::knn;
        else
          throw ValidationError("spread.kernel must be \"rbf\" or \"knn\"");
      }
    }
    if (j.contains("boundary")) {
      const auto& b = j["boundary"];
      reject_unknown(b, {"n_runs", "gamma_grid", "nu_grid"}, "boundary.");
      take(b, "n_runs", cfg.boundary.n_runs);
      take(b, "gamma_grid", cfg.boundary.gamma_grid);
      take(b, "nu_grid", cfg.boundary.nu_grid);
    }
    take(j, "night_threshold", cfg.night_threshold);
    take(j, "seed", cfg.seed);
    take(j, "threads", cfg.threads);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  cfg.boundary.seed = cfg.seed;
}

void apply_config_file(PipelineConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_json(cfg, ss.str(), path.parent_path());
}

// ---- shared helpers ---------------------------------------------------------------

namespace {

std::string describe(const FrameRef& f) { return f.sequence_id + "#" + std::to_string(f.frame_index); }

std::string percent(std::size_t num, std::size_t den) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0);
  return buf;
}

const fs::path& require(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw ValidationError(std::string("missing required input: ") + what);
  return *p;
}

void prepare_output(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
}

std::vector<SelectionRecord> to_records(std::span<const SelectedFrame> frames) {
  std::vector<SelectionRecord> rows;
  rows.reserve(frames.size());
  for (const auto& f : frames) rows.push_back({{f.frame.sequence_id, f.frame.frame_index, std::nullopt},
                                               f.ssim_to_prev_ref, f.blur_norm});
  return rows;
}

std::string alpha_label(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", alpha);
  return buf;
}

// Rule path: detections grouped per sequence, with images and night flags attached.
struct RuleRun {
  std::vector<TagRecord> tags;
  std::vector<SelectedFrame> keyframes;
  std::size_t frames = 0;
  std::size_t candidates = 0;
};

std::map<std::string, std::vector<FrameDetections>> group_detections(std::vector<FrameDetections> all) {
  std::map<std::string, std::vector<FrameDetections>> by_seq;
  for (auto& fd : all) by_seq[fd.frame.sequence_id].push_back(std::move(fd));
  return by_seq;
}

std::optional<Manifest> load_manifest(const PipelineConfig& cfg) {
  if (!cfg.manifest_path) return std::nullopt;
  return read_manifest(*cfg.manifest_path);
}

/// Attaches manifest image paths and resolves the night flag of every frame.
std::vector<int> resolve_night(std::vector<FrameDetections>& seq, const Manifest* manifest, double threshold) {
  std::vector<int> night;
  night.reserve(seq.size());
  for (auto& fd : seq) {
    const ManifestFrame* mf = manifest ? manifest->find(fd.frame.key()) : nullptr;
    if (mf && mf->image) fd.frame.image_path = mf->image;
    if (mf && mf->night) {
      night.push_back(*mf->night);
    } else if (fd.frame.image_path) {
      if (!fs::exists(*fd.frame.image_path))
        throw IoError("frame " + describe(fd.frame) + ": missing image " + fd.frame.image_path->string());
      night.push_back(night_flag(load_gray(*fd.frame.image_path), threshold));
    } else {
      throw ValidationError("frame " + describe(fd.frame) +
                            " has no night flag and no image; supply \"night\" or \"image\" for it in the manifest");
    }
  }
  return night;
}

RuleRun run_rules(const PipelineConfig& cfg) {
  const auto manifest = load_manifest(cfg);
  const auto vocab = cfg.vocabulary_path ? ClassVocabulary::from_file(*cfg.vocabulary_path) : ClassVocabulary{};
  auto by_seq = group_detections(read_detections(require(cfg.detections_path, "--detections")));

  // Resolve every night flag before classifying anything.
  std::map<std::string, std::vector<int>> night;
  for (auto& [id, seq] : by_seq) night[id] = resolve_night(seq, manifest ? &*manifest : nullptr, cfg.night_threshold);

  const FrameLoader loader = image_file_loader();
  RuleRun run;
  for (auto& [id, seq] : by_seq) {
    const auto outcomes = classify_sequence(seq, night[id], cfg.rules, vocab);
    run.frames += outcomes.size();
    for (const auto& o : outcomes)
      run.tags.push_back({{o.frame.sequence_id, o.frame.frame_index, std::nullopt}, o.tag,
                          [&] {
                            ContentSummary s = o.summary;
                            s.frame.image_path.reset();
                            return s;
                          }()});
    std::vector<double> u;
    for (const auto& o : outcomes) u.push_back(o.summary.uncertainty);
    run.candidates += uncertainty_peaks(u, cfg.rules.eta).size();

    const bool have_images =
        std::all_of(seq.begin(), seq.end(), [](const auto& fd) { return fd.frame.image_path.has_value(); });
    const auto keys = keyframes_by_peaks(outcomes, cfg.rules.eta, cfg.selector, have_images ? &loader : nullptr);
    run.keyframes.insert(run.keyframes.end(), keys.begin(), keys.end());
  }
  return run;
}

// Spreading path.
struct SpreadRun {
  SpreadProblem problem;
  std::size_t train_frames = 0;
};

SpreadRun build_spread_problem(const PipelineConfig& cfg) {
  const auto manifest = read_manifest(require(cfg.manifest_path, "--manifest"));
  auto rows = read_embeddings(require(cfg.embeddings_path, "--embeddings"));
  SpreadRun run;
  for (auto& row : rows) {
    const auto split = manifest.split_of(row.frame.sequence_id);
    if (!split) throw ValidationError("embedding for " + describe(row.frame) + " belongs to no manifest sequence");
    if (*split == Split::train) {
      const auto tag = manifest.tag_of(row.frame.key());
      if (!tag) throw ValidationError("training frame " + describe(row.frame) + " has no annotation in the manifest");
      run.problem.train.push_back(std::move(row));
      run.problem.train_tags.push_back(*tag);
    } else {
      run.problem.test.push_back(std::move(row));
    }
  }
  std::stable_sort(run.problem.test.begin(), run.problem.test.end(),
                   [](const auto& a, const auto& b) { return frame_less(a.frame, b.frame); });
  run.train_frames = run.problem.train.size();
  // Fail on an undersized batch_limit before any numeric work.
  chunk_ranges(run.problem.train.size(), run.problem.test.size(), cfg.spread.batch_limit);
  return run;
}

std::vector<SelectionRecord> frames_to_records(std::span<const FrameRef> frames) {
  std::vector<SelectionRecord> rows;
  for (const auto& f : frames) rows.push_back({{f.sequence_id, f.frame_index, std::nullopt}, std::nullopt, std::nullopt});
  return rows;
}

}  // namespace

// ---- commands ---------------------------------------------------------------------

void cmd_select(const PipelineConfig& cfg, const std::vector<double>& alpha_sweep, std::ostream& out) {
  cfg.validate();
  const auto manifest = read_manifest(require(cfg.manifest_path, "--manifest"));
  std::vector<std::vector<FrameRef>> sequences;
  for (const auto& seq : manifest.sequences)
    if (seq.split == Split::train) sequences.push_back(manifest.frames_of(seq));
  if (sequences.empty()) throw ValidationError("manifest has no training sequences to select from");
  for (const auto& seq : sequences)
    for (const auto& f : seq) {
      if (!f.image_path) throw ValidationError("frame " + describe(f) + " has no image path");
      if (!fs::exists(*f.image_path))
        throw IoError("frame " + describe(f) + ": missing image " + f.image_path->string());
    }
  for (double a : alpha_sweep) {
    SelectorConfig probe = cfg.selector;
    probe.alpha = a;
    probe.validate();
  }
  prepare_output(cfg);

  const FrameLoader loader = image_file_loader();
  auto report = [&](const SelectionResult& r, const std::string& prefix) {
    out << prefix << "frames " << r.input_count << ", structural " << r.structural_count << " ("
        << percent(r.structural_count, r.input_count) << "), after quality filter " << r.selected.size() << " ("
        << percent(r.selected.size(), r.input_count) << ")\n";
  };

  if (alpha_sweep.empty()) {
    const auto result = select_training_subset(sequences, cfg.selector, loader);
    write_selection(to_records(result.selected), cfg.output_dir / "selection.csv");
    report(result, "");
    return;
  }
  std::ostringstream summary;
  summary << "alpha,input,structural,selected,retained_fraction\n";
  for (double a : alpha_sweep) {
    SelectorConfig sc = cfg.selector;
    sc.alpha = a;
    const auto result = select_training_subset(sequences, sc, loader);
    write_selection(to_records(result.selected), cfg.output_dir / ("selection_alpha_" + alpha_label(a) + ".csv"));
    summary << alpha_label(a) << ',' << result.input_count << ',' << result.structural_count << ','
            << result.selected.size() << ',' << csv::format_double(result.retained_fraction) << '\n';
    report(result, "alpha " + alpha_label(a) + ": ");
  }
  std::ofstream f(cfg.output_dir / "sweep_summary.csv", std::ios::trunc);
  f << summary.str();
  if (!f) throw IoError("cannot write sweep_summary.csv");
}

void cmd_classify_rule(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate();
  require(cfg.detections_path, "--detections");
  auto run = run_rules(cfg);
  prepare_output(cfg);
  write_tags(run.tags, cfg.output_dir / "tags.csv");
  write_selection(to_records(run.keyframes), cfg.output_dir / "keyframes.csv");

  std::map<std::string, std::size_t> counts;
  for (const auto& t : run.tags) ++counts[t.tag.label()];
  out << "frames " << run.frames << "\n";
  for (const auto& [label, n] : counts) out << "  " << label << ": " << n << "\n";
  out << "uncertainty peaks " << run.candidates << ", key-frames " << run.keyframes.size() << " ("
      << percent(run.keyframes.size(), run.frames) << ")\n";
}

void cmd_classify_spread(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate();
  auto run = build_spread_problem(cfg);
  if (run.problem.train.empty()) throw ValidationError("no training embeddings: the manifest marks no train frames");
  run.problem.pca = fit_pca(run.problem.train, cfg.spread.pca_dims);
  prepare_output(cfg);
  save_pca(*run.problem.pca, cfg.output_dir / "pca_model.bin");

  const auto predicted = classify_by_spreading(run.problem, cfg.spread);
  std::vector<TagRecord> tags;
  std::vector<FrameRef> test_frames;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& f = run.problem.test[i].frame;
    tags.push_back({{f.sequence_id, f.frame_index, std::nullopt}, predicted[i], std::nullopt});
    test_frames.push_back(tags.back().frame);
  }
  write_tags(tags, cfg.output_dir / "tags.csv");

  BoundaryConfig bcfg = cfg.boundary;
  bcfg.seed = cfg.seed;
  const auto inst = keyframes_by_instability(run.problem, bcfg, cfg.spread);
  write_run_labels(test_frames, inst.run_labels, cfg.output_dir / "run_labels.csv");
  write_selection(frames_to_records(inst.keyframes), cfg.output_dir / "keyframes.csv");

  out << "train frames " << run.train_frames << ", test frames " << predicted.size() << ", PCA "
      << run.problem.pca->input_dim() << " -> " << run.problem.pca->dims() << "\n";
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tags) ++counts[t.tag.label()];
  for (const auto& [label, n] : counts) out << "  " << label << ": " << n << "\n";
  out << "boundary key-frames " << inst.keyframes.size() << " over " << inst.runs.size() << " runs ("
      << percent(inst.keyframes.size(), predicted.size()) << ")\n";
}

void cmd_fit_params(const PipelineConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto manifest = read_manifest(require(cfg.manifest_path, "--manifest"));
  const auto vocab = cfg.vocabulary_path ? ClassVocabulary::from_file(*cfg.vocabulary_path) : ClassVocabulary{};
  auto by_seq = group_detections(read_detections(require(cfg.detections_path, "--detections")));

  std::vector<LabeledSequence> train;
  for (auto& [id, seq] : by_seq) {
    if (manifest.split_of(id) != Split::train) continue;
    const auto night = resolve_night(seq, &manifest, cfg.night_threshold);
    LabeledSequence ls;
    ls.id = id;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      ls.summaries.push_back(summarize_frame(seq[i], night[i], vocab));
      const auto tag = manifest.tag_of(seq[i].frame.key());
      if (!tag) throw ValidationError("training frame " + describe(seq[i].frame) + " has no annotation");
      ls.truth.push_back(*tag);
    }
    windowed_uncertainty(ls.summaries);
    train.push_back(std::move(ls));
  }
  RuleGrid grid;
  grid.seed = cfg.seed;
  const auto best = fit_rule_params(train, grid, cfg.rules);

  std::size_t hits = 0, frames = 0;
  for (const auto& ls : train)
    for (std::size_t i = 0; i < ls.summaries.size(); ++i, ++frames)
      hits += classify_frame(ls.summaries[i], best).tag == ls.truth[i];

  prepare_output(cfg);
  nlohmann::ordered_json j;
  j["beta"] = best.beta;
  j["delta"] = best.delta;
  j["eta"] = best.eta;
  j["vehicle_city_threshold"] = best.vehicle_city_threshold;
  j["train_accuracy"] = frames ? static_cast<double>(hits) / static_cast<double>(frames) : 0.0;
  std::ofstream f(cfg.output_dir / "rule_params.json", std::ios::trunc);
  f << j.dump(2) << '\n';
  if (!f) throw IoError("cannot write rule_params.json");
  out << "beta " << best.beta << ", delta " << best.delta << " (training accuracy " << percent(hits, frames) << " over "
      << train.size() << " sequences)\n";
}

void cmd_keyframes(const PipelineConfig& cfg, KeyframeMethod method, std::ostream& out) {
  cfg.validate();
  if (method == KeyframeMethod::rule) {
    require(cfg.detections_path, "--detections");
    const auto run = run_rules(cfg);
    prepare_output(cfg);
    write_selection(to_records(run.keyframes), cfg.output_dir / "keyframes.csv");
    out << "key-frames " << run.keyframes.size() << " of " << run.frames << " frames ("
        << percent(run.keyframes.size(), run.frames) << ")\n";
    return;
  }
  auto run = build_spread_problem(cfg);
  if (run.problem.train.empty()) throw ValidationError("no training embeddings: the manifest marks no train frames");
  run.problem.pca = fit_pca(run.problem.train, cfg.spread.pca_dims);
  BoundaryConfig bcfg = cfg.boundary;
  bcfg.seed = cfg.seed;
  const auto inst = keyframes_by_instability(run.problem, bcfg, cfg.spread);
  prepare_output(cfg);
  write_selection(frames_to_records(inst.keyframes), cfg.output_dir / "keyframes.csv");
  out << "key-frames " << inst.keyframes.size() << " of " << run.problem.test.size() << " frames ("
      << percent(inst.keyframes.size(), run.problem.test.size()) << ")\n";
}

void cmd_evaluate(const PipelineConfig& cfg, const EvaluateInputs& in, std::ostream& out) {
  cfg.validate();
  for (const auto* p : {&in.truth, &in.keyframes_a, &in.keyframes_b})
    if (*p && !fs::exists(**p)) throw IoError("input not found: " + (*p)->string());
  if (in.keyframes_a.has_value() != in.keyframes_b.has_value())
    throw ValidationError("key-frame overlap needs both --keyframes-a and --keyframes-b");

  const auto predictions = read_tags(in.predictions);
  std::map<FrameKey, SceneTag> truth_by_key;
  std::optional<Manifest> manifest;
  if (in.truth) {
    for (const auto& t : read_tags(*in.truth)) truth_by_key[t.frame.key()] = t.tag;
  } else {
    manifest = read_manifest(require(cfg.manifest_path, "--truth or --manifest"));
  }

  std::vector<SceneTag> pred, truth;
  for (const auto& p : predictions) {
    std::optional<SceneTag> t;
    if (in.truth) {
      if (auto it = truth_by_key.find(p.frame.key()); it != truth_by_key.end()) t = it->second;
    } else {
      t = manifest->tag_of(p.frame.key());
    }
    if (!t) throw ValidationError("no ground truth for predicted frame " + describe(p.frame));
    pred.push_back(p.tag);
    truth.push_back(*t);
  }

  prepare_output(cfg);
  const auto report = score(pred, truth);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(cfg.output_dir / name, std::ios::trunc);
    f << text;
    if (!f) throw IoError(std::string("cannot write ") + name);
  };
  write("metrics.json", report.to_json());
  write("metrics.txt", report.to_text());
  write("confusion.csv", report.confusion_csv());
  out << report.to_text();

  if (in.keyframes_a) {
    auto frames_of = [](const fs::path& p) {
      std::vector<FrameRef> f;
      for (const auto& r : read_selection(p)) f.push_back(r.frame);
      return f;
    };
    const std::size_t total = in.total.value_or(predictions.size());
    const auto overlap = keyframe_overlap(frames_of(*in.keyframes_a), frames_of(*in.keyframes_b), total);
    write("overlap.json", overlap.to_json());
    char buf[200];
    std::snprintf(buf, sizeof(buf), "\nkey-frames A %zu (%.1f%%), B %zu (%.1f%%), both %zu (%.1f%%) of %zu\n",
                  overlap.count_a, overlap.percent_a, overlap.count_b, overlap.percent_b, overlap.count_both,
                  overlap.percent_both, total);
    out << buf;
  }
}

}  // namespace framesift
