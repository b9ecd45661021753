// framesift command-line front end.
//
// Settings are layered: built-in defaults, then the file named by
// $FRAMESIFT_CONFIG, then --config, then individual flags.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "framesift/error.hpp"
#include "framesift/pipeline.hpp"

namespace fs = std::filesystem;
using namespace framesift;

namespace {

struct Flags {
  std::optional<std::string> config, manifest, detections, embeddings, vocabulary, output;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  // selector
  std::optional<double> alpha, blur_threshold;
  std::optional<int> step;
  // rules
  std::optional<double> beta, delta, eta, night_threshold;
  std::optional<int> vehicle_city_threshold;
  // spreading
  std::optional<double> gamma, nu, tol;
  std::optional<int> max_steps, knn_k, pca_dims, n_runs;
  std::optional<std::size_t> batch_limit;
  std::optional<std::string> kernel;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file (overrides $FRAMESIFT_CONFIG)");
  app->add_option("-o,--output", f.output, "output directory");
  app->add_option("--seed", f.seed, "seed for every random choice");
  app->add_option("--threads", f.threads, "OpenMP worker threads")->check(CLI::NonNegativeNumber);
}

void add_selector(CLI::App* app, Flags& f) {
  app->add_option("--alpha", f.alpha, "SSIM threshold for a new reference frame");
  app->add_option("--step", f.step, "probe stride of the structural selector");
  app->add_option("--blur-threshold", f.blur_threshold, "minimum normalised blur score");
}

void add_rules(CLI::App* app, Flags& f) {
  app->add_option("--vocabulary", f.vocabulary, "JSON class vocabulary");
  app->add_option("--beta", f.beta, "uncertainty threshold for poor lighting");
  app->add_option("--delta", f.delta, "uncertainty threshold for parked cars");
  app->add_option("--eta", f.eta, "key-frame peak threshold on U");
  app->add_option("--vehicle-city-threshold", f.vehicle_city_threshold, "vehicle count that stops a scene being city");
  app->add_option("--night-threshold", f.night_threshold, "mean luminance below which a frame is night");
}

void add_spread(CLI::App* app, Flags& f) {
  app->add_option("--embeddings", f.embeddings, "embedding file (JSONL or binary)");
  app->add_option("--gamma", f.gamma, "RBF kernel width");
  app->add_option("--nu", f.nu, "propagation weight in (0,1)");
  app->add_option("--max-steps", f.max_steps, "spreading iteration cap");
  app->add_option("--tol", f.tol, "convergence tolerance (max abs change)");
  app->add_option("--kernel", f.kernel, "affinity kernel")->check(CLI::IsMember({"rbf", "knn"}));
  app->add_option("--knn-k", f.knn_k, "neighbours for the knn kernel");
  app->add_option("--batch-limit", f.batch_limit, "max train+test points per spreading batch");
  app->add_option("--pca-dims", f.pca_dims, "PCA output dimensions");
  app->add_option("--n-runs", f.n_runs, "spreading runs for boundary key-frames");
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig cfg;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) apply_config_file(cfg, env);
  if (f.config) apply_config_file(cfg, *f.config);

  auto set_path = [](std::optional<fs::path>& dst, const std::optional<std::string>& src) {
    if (src) dst = fs::path(*src);
  };
  set_path(cfg.manifest_path, f.manifest);
  set_path(cfg.detections_path, f.detections);
  set_path(cfg.embeddings_path, f.embeddings);
  set_path(cfg.vocabulary_path, f.vocabulary);
  if (f.output) cfg.output_dir = *f.output;
  if (f.seed) cfg.seed = *f.seed;
  cfg.boundary.seed = cfg.seed;
  if (f.threads) cfg.threads = *f.threads;

  if (f.alpha) cfg.selector.alpha = *f.alpha;
  if (f.step) cfg.selector.step = *f.step;
  if (f.blur_threshold) cfg.selector.blur_threshold = *f.blur_threshold;

  if (f.beta) cfg.rules.beta = *f.beta;
  if (f.delta) cfg.rules.delta = *f.delta;
  if (f.eta) cfg.rules.eta = *f.eta;
  if (f.vehicle_city_threshold) cfg.rules.vehicle_city_threshold = *f.vehicle_city_threshold;
  if (f.night_threshold) cfg.night_threshold = *f.night_threshold;

  if (f.gamma) cfg.spread.gamma = *f.gamma;
  if (f.nu) cfg.spread.nu = *f.nu;
  if (f.tol) cfg.spread.convergence_tol = *f.tol;
  if (f.max_steps) cfg.spread.max_steps = *f.max_steps;
  if (f.knn_k) cfg.spread.knn_k = *f.knn_k;
  if (f.pca_dims) cfg.spread.pca_dims = *f.pca_dims;
  if (f.batch_limit) cfg.spread.batch_limit = *f.batch_limit;
  if (f.kernel) cfg.spread.kernel = *f.kernel == "knn" ? AffinityKernel::knn : AffinityKernel::rbf;
  if (f.n_runs) cfg.boundary.n_runs = *f.n_runs;

  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framesift: key-frame selection and scene tagging for driving video"};
  app.require_subcommand(1);
  Flags f;

  auto* select = app.add_subcommand("select", "pick a diverse, sharp training subset");
  add_common(select, f);
  add_selector(select, f);
  select->add_option("--manifest", f.manifest, "sequence manifest (JSON)");
  std::vector<double> sweep;
  select->add_option("--alpha-sweep", sweep, "comma-separated alphas; one manifest per value")->delimiter(',');

  auto* rule = app.add_subcommand("classify-rule", "tag frames from detections with the rule table");
  add_common(rule, f);
  add_selector(rule, f);
  add_rules(rule, f);
  rule->add_option("--detections", f.detections, "detections JSONL");
  rule->add_option("--manifest", f.manifest, "manifest supplying images and night flags");

  auto* spread = app.add_subcommand("classify-spread", "tag test frames by label spreading over embeddings");
  add_common(spread, f);
  add_spread(spread, f);
  spread->add_option("--manifest", f.manifest, "manifest with splits and train annotations");

  auto* fit = app.add_subcommand("fit-params", "cross-validate beta and delta on the training split");
  add_common(fit, f);
  add_rules(fit, f);
  fit->add_option("--detections", f.detections, "detections JSONL");
  fit->add_option("--manifest", f.manifest, "manifest with splits and annotations");

  auto* keys = app.add_subcommand("keyframes", "write a key-frame manifest");
  add_common(keys, f);
  add_selector(keys, f);
  add_rules(keys, f);
  add_spread(keys, f);
  keys->add_option("--detections", f.detections, "detections JSONL (rule method)");
  keys->add_option("--manifest", f.manifest, "sequence manifest");
  std::string method = "rule";
  keys->add_option("--method", method, "rule (uncertainty peaks) or spread (boundary instability)")
      ->check(CLI::IsMember({"rule", "spread"}));

  auto* eval = app.add_subcommand("evaluate", "score predicted tags and compare key-frame sets");
  add_common(eval, f);
  std::string predictions;
  std::optional<std::string> truth, keys_a, keys_b;
  std::optional<std::size_t> total;
  eval->add_option("--predictions", predictions, "predicted tags CSV")->required();
  eval->add_option("--truth", truth, "ground-truth tags CSV");
  eval->add_option("--manifest", f.manifest, "manifest annotations as ground truth");
  eval->add_option("--keyframes-a", keys_a, "first key-frame manifest");
  eval->add_option("--keyframes-b", keys_b, "second key-frame manifest");
  eval->add_option("--total", total, "frame count the key-frame percentages refer to");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = build_config(f);
    if (*select) {
      cmd_select(cfg, sweep, std::cout);
    } else if (*rule) {
      cmd_classify_rule(cfg, std::cout);
    } else if (*spread) {
      cmd_classify_spread(cfg, std::cout);
    } else if (*fit) {
      cmd_fit_params(cfg, std::cout);
    } else if (*keys) {
      cmd_keyframes(cfg, method == "spread" ? KeyframeMethod::spread : KeyframeMethod::rule, std::cout);
    } else if (*eval) {
      EvaluateInputs in;
      in.predictions = predictions;
      if (truth) in.truth = fs::path(*truth);
      if (keys_a) in.keyframes_a = fs::path(*keys_a);
      if (keys_b) in.keyframes_b = fs::path(*keys_b);
      in.total = total;
      cmd_evaluate(cfg, in, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "framesift: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "framesift: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
