// Runs the framesift binary end to end on the fixtures in tests/data.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include <json.hpp>

#include "fixtures.hpp"
#include "framesift/io.hpp"
#include "framesift/pca.hpp"

namespace fs = std::filesystem;
using fixtures::read_text;
using fixtures::TempDir;
using fixtures::write_text;

namespace {

const fs::path kData = FRAMESIFT_TEST_DATA;

struct Run {
  int code;
  std::string out, err;
};

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Run run(const std::string& args, const TempDir& scratch) {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("'") + FRAMESIFT_CLI + "' " + args + " > " + quote(out) + " 2> " + quote(err);
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text(out), read_text(err)};
}

std::string rule_args(const fs::path& manifest = kData / "rule/manifest.json") {
  return "classify-rule --detections " + quote(kData / "rule/detections.jsonl") + " --manifest " + quote(manifest) +
         " --vocabulary " + quote(kData / "rule/vocabulary.json");
}

std::string spread_args() { return "classify-spread --config " + quote(kData / "spread/config.json"); }

/// The rule fixture with every sequence marked as training, for `select`.
fs::path training_manifest(const TempDir& dir) {
  auto j = nlohmann::json::parse(read_text(kData / "rule/manifest.json"));
  for (auto& s : j["sequences"]) {
    s["split"] = "train";
    for (auto& f : s["frames"]) f["image"] = (kData / "rule" / f["image"].get<std::string>()).string();
  }
  write_text(dir / "train_manifest.json", j.dump());
  return dir / "train_manifest.json";
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) { ::setenv(name, value.c_str(), 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("usage errors exit nonzero") {
  TempDir dir;
  CHECK(run("", dir).code != 0);
  CHECK(run("no-such-command", dir).code != 0);
  CHECK(run("classify-spread --kernel poly", dir).code != 0);
  CHECK(run("--help", dir).code == 0);
}

TEST_CASE("classify-rule reproduces the golden outputs") {
  TempDir dir;
  for (const char* threads : {"1", "3"}) {
    const auto r = run(rule_args() + " --threads " + threads + " -o " + quote(dir / "out"), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("frames 60") != std::string::npos);
    for (const char* f : {"tags.csv", "keyframes.csv"})
      CHECK_MESSAGE(read_text(dir / "out" / f) == read_text(kData / "golden/rule" / f), f);
  }
}

TEST_CASE("classify-spread reproduces the golden outputs") {
  TempDir dir;
  for (const char* threads : {"1", "4"}) {
    const auto r = run(spread_args() + " --threads " + threads + " -o " + quote(dir / "out"), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* f : {"tags.csv", "run_labels.csv", "keyframes.csv", "pca_model.bin"})
      CHECK_MESSAGE(read_text(dir / "out" / f) == read_text(kData / "golden/spread" / f), f);
  }
}

TEST_CASE("a missing image is reported with its path") {
  TempDir dir;
  // seq0 frame 1 has no night flag, so its image is needed.
  auto j = nlohmann::json::parse(read_text(kData / "rule/manifest.json"));
  for (auto& f : j["sequences"][0]["frames"]) f["image"] = (kData / "rule" / f["image"].get<std::string>()).string();
  j["sequences"][0]["frames"][1]["image"] = (dir / "gone.png").string();
  write_text(dir / "m.json", j.dump());
  const auto r = run(rule_args(dir / "m.json") + " -o " + quote(dir / "out"), dir);
  CHECK(r.code != 0);
  CHECK(r.err.find("gone.png") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out/tags.csv"));

  for (auto& seq : j["sequences"]) seq["split"] = "train";
  write_text(dir / "train.json", j.dump());
  const auto s = run("select --manifest " + quote(dir / "train.json") + " -o " + quote(dir / "sel"), dir);
  CHECK(s.code != 0);
  CHECK(s.err.find("gone.png") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "sel"));
}

TEST_CASE("select and the alpha sweep") {
  TempDir dir;
  const auto manifest = training_manifest(dir);
  const auto sweep = run("select --manifest " + quote(manifest) + " --alpha-sweep 0.5,0.8 -o " + quote(dir / "sweep"), dir);
  REQUIRE_MESSAGE(sweep.code == 0, sweep.err);
  const auto summary = read_text(dir / "sweep/sweep_summary.csv");
  CHECK(summary.rfind("alpha,input,structural,selected,retained_fraction\n0.50,60,", 0) == 0);
  for (const char* alpha : {"0.50", "0.80"}) {
    const auto one = run("select --manifest " + quote(manifest) + " --alpha " + alpha + " -o " + quote(dir / "one"), dir);
    REQUIRE(one.code == 0);
    CHECK(read_text(dir / "one/selection.csv") ==
          read_text(dir / "sweep" / (std::string("selection_alpha_") + alpha + ".csv")));
  }
  const auto lo = framesift::read_selection(dir / "sweep/selection_alpha_0.50.csv").size();
  const auto hi = framesift::read_selection(dir / "sweep/selection_alpha_0.80.csv").size();
  CHECK(lo >= 3);  // at least one frame per sequence
  CHECK(lo <= hi);
}

TEST_CASE("flags override --config, which overrides the environment") {
  TempDir dir;
  auto with_dims = [&](int dims, const std::string& name) {
    auto j = nlohmann::json::parse(read_text(kData / "spread/config.json"));
    j["spread"]["pca_dims"] = dims;
    j["manifest"] = (kData / "spread/manifest.json").string();
    j["embeddings"] = (kData / "spread/embeddings.jsonl").string();
    write_text(dir / name, j.dump());
    return dir / name;
  };
  const auto env_cfg = with_dims(4, "env.json");
  const auto file_cfg = with_dims(6, "file.json");
  const ScopedEnv env("FRAMESIFT_CONFIG", env_cfg.string());
  auto dims_after = [&](const std::string& args) {
    const auto r = run("classify-spread --n-runs 2 " + args + " -o " + quote(dir / "out"), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return framesift::load_pca(dir / "out/pca_model.bin").dims();
  };
  CHECK(dims_after("") == 4);
  CHECK(dims_after("--config " + quote(file_cfg)) == 6);
  CHECK(dims_after("--config " + quote(file_cfg) + " --pca-dims 8") == 8);
}

TEST_CASE("an undersized batch limit fails before writing anything") {
  TempDir dir;
  const auto r = run(spread_args() + " --batch-limit 10 -o " + quote(dir / "out"), dir);
  CHECK(r.code != 0);
  CHECK(r.err.find("batch") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("keyframes and evaluate") {
  TempDir dir;
  REQUIRE(run(spread_args() + " -o " + quote(dir / "cls"), dir).code == 0);
  const auto k = run("keyframes --method spread --config " + quote(kData / "spread/config.json") + " -o " +
                         quote(dir / "keys"),
                     dir);
  REQUIRE_MESSAGE(k.code == 0, k.err);
  CHECK(read_text(dir / "keys/keyframes.csv") == read_text(kData / "golden/spread/keyframes.csv"));

  const auto e = run("evaluate --predictions " + quote(dir / "cls/tags.csv") + " --manifest " +
                         quote(kData / "spread/manifest.json") + " --keyframes-a " +
                         quote(dir / "keys/keyframes.csv") + " --keyframes-b " +
                         quote(kData / "golden/rule/keyframes.csv") + " -o " + quote(dir / "eval"),
                     dir);
  REQUIRE_MESSAGE(e.code == 0, e.err);
  const auto metrics = nlohmann::json::parse(read_text(dir / "eval/metrics.json"));
  CHECK(metrics["accuracy"].get<double>() > 0.8);
  const auto overlap = nlohmann::json::parse(read_text(dir / "eval/overlap.json"));
  CHECK(overlap["count_both"] == 0);  // disjoint sequence ids
  CHECK(e.out.find("accuracy") != std::string::npos);
}
