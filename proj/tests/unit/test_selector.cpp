#include <doctest.h>

#include "fixtures.hpp"
#include "framesift/error.hpp"
#include "framesift/metrics.hpp"
#include "framesift/selector.hpp"
#include "oracles.hpp"

using namespace framesift;
using fixtures::MemoryImages;

namespace {

std::vector<std::int64_t> indices(const SelectionResult& r) {
  std::vector<std::int64_t> out;
  for (const auto& s : r.selected) out.push_back(s.frame.frame_index);
  return out;
}

/// 50 frames, scene changes at the listed indices; frames within a segment
/// are jittered copies of one smooth scene.
MemoryImages change_point_sequence(const std::vector<FrameRef>& frames, const std::vector<std::size_t>& changes,
                                   double jitter, std::uint64_t seed) {
  MemoryImages m;
  std::size_t segment = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (segment < changes.size() && i == changes[segment]) ++segment;
    const auto base = fixtures::scene(40, 32, seed * 100 + segment);
    m.put(frames[i], fixtures::jitter(base, jitter, seed * 1000 + i));
  }
  return m;
}

}  // namespace

TEST_SUITE("select_structural") {
  TEST_CASE("identical frames keep only the first") {
    const auto frames = fixtures::frames("s", 100);
    MemoryImages m;
    const auto img = fixtures::noise(16, 16, 1);
    for (const auto& f : frames) m.put(f, img);
    const auto r = select_structural(frames, {0.5, 2, 0.4}, m.loader());
    CHECK(indices(r) == std::vector<std::int64_t>{0});
    CHECK(r.input_count == 100);
    CHECK(r.retained_fraction == doctest::Approx(0.01));
    CHECK_FALSE(r.selected[0].ssim_to_prev_ref.has_value());
  }

  TEST_CASE("alternating orthogonal noise, step 2") {
    // Even frames show A, odd frames B; ssim(A, B) < 0.5. Probes from frame 0
    // land on 2, 4, 6, 8 (all A, s = 1) and then the clamp puts the last probe
    // on 9 (B), which becomes the only new reference.
    const auto a = fixtures::noise(24, 24, 11), b = fixtures::noise(24, 24, 12);
    REQUIRE(ssim(a, b) < 0.5);
    const auto frames = fixtures::frames("s", 10);
    MemoryImages m;
    for (const auto& f : frames) m.put(f, f.frame_index % 2 ? b : a);
    const auto r = select_structural(frames, {0.5, 2, 0.4}, m.loader());
    CHECK(indices(r) == std::vector<std::int64_t>{0, 9});
    CHECK(*r.selected[1].ssim_to_prev_ref == doctest::Approx(ssim(a, b)));

    // With step 1 every probe alternates image, so every frame is selected.
    const auto all = select_structural(frames, {0.5, 1, 0.4}, m.loader());
    CHECK(all.selected.size() == 10);

    // An odd count ends on an A frame: nothing after frame 0 qualifies.
    const auto odd = fixtures::frames("s", 11);
    MemoryImages m2;
    for (const auto& f : odd) m2.put(f, f.frame_index % 2 ? b : a);
    CHECK(indices(select_structural(odd, {0.5, 2, 0.4}, m2.loader())) == std::vector<std::int64_t>{0});
  }

  TEST_CASE("alpha just above one selects every probe") {
    const auto frames = fixtures::frames("s", 12);
    MemoryImages m;
    const auto img = fixtures::scene(16, 16, 3);
    for (const auto& f : frames) m.put(f, img);
    const auto r = select_structural(frames, {1.0 + 1e-9, 2, 0.4}, m.loader());
    CHECK(indices(r) == std::vector<std::int64_t>{0, 2, 4, 6, 8, 10, 11});
    const auto r3 = select_structural(frames, {1.0 + 1e-9, 3, 0.4}, m.loader());
    CHECK(indices(r3) == std::vector<std::int64_t>{0, 3, 6, 9, 11});
  }

  TEST_CASE("single frame and two frames") {
    MemoryImages m;
    const auto one = fixtures::frames("s", 1);
    m.put(one[0], fixtures::noise(8, 8, 0));
    CHECK(indices(select_structural(one, {}, m.loader())) == std::vector<std::int64_t>{0});
    CHECK(m.loads == 0);  // nothing to compare against
  }

  TEST_CASE("input validation") {
    MemoryImages m;
    CHECK_THROWS_AS(select_structural(std::vector<FrameRef>{}, {}, m.loader()), ValidationError);
    std::vector<FrameRef> unordered = {{"s", 3, std::nullopt}, {"s", 1, std::nullopt}};
    CHECK_THROWS_AS(select_structural(unordered, {}, m.loader()), ValidationError);
    std::vector<FrameRef> mixed = {{"s", 0, std::nullopt}, {"t", 1, std::nullopt}};
    CHECK_THROWS_AS(select_structural(mixed, {}, m.loader()), ValidationError);

    const auto frames = fixtures::frames("s", 3);
    m.put(frames[0], fixtures::noise(8, 8, 0));
    m.put(frames[2], fixtures::noise(9, 8, 0));
    CHECK_THROWS_AS(select_structural(frames, {}, m.loader()), ValidationError);
  }

  TEST_CASE("missing image names the frame and path") {
    fixtures::TempDir dir;
    save_gray_png(fixtures::noise(8, 8, 0), dir / "0.png");
    std::vector<FrameRef> frames = {{"seqA", 0, dir / "0.png"}, {"seqA", 1, dir / "0.png"},
                                    {"seqA", 2, dir / "missing.png"}};
    try {
      select_structural(frames, {}, image_file_loader());
      FAIL("expected an error");
    } catch (const IoError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("seqA#2") != std::string::npos);
      CHECK(msg.find("missing.png") != std::string::npos);
    }
  }

  TEST_CASE("matches the pseudocode transcription and is monotone in alpha") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const auto frames = fixtures::frames("s", 30 + seed);
      const auto m = change_point_sequence(frames, {5 + seed % 3, 14, 22}, 0.05 + 0.03 * (seed % 4), seed);
      const auto load = m.loader();
      std::size_t previous = 0;
      for (double alpha : {0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
        for (int step : {1, 2, 3}) {
          const auto r = select_structural(frames, {alpha, step, 0.0}, load);
          const auto expect = oracles::structural_selection(
              frames.size(), alpha, static_cast<std::size_t>(step),
              [&](std::size_t i, std::size_t j) { return ssim(load(frames[i]), load(frames[j])); });
          std::vector<std::int64_t> want(expect.begin(), expect.end());
          CHECK(indices(r) == want);
          for (std::size_t k = 1; k < r.selected.size(); ++k) {
            CHECK(r.selected[k].frame.frame_index > r.selected[k - 1].frame.frame_index);
            CHECK(*r.selected[k].ssim_to_prev_ref < alpha);
            CHECK(ssim(load(r.selected[k - 1].frame), load(r.selected[k].frame)) < alpha);
          }
        }
        const auto r = select_structural(frames, {alpha, 2, 0.0}, load);
        CHECK(r.selected.size() >= previous);
        previous = r.selected.size();

        // Re-running on the output keeps only frames already there.
        const auto again = select_structural(r.frames(), {alpha, 2, 0.0}, load);
        for (const auto& f : again.selected)
          CHECK(std::any_of(r.selected.begin(), r.selected.end(),
                            [&](const auto& s) { return s.frame == f.frame; }));
      }
    }
  }
}

TEST_SUITE("filter_quality") {
  TEST_CASE("identical frames are all kept at 0.5") {
    const auto frames = fixtures::frames("s", 4);
    MemoryImages m;
    for (const auto& f : frames) m.put(f, fixtures::checkerboard(16, 16, 2));
    const auto kept = filter_quality(std::span<const FrameRef>(frames), 0.4, m.loader());
    REQUIRE(kept.size() == 4);
    for (const auto& k : kept) CHECK(*k.blur_norm == 0.5);
  }

  TEST_CASE("sharp survives, blurred does not") {
    const auto frames = fixtures::frames("s", 2);
    MemoryImages m;
    const auto sharp = fixtures::checkerboard(32, 32, 2);
    m.put(frames[0], sharp);
    m.put(frames[1], fixtures::box_blur(sharp, 2));
    const auto kept = filter_quality(std::span<const FrameRef>(frames), 0.7, m.loader());
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].frame.frame_index == 0);
    CHECK(*kept[0].blur_norm == 1.0);
  }

  TEST_CASE("order preserved, empty input") {
    MemoryImages m;
    CHECK(filter_quality(std::span<const FrameRef>(), 0.4, m.loader()).empty());
    const auto frames = fixtures::frames("s", 6);
    for (const auto& f : frames) m.put(f, fixtures::box_blur(fixtures::noise(20, 20, f.frame_index), f.frame_index % 3));
    const auto kept = filter_quality(std::span<const FrameRef>(frames), 0.3, m.loader());
    for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1].frame.frame_index < kept[i].frame.frame_index);
  }
}

TEST_SUITE("select_training_subset") {
  TEST_CASE("single one-frame sequence") {
    MemoryImages m;
    std::vector<std::vector<FrameRef>> seqs = {fixtures::frames("a", 1)};
    m.put(seqs[0][0], fixtures::noise(8, 8, 1));
    const auto r = select_training_subset(seqs, {}, m.loader());
    REQUIRE(r.selected.size() == 1);
    CHECK(r.selected[0].frame == seqs[0][0]);
    CHECK(r.retained_fraction == 1.0);
  }

  TEST_CASE("two sequences of identical frames give one frame each") {
    MemoryImages m;
    std::vector<std::vector<FrameRef>> seqs = {fixtures::frames("a", 20), fixtures::frames("b", 15)};
    for (const auto& seq : seqs)
      for (const auto& f : seq) m.put(f, fixtures::scene(16, 16, seq[0].sequence_id == "a" ? 1 : 2));
    const auto r = select_training_subset(seqs, {}, m.loader());
    REQUIRE(r.selected.size() == 2);
    CHECK(r.selected[0].frame.sequence_id == "a");
    CHECK(r.selected[1].frame.sequence_id == "b");
    CHECK(r.input_count == 35);
    CHECK(r.structural_count == 2);
  }

  TEST_CASE("five abrupt scene changes in 50 frames") {
    // Quality filtering is disabled: min-max normalization over the handful
    // of references would otherwise drop frames for reasons unrelated to
    // structure.
    const std::vector<std::size_t> changes = {8, 17, 25, 33, 42};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      std::vector<std::vector<FrameRef>> seqs = {fixtures::frames("cp", 50)};
      const auto m = change_point_sequence(seqs[0], changes, 0.03, seed + 1);
      const auto r = select_training_subset(seqs, {0.6, 2, 0.0}, m.loader());
      CHECK(r.selected.size() >= 5);
      CHECK(r.selected.size() <= 7);
      const auto load = m.loader();
      const auto expect = oracles::structural_selection(
          50, 0.6, 2, [&](std::size_t i, std::size_t j) { return ssim(load(seqs[0][i]), load(seqs[0][j])); });
      CHECK(r.selected.size() == expect.size());
    }
  }

  TEST_CASE("retained fraction band over the alpha sweep") {
    const std::vector<std::size_t> changes = {8, 17, 25, 33, 42};
    std::vector<std::vector<FrameRef>> seqs = {fixtures::frames("cp", 50)};
    const auto m = change_point_sequence(seqs[0], changes, 0.08, 7);
    double lo = 1.0, hi = 0.0;
    for (double alpha : {0.4, 0.5, 0.6, 0.7, 0.8}) {
      const double f = select_training_subset(seqs, {alpha, 2, 0.0}, m.loader()).retained_fraction;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    CHECK(lo >= 0.1);
    CHECK(hi <= 0.6);
    CHECK(hi > lo);
  }
}
