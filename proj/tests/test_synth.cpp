#include "dsqi/frames.hpp"
#include "dsqi/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace dsqi;

namespace {

std::vector<std::pair<ClassId, ClassId>> transitions_of(const GroundTruthTimeline& tl) {
  std::vector<std::pair<ClassId, ClassId>> out;
  for (const auto& s : tl.segments())
    if (s.kind == SegmentKind::transition) out.emplace_back(s.from_class, s.to_class);
  return out;
}

Scalar segment_rms(const MatrixX& x, const Segment& s, const FrameGeometry& g, int ch) {
  const Eigen::Index lo = s.start_frame * g.stride_samples() + g.frame_samples();
  const Eigen::Index hi = (s.end_frame - 1) * g.stride_samples() + g.frame_samples();
  return std::sqrt(x.col(ch).segment(lo, hi - lo).squaredNorm() / static_cast<Scalar>(hi - lo));
}

}  // namespace

TEST_CASE("all-pairs schedule") {
  for (int k : {2, 3, 7}) {
    const auto tour = all_pairs_schedule(k, 1, 5);
    CHECK(tour.size() == static_cast<std::size_t>(k * (k - 1) + 1));
    CHECK(tour.front() == 1);
    CHECK(tour.back() == 1);
    std::set<std::pair<ClassId, ClassId>> pairs;
    for (std::size_t i = 1; i < tour.size(); ++i) pairs.emplace(tour[i - 1], tour[i]);
    CHECK(pairs.size() == static_cast<std::size_t>(k * (k - 1)));
  }
  CHECK(all_pairs_schedule(7, 1, 5) == all_pairs_schedule(7, 1, 5));
  CHECK(all_pairs_schedule(7, 1, 5) != all_pairs_schedule(7, 1, 6));
}

TEST_CASE("timelines") {
  GeneratorConfig cfg;
  const auto tl = gen_timeline(cfg);
  CHECK(tl.num_transitions() == 42);
  CHECK(tl.segments()[0].length() == 188);
  CHECK(tl.segments()[1].length() == 30);
  CHECK(transitions_of(tl) == transitions_of(gen_timeline(cfg)));

  cfg.num_classes = 3;
  CHECK(gen_timeline(cfg).num_transitions() == 6);

  cfg.schedule = {1};
  const auto rest = gen_timeline(cfg);
  CHECK(rest.segments().size() == 1);
  CHECK(rest.num_transitions() == 0);

  cfg.schedule = {1, 2, 2};
  CHECK_THROWS_AS(gen_timeline(cfg), ArgumentError);
}

TEST_CASE("generator validation") {
  GeneratorConfig cfg;
  cfg.volatility = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GeneratorConfig{};
  cfg.steady_blip_rate = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = GeneratorConfig{};
  cfg.schedule = {1, 9};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("confidence streams") {
  GeneratorConfig cfg;
  cfg.seed = 3;
  const auto tl = gen_timeline(cfg);

  SUBCASE("every vector is a distribution") {
    const auto s = gen_confidence_stream(cfg, tl);
    REQUIRE(static_cast<std::int64_t>(s.size()) == tl.num_frames());
    for (const auto& p : s) CHECK(std::abs(p.confidence.values().sum() - 1) < 1e-9);
  }
  SUBCASE("sharp steady states are classified correctly") {
    cfg.steady_concentration = 1e4;
    const auto s = gen_confidence_stream(cfg, tl);
    std::size_t steady = 0, right = 0;
    for (const auto& seg : tl.segments()) {
      if (seg.kind != SegmentKind::steady) continue;
      for (auto f = seg.start_frame; f < seg.end_frame; ++f) {
        ++steady;
        right += s[static_cast<std::size_t>(f)].decision == seg.cls;
      }
    }
    CHECK(static_cast<Scalar>(right) >= 0.999 * static_cast<Scalar>(steady));
  }
  SUBCASE("noise-free transitions flip exactly once") {
    cfg.volatility = 0;
    const auto s = gen_confidence_stream(cfg, tl);
    for (const auto& seg : tl.segments()) {
      if (seg.kind != SegmentKind::transition) continue;
      int flips = 0;
      for (auto f = seg.start_frame - 1; f < seg.end_frame; ++f)
        flips += s[static_cast<std::size_t>(f + 1)].decision != s[static_cast<std::size_t>(f)].decision;
      CHECK(flips == 1);
      CHECK(s[static_cast<std::size_t>(seg.start_frame - 1)].decision == seg.from_class);
      CHECK(s[static_cast<std::size_t>(seg.end_frame)].decision == seg.to_class);
    }
  }
  SUBCASE("volatility raises transition instability") {
    const auto unstable = [&](Scalar v) {
      cfg.volatility = v;
      const auto s = gen_confidence_stream(cfg, tl);
      int changes = 0;
      for (const auto& seg : tl.segments())
        if (seg.kind == SegmentKind::transition)
          for (auto f = seg.start_frame + 1; f < seg.end_frame; ++f)
            changes += s[static_cast<std::size_t>(f)].decision != s[static_cast<std::size_t>(f - 1)].decision;
      return changes;
    };
    const int low = unstable(0.5), mid = unstable(5), high = unstable(50);
    CHECK(low < mid);
    CHECK(mid < high);
  }
  SUBCASE("seeded and reproducible") {
    const auto a = gen_confidence_stream(cfg, tl);
    const auto b = gen_confidence_stream(cfg, tl);
    for (std::size_t i = 0; i < a.size(); i += 97) CHECK(a[i].confidence.values() == b[i].confidence.values());
    cfg.seed = 4;
    const auto c = gen_confidence_stream(cfg, tl);
    CHECK(a[5].confidence.values() != c[5].confidence.values());
  }
}

TEST_CASE("raw signals") {
  GeneratorConfig cfg;
  cfg.num_classes = 3;
  cfg.steady_ms = 1000;
  const auto tl = gen_timeline(cfg);
  const auto g = cfg.geometry;

  SUBCASE("one frame per timeline frame") {
    const MatrixX x = gen_emg(cfg, tl);
    CHECK(g.frame_count(x.rows()) == tl.num_frames());
    CHECK(x.cols() == 6);
  }
  SUBCASE("zero amplitude gives a silent signal") {
    cfg.amplitude.assign(3, std::vector<Scalar>(6, 0.0));
    const MatrixX x = gen_emg(cfg, tl);
    CHECK(x.isZero());
  }
  SUBCASE("seeds change samples but not segment statistics") {
    cfg.steady_ms = 3000;
    const auto tl = gen_timeline(cfg);
    const MatrixX a = gen_emg(cfg, tl);
    cfg.seed = 99;
    const MatrixX b = gen_emg(cfg, tl);
    CHECK(a != b);
    for (const auto& seg : tl.segments()) {
      if (seg.kind != SegmentKind::steady) continue;
      for (int ch = 0; ch < 6; ++ch) {
        const Scalar ra = segment_rms(a, seg, g, ch), rb = segment_rms(b, seg, g, ch);
        CHECK(std::abs(ra - rb) <= 0.05 * std::max(ra, rb));
      }
    }
  }
  SUBCASE("active holds clear the rest-derived onset threshold") {
    cfg.amplitude = {std::vector<Scalar>(6, 0.01), {1.0, 0.4, 0.2, 0.1, 0.1, 0.2}, {0.1, 0.1, 1.0, 0.4, 0.2, 0.1}};
    const MatrixX x = gen_emg(cfg, tl);
    const auto frames = make_frames(x, g);
    std::vector<Scalar> rest;
    for (const auto& seg : tl.segments())
      if (seg.kind == SegmentKind::steady && seg.cls == 1)
        for (auto f = seg.start_frame; f < seg.end_frame; ++f) rest.push_back(mav(frames[static_cast<std::size_t>(f)]).mean);
    Scalar th = 0;
    {
      Scalar mean = 0, ss = 0;
      for (Scalar v : rest) mean += v;
      mean /= static_cast<Scalar>(rest.size());
      for (Scalar v : rest) ss += (v - mean) * (v - mean);
      th = mean + 3 * std::sqrt(ss / static_cast<Scalar>(rest.size()));
    }
    for (const auto& seg : tl.segments())
      if (seg.kind == SegmentKind::steady && seg.cls == 2)
        for (auto f = seg.start_frame; f < seg.end_frame; ++f)
          CHECK(mav(frames[static_cast<std::size_t>(f)]).mean > 5 * th);
  }
}

TEST_CASE("training features") {
  GeneratorConfig cfg;
  cfg.num_classes = 3;
  const TimeDomainExtractor ex;
  const auto a = gen_training_features(cfg, ex, 160, 2);
  const auto b = gen_training_features(cfg, ex, 256, 2);
  CHECK(a.size() == 3 * 2 * 188);
  CHECK(a.size() == b.size());
  CHECK(a.dimension() == 24);
  CHECK(a.labels == b.labels);
  CHECK(a.features.allFinite());
  CHECK_THROWS_AS(gen_training_features(cfg, ex, 160, 0), ArgumentError);
}

TEST_CASE("mean-MAV proxy separates rest from activity") {
  GeneratorConfig cfg;
  const auto tl = gen_timeline(cfg);
  const auto m = gen_mean_mav(cfg, tl);
  REQUIRE(static_cast<std::int64_t>(m.size()) == tl.num_frames());
  GeneratorConfig rest = cfg;
  rest.schedule = {1};
  const auto nm = gen_mean_mav(rest, gen_timeline(rest));
  Scalar mean = 0, ss = 0;
  for (Scalar v : nm) mean += v;
  mean /= static_cast<Scalar>(nm.size());
  for (Scalar v : nm) ss += (v - mean) * (v - mean);
  const Scalar th = mean + 3 * std::sqrt(ss / static_cast<Scalar>(nm.size()));
  // Active frames always clear the threshold; rest frames exceed it only at the 3-sigma tail rate.
  std::size_t rest_frames = 0, rest_above = 0;
  for (const auto& seg : tl.segments()) {
    if (seg.kind != SegmentKind::steady) continue;
    for (auto f = seg.start_frame; f < seg.end_frame; ++f) {
      const bool above = m[static_cast<std::size_t>(f)] > th;
      if (seg.cls == 1) {
        ++rest_frames;
        rest_above += above;
      } else {
        CHECK(above);
      }
    }
  }
  CHECK(static_cast<Scalar>(rest_above) < 0.01 * static_cast<Scalar>(rest_frames));
}
