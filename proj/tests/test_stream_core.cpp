#include "dsqi/frames.hpp"
#include "dsqi/types.hpp"

#include <doctest.h>

#include <limits>

using namespace dsqi;

TEST_CASE("confidence vectors enforce the simplex") {
  VectorX ok(3);
  ok << 0.2, 0.3, 0.5;
  const ConfidenceVector c(ok, 4);
  CHECK(c.decision() == 3);
  CHECK(c.max_confidence() == 0.5);
  CHECK(c[1] == 0.2);
  CHECK(c.frame_index() == 4);

  VectorX bad_sum(2);
  bad_sum << 0.5, 0.6;
  CHECK_THROWS_AS((void)ConfidenceVector(bad_sum), ArgumentError);
  VectorX negative(2);
  negative << -0.1, 1.1;
  CHECK_THROWS_AS((void)ConfidenceVector(negative), ArgumentError);
  CHECK_THROWS_AS((void)ConfidenceVector(VectorX()), ArgumentError);
}

TEST_CASE("ties in argmax go to the lowest class id") {
  VectorX v(4);
  v << 0.3, 0.3, 0.1, 0.3;
  CHECK(ConfidenceVector(v).decision() == 1);
}

TEST_CASE("normalized rescales weights onto the simplex") {
  VectorX w(3);
  w << 1, 1, 2;
  const auto c = ConfidenceVector::normalized(w);
  CHECK(c.values()(2) == doctest::Approx(0.5));
  CHECK(c.values().sum() == doctest::Approx(1.0).epsilon(1e-12));
  VectorX zero = VectorX::Zero(3);
  CHECK_THROWS_AS(ConfidenceVector::normalized(zero), ArgumentError);
}

TEST_CASE("decision points mirror their confidence vector") {
  VectorX v(3);
  v << 0.1, 0.7, 0.2;
  const auto p = DecisionPoint::from(ConfidenceVector(v, 9));
  CHECK(p.frame_index == 9);
  CHECK(p.decision == 2);
  CHECK(p.max_confidence == 0.7);
}

TEST_CASE("class catalog validation") {
  CHECK_NOTHROW(ClassCatalog{7, 1}.validate());
  CHECK_THROWS_AS((ClassCatalog{1, 1}.validate()), ConfigError);
  CHECK_THROWS_AS((ClassCatalog{3, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((ClassCatalog{3, 0}.validate()), ConfigError);
}

TEST_CASE("frame geometry at 2 kHz") {
  const FrameGeometry g;
  CHECK(g.frame_samples() == 320);
  CHECK(g.stride_samples() == 32);
  CHECK(g.frame_count(2000) == 53);
  CHECK(g.frame_count(320) == 1);
  CHECK(g.frame_count(319) == 0);
  CHECK(g.samples_for(256) == 512);

  FrameGeometry odd{160, 16, 1001};
  CHECK_THROWS_AS(odd.frame_samples(), ConfigError);
}

TEST_CASE("framing a one second signal") {
  MatrixX signal = MatrixX::Random(2000, 6);
  const auto frames = make_frames(signal, FrameGeometry{});
  REQUIRE(frames.size() == 53);
  CHECK(frames[1].frame_index == 1);
  CHECK(frames[1].start_time_ms == 16);
  CHECK(frames[1].samples.rows() == 320);
  CHECK(frames[1].samples(0, 0) == signal(32, 0));
  CHECK(frames.back().samples(319, 5) == signal(52 * 32 + 319, 5));
}

TEST_CASE("framing boundaries and failures") {
  CHECK(make_frames(MatrixX::Zero(320, 2), FrameGeometry{}).size() == 1);
  CHECK_THROWS_AS(make_frames(MatrixX::Zero(100, 2), FrameGeometry{}), EmptyStreamError);
  MatrixX nan = MatrixX::Zero(400, 2);
  nan(10, 1) = std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(make_frames(nan, FrameGeometry{}), ArgumentError);
  CHECK_THROWS_AS(make_frames(MatrixX::Zero(400, 2), FrameGeometry{0, 16, 2000}), ConfigError);
}

TEST_CASE("mean absolute value") {
  CHECK(mav(MatrixX::Zero(10, 3)).mean == 0);
  const auto neg = mav(MatrixX::Constant(8, 4, -2.0));
  CHECK(neg.mean == 2);
  CHECK(neg.per_channel(3) == 2);

  MatrixX two(5, 2);
  two.col(0).setConstant(1);
  two.col(1).setConstant(3);
  CHECK(mav(two).mean == 2);
}

TEST_CASE("time-domain features") {
  const TimeDomainExtractor ex;
  CHECK(ex.dimension(6) == 24);
  const auto names = ex.feature_names(2);
  REQUIRE(names.size() == 8);
  CHECK(names[0] == "mav_1");
  CHECK(names[2] == "wl_1");

  EmgFrame zero{MatrixX::Zero(320, 6), 0, 0};
  const auto fz = extract_features(zero, ex);
  CHECK(fz.values.size() == 24);
  CHECK(fz.values.head(6).isZero());

  // +1,-1,+1,-1: MAV 1, WL 6, three zero crossings, two slope-sign changes.
  MatrixX alt(4, 1);
  alt << 1, -1, 1, -1;
  const VectorX f = ex.extract(alt);
  CHECK(f(0) == 1);
  CHECK(f(1) == 6);
  CHECK(f(2) == 3);
  CHECK(f(3) == 2);

  EmgFrame r{MatrixX::Random(320, 6), 3, 0};
  const auto a = extract_features(r, ex);
  const auto b = extract_features(r, ex);
  CHECK(a.values == b.values);
  CHECK(a.frame_index == 3);
}

namespace {
struct Broken final : FeatureExtractor {
  Eigen::Index dimension(Eigen::Index) const override { return 2; }
  VectorX extract(const Eigen::Ref<const MatrixX>&) const override { return VectorX::Zero(3); }
  std::vector<std::string> feature_names(Eigen::Index) const override { return {"a", "b"}; }
};
}  // namespace

TEST_CASE("extractor dimension mismatches surface as evaluation errors") {
  EmgFrame f{MatrixX::Zero(10, 1), 0, 0};
  CHECK_THROWS_AS(extract_features(f, Broken{}), EvaluationError);
}
