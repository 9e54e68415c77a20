#pragma once

// Shared fixtures and batch oracles. Oracles recompute every frame from the
// whole stream with plain loops; they share nothing with the streaming code.

#include "dsqi/metrics.hpp"
#include "dsqi/schemes.hpp"
#include "dsqi/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace dsqi::test {

inline DecisionPoint point_of(std::vector<Scalar> c, std::int64_t frame = 0) {
  VectorX v(static_cast<Eigen::Index>(c.size()));
  for (std::size_t k = 0; k < c.size(); ++k) v(static_cast<Eigen::Index>(k)) = c[k];
  return DecisionPoint::from(ConfidenceVector(v, frame));
}

/// Confidence vector peaking at `cls` with peak value `peak`, rest spread evenly.
inline DecisionPoint peaked(int num_classes, ClassId cls, Scalar peak, std::int64_t frame = 0) {
  std::vector<Scalar> c(static_cast<std::size_t>(num_classes), (1 - peak) / (num_classes - 1));
  c[static_cast<std::size_t>(cls - 1)] = peak;
  return point_of(c, frame);
}

/// Random stream with runs of a dominant class and some diffuse frames.
inline std::vector<DecisionPoint> random_stream(std::uint64_t seed, std::size_t frames, int num_classes = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> u(0, 1);
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::vector<DecisionPoint> out;
  int current = cls(rng);
  for (std::size_t i = 0; i < frames; ++i) {
    if (u(rng) < 0.08) current = cls(rng);
    VectorX w(num_classes);
    for (int k = 0; k < num_classes; ++k) w(k) = u(rng) * 0.3;
    w(current) += u(rng) < 0.8 ? 1.5 : 0.1;
    out.push_back(DecisionPoint::from(ConfidenceVector::normalized(w, static_cast<std::int64_t>(i))));
  }
  return out;
}

/// Mode of decisions[i-m..i]; ties go to the latest occurrence.
inline std::vector<ClassId> batch_mv(const std::vector<DecisionPoint>& s, int m) {
  std::vector<ClassId> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(m) ? i - static_cast<std::size_t>(m) : 0;
    ClassId best = 0;
    int best_count = -1;
    std::size_t best_last = 0;
    for (std::size_t j = lo; j <= i; ++j) {
      const ClassId c = s[j].decision;
      int count = 0;
      std::size_t last = 0;
      for (std::size_t t = lo; t <= i; ++t)
        if (s[t].decision == c) {
          ++count;
          last = t;
        }
      if (count > best_count || (count == best_count && last > best_last)) {
        best = c;
        best_count = count;
        best_last = last;
      }
    }
    out.push_back(best);
  }
  return out;
}

inline std::vector<Scalar> oracle_bf_offsets(int m) {
  std::vector<Scalar> a(static_cast<std::size_t>(m + 1));
  Scalar denom = 0;
  for (int l = 1; l <= m + 1; ++l) denom += std::exp(-0.5 * l / (m + 1.0));
  for (int n = 0; n <= m; ++n) a[static_cast<std::size_t>(n)] = 10 * std::exp(-0.5 * (n + 1) / (m + 1.0)) / denom;
  return a;
}

/// Normalised product over the current and previous m confidence vectors.
inline std::vector<std::vector<Scalar>> batch_bf(const std::vector<DecisionPoint>& s, int m) {
  const auto a = oracle_bf_offsets(m);
  std::vector<std::vector<Scalar>> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int k_count = s[i].confidence.num_classes();
    std::vector<Scalar> p(static_cast<std::size_t>(k_count), 1.0);
    for (int n = 0; n <= m && static_cast<std::size_t>(n) <= i; ++n)
      for (int k = 0; k < k_count; ++k) p[static_cast<std::size_t>(k)] *= s[i - n].confidence.values()(k) + a[n];
    Scalar total = 0;
    for (Scalar x : p) total += x;
    for (Scalar& x : p) x = std::min<Scalar>(x / total, 1);
    out.push_back(p);
  }
  return out;
}

inline std::size_t argmax_of(const std::vector<Scalar>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

/// VoCIR thresholds: Th_min + beta * max_k var(c_k over frames i-m..i), clamped.
inline std::vector<Scalar> batch_vocir_thresholds(const std::vector<DecisionPoint>& s, const SchemeConfig& cfg) {
  std::vector<Scalar> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(cfg.history) ? i - static_cast<std::size_t>(cfg.history) : 0;
    const Scalar n = static_cast<Scalar>(i - lo + 1);
    Scalar v = 0;
    for (int k = 0; k < s[i].confidence.num_classes(); ++k) {
      Scalar sum = 0;
      for (std::size_t j = lo; j <= i; ++j) sum += s[j].confidence.values()(k);
      const Scalar mean = sum / n;
      Scalar ss = 0;
      for (std::size_t j = lo; j <= i; ++j) {
        const Scalar d = s[j].confidence.values()(k) - mean;
        ss += d * d;
      }
      v = std::max(v, ss / n);
    }
    out.push_back(std::min(cfg.threshold_max, cfg.threshold_min + cfg.beta * v));
  }
  return out;
}

/// steady(a, n) -> transition(len) -> steady(b, n) ...
inline GroundTruthTimeline make_timeline(const std::vector<ClassId>& classes, std::int64_t steady, std::int64_t transition) {
  std::vector<Segment> segs;
  std::int64_t f = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i > 0) {
      segs.push_back(Segment{SegmentKind::transition, f, f + transition, 0, classes[i - 1], classes[i]});
      f += transition;
    }
    segs.push_back(Segment{SegmentKind::steady, f, f + steady, classes[i], 0, 0});
    f += steady;
  }
  return GroundTruthTimeline(std::move(segs));
}

inline StreamInput stream_of(std::vector<DecisionPoint> points) {
  StreamInput in;
  in.points = std::move(points);
  return in;
}

}  // namespace dsqi::test
