#include "dsqi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dsqi {

namespace {

enum class StreamTag : std::uint32_t { schedule = 1, emg = 2, confidence = 3, mav = 4, training = 5 };

std::mt19937_64 make_rng(std::uint64_t seed, StreamTag tag, std::uint32_t a = 0, std::uint32_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), a, b};
  return std::mt19937_64(seq);
}

Scalar shaped(Scalar w, TransitionShape shape) {
  w = std::clamp<Scalar>(w, 0, 1);
  if (shape == TransitionShape::linear) return w;
  // Logistic ramp rescaled to hit 0 and 1 at the ends.
  const auto logistic = [](Scalar x) { return 1 / (1 + std::exp(-10 * (x - 0.5))); };
  return (logistic(w) - logistic(0)) / (logistic(1) - logistic(0));
}

// Position of a continuous frame coordinate within the timeline.
struct Envelope {
  ClassId from = 0;
  ClassId to = 0;
  Scalar weight = 0;  // raw progress toward `to`, before shaping
  bool transition = false;
};

Envelope envelope_at(const GroundTruthTimeline& timeline, Scalar frame_pos) {
  const auto& segs = timeline.segments();
  const Scalar clamped = std::clamp<Scalar>(frame_pos, 0, static_cast<Scalar>(timeline.num_frames()) - 1e-9);
  const auto f = static_cast<std::int64_t>(std::floor(clamped));
  const auto it = std::upper_bound(segs.begin(), segs.end(), f,
                                   [](std::int64_t v, const Segment& s) { return v < s.end_frame; });
  const Segment& s = *it;
  if (s.kind == SegmentKind::steady) return Envelope{s.cls, s.cls, 0, false};
  const Scalar w = (clamped - static_cast<Scalar>(s.start_frame)) / static_cast<Scalar>(s.length());
  return Envelope{s.from_class, s.to_class, w, true};
}

VectorX profile_row(const std::vector<std::vector<Scalar>>& amp, ClassId k) {
  const auto& row = amp[static_cast<std::size_t>(k - 1)];
  return Eigen::Map<const VectorX>(row.data(), static_cast<Eigen::Index>(row.size()));
}

VectorX softened_one_hot(int num_classes, ClassId k, Scalar softening) {
  VectorX t = VectorX::Constant(num_classes, softening / num_classes);
  t(k - 1) += 1 - softening;
  return t;
}

VectorX dirichlet(const VectorX& target, Scalar concentration, std::mt19937_64& rng) {
  VectorX draw(target.size());
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    const Scalar alpha = concentration * target(k);
    draw(k) = alpha > 0 ? std::gamma_distribution<Scalar>(alpha, 1.0)(rng) : 0;
  }
  if (!(draw.sum() > 0) || !draw.allFinite()) return target;
  return draw;
}

}  // namespace

std::vector<std::vector<Scalar>> GeneratorConfig::amplitude_profile() const {
  if (!amplitude.empty()) return amplitude;
  std::vector<std::vector<Scalar>> amp(static_cast<std::size_t>(num_classes),
                                       std::vector<Scalar>(static_cast<std::size_t>(num_channels), 0.1));
  int active = 0;
  for (ClassId k = 1; k <= num_classes; ++k) {
    auto& row = amp[static_cast<std::size_t>(k - 1)];
    if (k == nm_class) {
      std::fill(row.begin(), row.end(), 0.01);
      continue;
    }
    const int peak = active % num_channels;
    const Scalar gain = 1.0 + 0.5 * static_cast<Scalar>(active / num_channels);
    row[static_cast<std::size_t>(peak)] = gain;
    if (num_channels > 1) {
      row[static_cast<std::size_t>((peak + 1) % num_channels)] = 0.4 * gain;
      row[static_cast<std::size_t>((peak + num_channels - 1) % num_channels)] =
          std::max<Scalar>(row[static_cast<std::size_t>((peak + num_channels - 1) % num_channels)], 0.2 * gain);
    }
    ++active;
  }
  return amp;
}

void GeneratorConfig::validate() const {
  catalog().validate();
  if (num_channels < 1) throw ConfigError("need at least one channel");
  geometry.frame_samples();
  geometry.stride_samples();
  if (!(steady_ms > 0) || !(transition_ms > 0)) throw ConfigError("segment durations must be positive");
  if (!(steady_concentration > 0) || !(transition_concentration > 0))
    throw ConfigError("concentrations must be positive");
  if (!(steady_softening >= 0 && steady_softening < 1)) throw ConfigError("steady softening must lie in [0,1)");
  if (!(steady_blip_rate >= 0 && steady_blip_rate <= 1)) throw ConfigError("blip rate must lie in [0,1]");
  if (!(transition_diffuseness >= 0 && transition_diffuseness < 1))
    throw ConfigError("transition diffuseness must lie in [0,1)");
  if (!(volatility >= 0)) throw ConfigError("volatility must be non-negative");
  if (!(mav_noise >= 0)) throw ConfigError("MAV noise must be non-negative");
  const auto amp = amplitude_profile();
  if (amp.size() != static_cast<std::size_t>(num_classes)) throw ConfigError("amplitude profile needs one row per class");
  for (const auto& row : amp) {
    if (row.size() != static_cast<std::size_t>(num_channels))
      throw ConfigError("amplitude profile needs one column per channel");
    for (Scalar v : row)
      if (!(v >= 0)) throw ConfigError("amplitudes must be non-negative");
  }
  for (ClassId k : schedule)
    if (k < 1 || k > num_classes) throw ConfigError("schedule references a class outside 1..K");
}

std::vector<ClassId> all_pairs_schedule(int num_classes, ClassId start, std::uint64_t seed) {
  if (num_classes < 2) throw ArgumentError("all-pairs schedule needs at least two classes");
  auto rng = make_rng(seed, StreamTag::schedule);
  // Hierholzer on the complete digraph with shuffled out-edges.
  std::vector<std::vector<ClassId>> out(static_cast<std::size_t>(num_classes) + 1);
  for (ClassId a = 1; a <= num_classes; ++a) {
    for (ClassId b = 1; b <= num_classes; ++b)
      if (a != b) out[static_cast<std::size_t>(a)].push_back(b);
    std::shuffle(out[static_cast<std::size_t>(a)].begin(), out[static_cast<std::size_t>(a)].end(), rng);
  }
  std::vector<ClassId> stack{start};
  std::vector<ClassId> tour;
  while (!stack.empty()) {
    auto& edges = out[static_cast<std::size_t>(stack.back())];
    if (edges.empty()) {
      tour.push_back(stack.back());
      stack.pop_back();
    } else {
      stack.push_back(edges.back());
      edges.pop_back();
    }
  }
  std::reverse(tour.begin(), tour.end());
  return tour;
}

GroundTruthTimeline gen_timeline(const GeneratorConfig& cfg) {
  cfg.validate();
  const std::vector<ClassId> schedule =
      cfg.schedule.empty() ? all_pairs_schedule(cfg.num_classes, cfg.nm_class, cfg.seed) : cfg.schedule;
  if (schedule.empty()) throw ArgumentError("empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] == schedule[i - 1]) throw ArgumentError("schedule repeats a class without a transition");

  const auto frames_for = [&](Scalar ms) {
    return std::max<std::int64_t>(1, std::llround(ms / cfg.geometry.increment_ms));
  };
  const std::int64_t steady = frames_for(cfg.steady_ms);
  const std::int64_t transition = frames_for(cfg.transition_ms);

  std::vector<Segment> segs;
  std::int64_t at = 0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0) {
      segs.push_back(Segment{SegmentKind::transition, at, at + transition, 0, schedule[i - 1], schedule[i]});
      at += transition;
    }
    segs.push_back(Segment{SegmentKind::steady, at, at + steady, schedule[i], 0, 0});
    at += steady;
  }
  return GroundTruthTimeline(std::move(segs));
}

MatrixX gen_emg(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline) {
  cfg.validate();
  const Eigen::Index m = cfg.geometry.frame_samples();
  const Eigen::Index stride = cfg.geometry.stride_samples();
  const std::int64_t frames = timeline.num_frames();
  if (frames < 1) throw ArgumentError("empty timeline");
  const Eigen::Index rows = static_cast<Eigen::Index>(frames - 1) * stride + m;
  const auto amp = cfg.amplitude_profile();

  auto rng = make_rng(cfg.seed, StreamTag::emg);
  std::normal_distribution<Scalar> noise(0, 1);
  MatrixX signal(rows, cfg.num_channels);
  for (Eigen::Index s = 0; s < rows; ++s) {
    // A sample belongs to the frame whose newest stride block contains it.
    const Scalar pos = static_cast<Scalar>(s - (m - stride)) / static_cast<Scalar>(stride);
    const Envelope e = envelope_at(timeline, pos);
    const Scalar w = shaped(e.weight, cfg.shape);
    const VectorX level = (1 - w) * profile_row(amp, e.from) + w * profile_row(amp, e.to);
    for (Eigen::Index ch = 0; ch < cfg.num_channels; ++ch) signal(s, ch) = level(ch) * noise(rng);
  }
  return signal;
}

std::vector<DecisionPoint> gen_confidence_stream(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline) {
  cfg.validate();
  const int k_count = cfg.num_classes;
  const VectorX uniform = VectorX::Constant(k_count, 1.0 / k_count);
  auto rng = make_rng(cfg.seed, StreamTag::confidence);
  std::uniform_real_distribution<Scalar> unit(0, 1);
  std::uniform_int_distribution<int> other(1, k_count - 1);

  std::vector<DecisionPoint> points;
  points.reserve(static_cast<std::size_t>(timeline.num_frames()));
  for (const Segment& s : timeline.segments()) {
    for (std::int64_t f = s.start_frame; f < s.end_frame; ++f) {
      VectorX weights;
      if (s.kind == SegmentKind::steady) {
        VectorX target = softened_one_hot(k_count, s.cls, cfg.steady_softening);
        if (cfg.steady_blip_rate > 0 && unit(rng) < cfg.steady_blip_rate) {
          int confused = other(rng);
          if (confused >= s.cls) ++confused;
          target = 0.35 * target + 0.65 * softened_one_hot(k_count, confused, cfg.steady_softening);
        }
        weights = dirichlet(target, cfg.steady_concentration, rng);
      } else {
        const Scalar w = (static_cast<Scalar>(f - s.start_frame) + 0.5) / static_cast<Scalar>(s.length());
        const Scalar ws = shaped(w, cfg.shape);
        VectorX interp = VectorX::Zero(k_count);
        interp(s.from_class - 1) = 1 - ws;
        interp(s.to_class - 1) += ws;
        const Scalar diffuse = cfg.transition_diffuseness * std::sin(std::numbers::pi * w);
        const VectorX target = (1 - diffuse) * interp + diffuse * uniform;
        weights = cfg.volatility > 0 ? dirichlet(target, cfg.transition_concentration / cfg.volatility, rng) : target;
      }
      points.push_back(DecisionPoint::from(ConfidenceVector::normalized(weights, f)));
    }
  }
  return points;
}

std::vector<Scalar> gen_mean_mav(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline) {
  cfg.validate();
  const auto amp = cfg.amplitude_profile();
  auto rng = make_rng(cfg.seed, StreamTag::mav);
  std::normal_distribution<Scalar> jitter(0, cfg.mav_noise);
  const Scalar mav_per_rms = std::sqrt(2 / std::numbers::pi);

  std::vector<Scalar> out;
  out.reserve(static_cast<std::size_t>(timeline.num_frames()));
  for (std::int64_t f = 0; f < timeline.num_frames(); ++f) {
    const Envelope e = envelope_at(timeline, static_cast<Scalar>(f) + 0.5);
    const Scalar w = shaped(e.weight, cfg.shape);
    const VectorX level = (1 - w) * profile_row(amp, e.from) + w * profile_row(amp, e.to);
    out.push_back(std::max<Scalar>(0, level.mean() * mav_per_rms * (1 + jitter(rng))));
  }
  return out;
}

LabeledFeatures gen_training_features(const GeneratorConfig& cfg, const FeatureExtractor& extractor,
                                      Scalar frame_length_ms, int repetitions) {
  cfg.validate();
  if (repetitions < 1) throw ArgumentError("need at least one training repetition");
  FrameGeometry geometry = cfg.geometry;
  geometry.frame_length_ms = frame_length_ms;
  const Eigen::Index m = geometry.frame_samples();
  const Eigen::Index stride = geometry.stride_samples();
  const auto amp = cfg.amplitude_profile();
  // Hold long enough for the longest adaptive frame to produce the same frame count.
  const Eigen::Index hold = cfg.geometry.samples_for(cfg.steady_ms);
  const Eigen::Index rows = hold + cfg.geometry.samples_for(256);

  std::vector<VectorX> rows_out;
  std::vector<ClassId> labels;
  for (ClassId k = 1; k <= cfg.num_classes; ++k) {
    const VectorX level = profile_row(amp, k);
    for (int r = 0; r < repetitions; ++r) {
      auto rng = make_rng(cfg.seed, StreamTag::training, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r));
      std::normal_distribution<Scalar> noise(0, 1);
      MatrixX signal(rows, cfg.num_channels);
      for (Eigen::Index s = 0; s < rows; ++s)
        for (Eigen::Index ch = 0; ch < cfg.num_channels; ++ch) signal(s, ch) = level(ch) * noise(rng);
      // Frames end on the same samples regardless of length.
      for (Eigen::Index end = rows - hold; end <= rows; end += stride) {
        rows_out.push_back(extractor.extract(signal.middleRows(end - m, m)));
        labels.push_back(k);
      }
    }
  }
  LabeledFeatures data;
  data.features.resize(static_cast<Eigen::Index>(rows_out.size()), extractor.dimension(cfg.num_channels));
  for (std::size_t i = 0; i < rows_out.size(); ++i) data.features.row(static_cast<Eigen::Index>(i)) = rows_out[i].transpose();
  data.labels = std::move(labels);
  return data;
}

}  // namespace dsqi
