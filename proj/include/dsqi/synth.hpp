#pragma once

#include "dsqi/classifiers.hpp"
#include "dsqi/frames.hpp"
#include "dsqi/metrics.hpp"
#include "dsqi/types.hpp"

#include <cstdint>
#include <vector>

namespace dsqi {

enum class TransitionShape { linear, sigmoid };

/// Synthetic session description. Defaults mirror the recorded protocol:
/// 2 kHz, six channels, seven classes, 3 s steady states, all-pairs schedule.
struct GeneratorConfig {
  std::uint64_t seed = 1;
  int num_classes = 7;
  ClassId nm_class = 1;
  int num_channels = 6;
  FrameGeometry geometry;

  Scalar steady_ms = 3000;
  Scalar transition_ms = 480;
  TransitionShape shape = TransitionShape::linear;

  /// K x N_CH RMS levels; empty selects a built-in profile set.
  std::vector<std::vector<Scalar>> amplitude;

  // Confidence-stream emulation.
  Scalar steady_concentration = 400;
  Scalar steady_softening = 0.02;   // mass spread uniformly around the true class
  Scalar steady_blip_rate = 0;      // per-frame chance of a confusion toward another class
  Scalar transition_concentration = 40;
  Scalar transition_diffuseness = 0.5;
  Scalar volatility = 1;            // 0 gives a noise-free cross-fade
  Scalar mav_noise = 0.03;          // relative jitter on the mean-MAV proxy

  /// Ordered class visits; empty selects a seeded all-pairs tour.
  std::vector<ClassId> schedule;

  ClassCatalog catalog() const { return ClassCatalog{num_classes, nm_class}; }
  /// Resolved amplitude profile (built-in profile when `amplitude` is empty).
  std::vector<std::vector<Scalar>> amplitude_profile() const;
  void validate() const;
};

/// Closed tour over every ordered class pair exactly once, starting and
/// ending at the No-Motion class.
std::vector<ClassId> all_pairs_schedule(int num_classes, ClassId start, std::uint64_t seed);

GroundTruthTimeline gen_timeline(const GeneratorConfig& cfg);

/// Samples x channels. Row count is the minimum that yields one frame per timeline frame.
MatrixX gen_emg(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline);

std::vector<DecisionPoint> gen_confidence_stream(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline);

/// Per-frame mean-MAV proxy consistent with the amplitude profile, for
/// amplitude-driven schemes on confidence-only streams.
std::vector<Scalar> gen_mean_mav(const GeneratorConfig& cfg, const GroundTruthTimeline& timeline);

/// Labelled steady-state frames for every class, `repetitions` holds of
/// `cfg.steady_ms` each, framed at `frame_length_ms`. Signals depend only on
/// the seed, so banks at several frame lengths share recordings.
LabeledFeatures gen_training_features(const GeneratorConfig& cfg, const FeatureExtractor& extractor,
                                      Scalar frame_length_ms, int repetitions = 5);

}  // namespace dsqi
