#pragma once

#include "dsqi/schemes.hpp"
#include "dsqi/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsqi {

enum class SegmentKind { steady, transition };

/// Half-open frame range [start_frame, end_frame).
struct Segment {
  SegmentKind kind = SegmentKind::steady;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  ClassId cls = 0;         // steady only
  ClassId from_class = 0;  // transition only
  ClassId to_class = 0;    // transition only

  std::int64_t length() const { return end_frame - start_frame; }
};

class GroundTruthTimeline {
 public:
  GroundTruthTimeline() = default;
  /// Validates contiguity, ordering and steady/transition alternation.
  explicit GroundTruthTimeline(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  std::int64_t num_frames() const { return segments_.empty() ? 0 : segments_.back().end_frame; }
  std::size_t num_transitions() const;
  /// Ground-truth label per frame; transitions take their destination class.
  std::vector<ClassId> frame_labels() const;

 private:
  std::vector<Segment> segments_;
};

struct SteadyMetrics {
  Scalar aer = 0;
  Scalar ter = 0;
  Scalar ins = 0;
  std::size_t segments = 0;
};

struct TransitionBounds {
  std::optional<std::int64_t> offset_frame;
  std::optional<std::int64_t> onset_frame;
};

struct TransitionMetrics {
  Scalar offset_ms = 0;
  Scalar onset_ms = 0;
  Scalar transition_ms = 0;
  Scalar ins = 0;
  Scalar tce = 0;
  Scalar pnm = 0;
  std::size_t included = 0;
  std::size_t excluded = 0;
};

struct MetricsReport {
  SteadyMetrics steady;
  TransitionMetrics transition;
};

inline constexpr int kBoundVoteWindow = 9;

/// Extracts y_tilde from a processed stream.
std::vector<ClassId> decisions_of(std::span<const ProcessedDecision> stream);

/// Centered majority vote with truncated edges; ties go to the latest frame in the window.
std::vector<ClassId> centered_vote(std::span<const ClassId> decisions, int window = kBoundVoteWindow);

SteadyMetrics steady_metrics(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline, ClassId nm_class);

/// `smoothed` must be the centered vote of the decision stream.
TransitionBounds detect_bounds(std::span<const ClassId> smoothed, const Segment& transition);

TransitionMetrics transition_metrics(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline,
                                     ClassId nm_class, Scalar increment_ms = 16);

MetricsReport evaluate(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline, ClassId nm_class,
                       Scalar increment_ms = 16);

/// Unweighted mean across trials within each participant, then across participants.
/// `participant_of[i]` names the participant of `reports[i]`; empty means one participant.
MetricsReport aggregate(std::span<const MetricsReport> reports, std::span<const std::string> participant_of = {});

}  // namespace dsqi
