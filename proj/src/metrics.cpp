#include "dsqi/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace dsqi {

namespace {

void check_alignment(std::size_t stream_frames, const GroundTruthTimeline& timeline) {
  if (static_cast<std::int64_t>(stream_frames) != timeline.num_frames()) {
    std::ostringstream msg;
    msg << "decision stream has " << stream_frames << " frames but timeline covers " << timeline.num_frames();
    throw AlignmentError(msg.str());
  }
}

Scalar changes_rate(std::span<const ClassId> y) {
  if (y.size() < 2) return 0;
  std::size_t changes = 0;
  for (std::size_t i = 1; i < y.size(); ++i) changes += y[i] != y[i - 1];
  return static_cast<Scalar>(changes) / static_cast<Scalar>(y.size() - 1);
}

}  // namespace

GroundTruthTimeline::GroundTruthTimeline(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::int64_t expected_start = 0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    std::ostringstream where;
    where << "timeline segment " << i << ": ";
    if (s.start_frame != expected_start) throw ArgumentError(where.str() + "segments are not contiguous");
    if (s.end_frame <= s.start_frame) throw ArgumentError(where.str() + "empty segment");
    const SegmentKind want = (i % 2 == 0) ? SegmentKind::steady : SegmentKind::transition;
    if (s.kind != want) throw ArgumentError(where.str() + "steady and transition segments must alternate");
    if (s.kind == SegmentKind::steady) {
      if (s.cls < 1) throw ArgumentError(where.str() + "steady segment without a class");
    } else {
      if (s.from_class < 1 || s.to_class < 1) throw ArgumentError(where.str() + "transition without endpoints");
      if (s.from_class != segments_[i - 1].cls) throw ArgumentError(where.str() + "transition does not leave the preceding class");
      if (i + 1 >= segments_.size()) throw ArgumentError(where.str() + "transition must be followed by a steady segment");
      if (s.to_class != segments_[i + 1].cls) throw ArgumentError(where.str() + "transition does not reach the following class");
    }
    expected_start = s.end_frame;
  }
}

std::size_t GroundTruthTimeline::num_transitions() const {
  return static_cast<std::size_t>(
      std::count_if(segments_.begin(), segments_.end(), [](const Segment& s) { return s.kind == SegmentKind::transition; }));
}

std::vector<ClassId> GroundTruthTimeline::frame_labels() const {
  std::vector<ClassId> labels;
  labels.reserve(static_cast<std::size_t>(num_frames()));
  for (const auto& s : segments_) {
    const ClassId c = s.kind == SegmentKind::steady ? s.cls : s.to_class;
    labels.insert(labels.end(), static_cast<std::size_t>(s.length()), c);
  }
  return labels;
}

std::vector<ClassId> decisions_of(std::span<const ProcessedDecision> stream) {
  std::vector<ClassId> y;
  y.reserve(stream.size());
  for (const auto& p : stream) y.push_back(p.decision);
  return y;
}

std::vector<ClassId> centered_vote(std::span<const ClassId> decisions, int window) {
  if (window < 1) throw ArgumentError("vote window must be positive");
  const std::int64_t n = static_cast<std::int64_t>(decisions.size());
  const std::int64_t half = window / 2;
  std::vector<ClassId> out(decisions.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - half);
    const std::int64_t hi = std::min<std::int64_t>(n, i + half + 1);
    out[static_cast<std::size_t>(i)] = window_mode(decisions.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)));
  }
  return out;
}

SteadyMetrics steady_metrics(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline, ClassId nm_class) {
  check_alignment(decisions.size(), timeline);
  SteadyMetrics m;
  for (const auto& s : timeline.segments()) {
    if (s.kind != SegmentKind::steady) continue;
    const auto y = decisions.subspan(static_cast<std::size_t>(s.start_frame), static_cast<std::size_t>(s.length()));
    std::size_t total_errors = 0;
    std::size_t active_errors = 0;
    for (ClassId v : y) {
      if (v != s.cls) {
        ++total_errors;
        if (v != nm_class) ++active_errors;
      }
    }
    const Scalar n = static_cast<Scalar>(y.size());
    m.aer += static_cast<Scalar>(active_errors) / n;
    m.ter += static_cast<Scalar>(total_errors) / n;
    m.ins += changes_rate(y);
    ++m.segments;
  }
  if (m.segments > 0) {
    const Scalar n = static_cast<Scalar>(m.segments);
    m.aer /= n;
    m.ter /= n;
    m.ins /= n;
  }
  return m;
}

TransitionBounds detect_bounds(std::span<const ClassId> smoothed, const Segment& transition) {
  if (transition.kind != SegmentKind::transition) throw ArgumentError("bounds requested for a steady segment");
  TransitionBounds b;
  const auto n = static_cast<std::int64_t>(smoothed.size());
  for (std::int64_t f = transition.start_frame; f < n; ++f)
    if (smoothed[static_cast<std::size_t>(f)] != transition.from_class) {
      b.offset_frame = f;
      break;
    }
  for (std::int64_t f = transition.end_frame; f < n; ++f)
    if (smoothed[static_cast<std::size_t>(f)] == transition.to_class) {
      b.onset_frame = f;
      break;
    }
  return b;
}

TransitionMetrics transition_metrics(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline,
                                     ClassId nm_class, Scalar increment_ms) {
  check_alignment(decisions.size(), timeline);
  const std::vector<ClassId> smoothed = centered_vote(decisions);
  TransitionMetrics m;
  for (const auto& s : timeline.segments()) {
    if (s.kind != SegmentKind::transition) continue;
    const TransitionBounds b = detect_bounds(smoothed, s);
    if (!b.onset_frame) {
      ++m.excluded;
      continue;
    }
    const std::int64_t onset = *b.onset_frame;
    const std::int64_t offset = std::min(b.offset_frame.value_or(s.start_frame), onset);

    m.offset_ms += static_cast<Scalar>(offset - s.start_frame) * increment_ms;
    m.onset_ms += static_cast<Scalar>(onset - s.end_frame) * increment_ms;
    m.transition_ms += static_cast<Scalar>(onset - offset) * increment_ms;

    const auto window = decisions.subspan(static_cast<std::size_t>(offset), static_cast<std::size_t>(onset - offset));
    if (!window.empty()) {
      std::size_t tertiary = 0;
      std::size_t nm = 0;
      for (ClassId v : window) {
        // NM is the correct output when it is one of the endpoints.
        if (v == s.from_class || v == s.to_class) continue;
        if (v == nm_class) {
          ++nm;
        } else {
          ++tertiary;
        }
      }
      const Scalar len = static_cast<Scalar>(window.size());
      m.tce += static_cast<Scalar>(tertiary) / len;
      m.pnm += static_cast<Scalar>(nm) / len;
      m.ins += changes_rate(window);
    }
    ++m.included;
  }
  if (m.included > 0) {
    const Scalar n = static_cast<Scalar>(m.included);
    m.offset_ms /= n;
    m.onset_ms /= n;
    m.transition_ms /= n;
    m.tce /= n;
    m.pnm /= n;
    m.ins /= n;
  }
  return m;
}

MetricsReport evaluate(std::span<const ClassId> decisions, const GroundTruthTimeline& timeline, ClassId nm_class,
                       Scalar increment_ms) {
  return MetricsReport{steady_metrics(decisions, timeline, nm_class),
                       transition_metrics(decisions, timeline, nm_class, increment_ms)};
}

namespace {

MetricsReport mean_of(const std::vector<const MetricsReport*>& group) {
  MetricsReport out;
  std::size_t steady_n = 0;
  std::size_t trans_n = 0;
  for (const MetricsReport* r : group) {
    if (r->steady.segments > 0) {
      out.steady.aer += r->steady.aer;
      out.steady.ter += r->steady.ter;
      out.steady.ins += r->steady.ins;
      ++steady_n;
    }
    out.steady.segments += r->steady.segments;
    if (r->transition.included > 0) {
      out.transition.offset_ms += r->transition.offset_ms;
      out.transition.onset_ms += r->transition.onset_ms;
      out.transition.transition_ms += r->transition.transition_ms;
      out.transition.ins += r->transition.ins;
      out.transition.tce += r->transition.tce;
      out.transition.pnm += r->transition.pnm;
      ++trans_n;
    }
    out.transition.included += r->transition.included;
    out.transition.excluded += r->transition.excluded;
  }
  if (steady_n > 0) {
    const Scalar n = static_cast<Scalar>(steady_n);
    out.steady.aer /= n;
    out.steady.ter /= n;
    out.steady.ins /= n;
  }
  if (trans_n > 0) {
    const Scalar n = static_cast<Scalar>(trans_n);
    out.transition.offset_ms /= n;
    out.transition.onset_ms /= n;
    out.transition.transition_ms /= n;
    out.transition.ins /= n;
    out.transition.tce /= n;
    out.transition.pnm /= n;
  }
  return out;
}

}  // namespace

MetricsReport aggregate(std::span<const MetricsReport> reports, std::span<const std::string> participant_of) {
  if (reports.empty()) throw ArgumentError("nothing to aggregate");
  if (!participant_of.empty() && participant_of.size() != reports.size())
    throw ArgumentError("participant grouping does not match report count");

  std::map<std::string, std::vector<const MetricsReport*>> groups;
  for (std::size_t i = 0; i < reports.size(); ++i)
    groups[participant_of.empty() ? std::string() : participant_of[i]].push_back(&reports[i]);
  if (groups.size() == 1) return mean_of(groups.begin()->second);

  std::vector<MetricsReport> per_participant;
  for (const auto& [name, group] : groups) per_participant.push_back(mean_of(group));
  std::vector<const MetricsReport*> ptrs;
  for (const auto& r : per_participant) ptrs.push_back(&r);
  return mean_of(ptrs);
}

}  // namespace dsqi
