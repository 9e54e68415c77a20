#pragma once

#include "dsqi/types.hpp"

#include <memory>
#include <string>

namespace dsqi {

/// Sample/frame geometry shared by framing, synthesis and adaptive windowing.
struct FrameGeometry {
  Scalar frame_length_ms = 160;
  Scalar increment_ms = 16;
  Scalar sample_rate_hz = 2000;

  /// Samples per frame (M). Throws ConfigError when not an integer.
  Eigen::Index frame_samples() const;
  /// Samples per increment (frame stride). Throws ConfigError when not an integer.
  Eigen::Index stride_samples() const;
  /// Samples covered by an arbitrary duration; throws when not integral.
  Eigen::Index samples_for(Scalar duration_ms) const;
  /// Number of complete frames in a signal of `num_samples` rows.
  std::int64_t frame_count(Eigen::Index num_samples) const;
};

/// M x N_CH block of samples with its position in the stream.
struct EmgFrame {
  MatrixX samples;
  std::int64_t frame_index = 0;
  Scalar start_time_ms = 0;
};

struct FeatureVector {
  VectorX values;
  std::int64_t frame_index = 0;
};

std::vector<EmgFrame> make_frames(const MatrixX& signal, const FrameGeometry& geometry);

struct MavSummary {
  VectorX per_channel;
  Scalar mean = 0;
};

template <typename Derived>
MavSummary mav(const Eigen::MatrixBase<Derived>& samples) {
  MavSummary out;
  out.per_channel = samples.cwiseAbs().colwise().mean().transpose();
  out.mean = out.per_channel.mean();
  return out;
}

inline MavSummary mav(const EmgFrame& frame) { return mav(frame.samples); }

/// h(EMG_i): maps a frame to a fixed-length feature vector.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual Eigen::Index dimension(Eigen::Index num_channels) const = 0;
  virtual VectorX extract(const Eigen::Ref<const MatrixX>& samples) const = 0;
  virtual std::vector<std::string> feature_names(Eigen::Index num_channels) const = 0;
};

/// MAV, waveform length, zero crossings and slope-sign changes per channel,
/// laid out feature-major: [mav_1..mav_C, wl_1..wl_C, zc_1..zc_C, ssc_1..ssc_C].
class TimeDomainExtractor final : public FeatureExtractor {
 public:
  explicit TimeDomainExtractor(Scalar zc_threshold = 0, Scalar ssc_threshold = 0)
      : zc_threshold_(zc_threshold), ssc_threshold_(ssc_threshold) {}

  Eigen::Index dimension(Eigen::Index num_channels) const override { return 4 * num_channels; }
  VectorX extract(const Eigen::Ref<const MatrixX>& samples) const override;
  std::vector<std::string> feature_names(Eigen::Index num_channels) const override;

 private:
  Scalar zc_threshold_;
  Scalar ssc_threshold_;
};

FeatureVector extract_features(const EmgFrame& frame, const FeatureExtractor& extractor);

}  // namespace dsqi
