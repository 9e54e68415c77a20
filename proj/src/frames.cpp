#include "dsqi/frames.hpp"

#include <cmath>
#include <sstream>

namespace dsqi {

namespace {

Eigen::Index exact_samples(Scalar duration_ms, Scalar sample_rate_hz, const char* what) {
  const Scalar exact = duration_ms * sample_rate_hz / 1000.0;
  const Scalar rounded = std::round(exact);
  if (!(duration_ms > 0) || !(sample_rate_hz > 0) || std::abs(exact - rounded) > 1e-9 * std::max<Scalar>(1, exact)) {
    std::ostringstream msg;
    msg << what << " of " << duration_ms << " ms at " << sample_rate_hz
        << " Hz is not a positive whole number of samples";
    throw ConfigError(msg.str());
  }
  return static_cast<Eigen::Index>(rounded);
}

}  // namespace

Eigen::Index FrameGeometry::frame_samples() const {
  return exact_samples(frame_length_ms, sample_rate_hz, "frame length");
}

Eigen::Index FrameGeometry::stride_samples() const {
  return exact_samples(increment_ms, sample_rate_hz, "frame increment");
}

Eigen::Index FrameGeometry::samples_for(Scalar duration_ms) const {
  return exact_samples(duration_ms, sample_rate_hz, "duration");
}

std::int64_t FrameGeometry::frame_count(Eigen::Index num_samples) const {
  const Eigen::Index m = frame_samples();
  const Eigen::Index stride = stride_samples();
  if (num_samples < m) return 0;
  return (num_samples - m) / stride + 1;
}

std::vector<EmgFrame> make_frames(const MatrixX& signal, const FrameGeometry& geometry) {
  const Eigen::Index m = geometry.frame_samples();
  const Eigen::Index stride = geometry.stride_samples();
  if (signal.cols() < 1) throw ConfigError("signal has no channels");
  if (signal.rows() < m) throw EmptyStreamError("signal shorter than one frame");
  if (!signal.allFinite()) throw ArgumentError("signal contains non-finite samples");

  const std::int64_t count = geometry.frame_count(signal.rows());
  std::vector<EmgFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const Eigen::Index start = static_cast<Eigen::Index>(i) * stride;
    frames.push_back(EmgFrame{signal.middleRows(start, m), i, static_cast<Scalar>(i) * geometry.increment_ms});
  }
  return frames;
}

VectorX TimeDomainExtractor::extract(const Eigen::Ref<const MatrixX>& samples) const {
  const Eigen::Index rows = samples.rows();
  const Eigen::Index channels = samples.cols();
  if (rows < 1 || channels < 1) throw EvaluationError("feature extraction on an empty frame");
  VectorX out(dimension(channels));
  for (Eigen::Index ch = 0; ch < channels; ++ch) {
    const auto x = samples.col(ch);
    Scalar abs_sum = 0;
    Scalar wl = 0;
    Scalar zc = 0;
    Scalar ssc = 0;
    for (Eigen::Index n = 0; n < rows; ++n) {
      abs_sum += std::abs(x(n));
      if (n > 0) {
        const Scalar diff = x(n) - x(n - 1);
        wl += std::abs(diff);
        if (x(n) * x(n - 1) < 0 && std::abs(diff) >= zc_threshold_) zc += 1;
      }
      if (n > 0 && n + 1 < rows) {
        const Scalar left = x(n) - x(n - 1);
        const Scalar right = x(n) - x(n + 1);
        if (left * right > 0 && (std::abs(left) >= ssc_threshold_ || std::abs(right) >= ssc_threshold_)) ssc += 1;
      }
    }
    out(ch) = abs_sum / static_cast<Scalar>(rows);
    out(channels + ch) = wl;
    out(2 * channels + ch) = zc;
    out(3 * channels + ch) = ssc;
  }
  return out;
}

std::vector<std::string> TimeDomainExtractor::feature_names(Eigen::Index num_channels) const {
  std::vector<std::string> names;
  for (const char* base : {"mav", "wl", "zc", "ssc"})
    for (Eigen::Index ch = 0; ch < num_channels; ++ch) names.push_back(std::string(base) + "_" + std::to_string(ch + 1));
  return names;
}

FeatureVector extract_features(const EmgFrame& frame, const FeatureExtractor& extractor) {
  VectorX values;
  try {
    values = extractor.extract(frame.samples);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("feature extraction failed: ") + e.what());
  }
  if (values.size() != extractor.dimension(frame.samples.cols()))
    throw EvaluationError("feature extractor returned the wrong dimensionality");
  if (!values.allFinite()) throw EvaluationError("feature extractor produced non-finite values");
  return FeatureVector{std::move(values), frame.frame_index};
}

}  // namespace dsqi
