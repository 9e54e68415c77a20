#include "dsqi/pipeline.hpp"

namespace dsqi {

StreamInput classify_signal(const MatrixX& signal, const FrameGeometry& geometry, const GaussianModel& model,
                            const FeatureExtractor& extractor) {
  const Eigen::Index m = geometry.frame_samples();
  const Eigen::Index stride = geometry.stride_samples();
  if (signal.rows() < m) throw EmptyStreamError("signal shorter than one frame");
  if (!signal.allFinite()) throw ArgumentError("signal contains non-finite samples");
  const std::int64_t count = geometry.frame_count(signal.rows());

  StreamInput in;
  in.signal = &signal;
  in.geometry = geometry;
  in.points.reserve(static_cast<std::size_t>(count));
  in.features.reserve(static_cast<std::size_t>(count));
  in.mean_mav.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const auto block = signal.middleRows(static_cast<Eigen::Index>(i) * stride, m);
    FeatureVector x{extractor.extract(block), i};
    in.points.push_back(DecisionPoint::from(posterior(model, x)));
    in.features.push_back(std::move(x));
    in.mean_mav.push_back(mav(block).mean);
  }
  return in;
}

std::vector<Scalar> mean_mav_from_features(const LabeledFeatures& data, const std::vector<std::string>& names,
                                           ClassId only_class) {
  std::vector<Eigen::Index> cols;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i].rfind("mav_", 0) == 0) cols.push_back(static_cast<Eigen::Index>(i));
  if (cols.empty()) throw TrainingError("feature file has no mav_* columns for the onset threshold");
  std::vector<Scalar> out;
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    if (data.labels[static_cast<std::size_t>(r)] != only_class) continue;
    Scalar sum = 0;
    for (Eigen::Index c : cols) sum += data.features(r, c);
    out.push_back(sum / static_cast<Scalar>(cols.size()));
  }
  return out;
}

}  // namespace dsqi
