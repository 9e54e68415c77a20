#include "dsqi/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dsqi {

ConfidenceVector::ConfidenceVector(VectorX values, std::int64_t frame_index)
    : values_(std::move(values)), frame_index_(frame_index) {
  if (values_.size() < 2) throw ArgumentError("confidence vector needs at least two classes");
  Scalar sum = 0;
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    const Scalar c = values_(k);
    if (!std::isfinite(c) || c < 0 || c > 1) {
      std::ostringstream msg;
      msg << "confidence " << c << " for class " << (k + 1) << " outside [0,1] at frame " << frame_index;
      throw ArgumentError(msg.str());
    }
    sum += c;
  }
  if (std::abs(sum - 1) > kUnitSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "confidences sum to " << sum << " at frame " << frame_index;
    throw ArgumentError(msg.str());
  }
}

ConfidenceVector ConfidenceVector::normalized(const VectorX& weights, std::int64_t frame_index) {
  // Sequential sum and element-wise division keep results reproducible
  // across reduction orders.
  Scalar total = 0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    if (!(weights(k) >= 0)) throw ArgumentError("cannot normalize negative confidence weights");
    total += weights(k);
  }
  if (!(total > 0) || !std::isfinite(total)) throw ArgumentError("cannot normalize confidence weights");
  VectorX v(weights.size());
  for (Eigen::Index k = 0; k < weights.size(); ++k) v(k) = std::min<Scalar>(weights(k) / total, 1);
  return ConfidenceVector(std::move(v), frame_index);
}

DecisionPoint DecisionPoint::from(const ConfidenceVector& c) {
  return DecisionPoint{c.frame_index(), c.decision(), c.max_confidence(), c};
}

void ClassCatalog::validate() const {
  if (num_classes < 2) throw ConfigError("need at least two classes");
  if (nm_class < 1 || nm_class > num_classes) throw ConfigError("nm_class outside 1..K");
}

}  // namespace dsqi
