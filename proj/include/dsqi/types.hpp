#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsqi {

using Scalar = double;
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Class identifiers are 1-based, matching the labels written to disk.
using ClassId = int;

// Error hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class EmptyStreamError : public Error { using Error::Error; };
class TrainingError : public Error { using Error::Error; };
class EvaluationError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

inline constexpr Scalar kUnitSumTolerance = 1e-9;

/// Position of the maximum coefficient; ties go to the lowest index.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (v(k) > v(best)) best = k;
  return best;
}

/// K per-class confidences in [0,1] summing to one.
class ConfidenceVector {
 public:
  ConfidenceVector() = default;
  ConfidenceVector(VectorX values, std::int64_t frame_index = 0);

  /// Rescales non-negative weights to unit sum before validating.
  static ConfidenceVector normalized(const VectorX& weights, std::int64_t frame_index = 0);

  const VectorX& values() const { return values_; }
  Scalar operator[](ClassId k) const { return values_(k - 1); }
  int num_classes() const { return static_cast<int>(values_.size()); }
  std::int64_t frame_index() const { return frame_index_; }

  ClassId decision() const { return static_cast<ClassId>(argmax(values_)) + 1; }
  Scalar max_confidence() const { return values_.maxCoeff(); }

 private:
  VectorX values_;
  std::int64_t frame_index_ = 0;
};

/// Raw classifier output for one frame: decision and peak confidence derived
/// from the attached vector.
struct DecisionPoint {
  std::int64_t frame_index = 0;
  ClassId decision = 1;
  Scalar max_confidence = 0;
  ConfidenceVector confidence;

  static DecisionPoint from(const ConfidenceVector& c);
};

struct ClassCatalog {
  int num_classes = 7;
  ClassId nm_class = 1;

  void validate() const;
};

}  // namespace dsqi
