#pragma once

#include "dsqi/frames.hpp"
#include "dsqi/types.hpp"

#include <vector>

namespace dsqi {

/// Row-major training set: one feature vector per row, one label per row.
struct LabeledFeatures {
  MatrixX features;
  std::vector<ClassId> labels;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dimension() const { return features.cols(); }
};

inline constexpr Scalar kDefaultRegularization = 1e-6;
inline constexpr Scalar kDefaultOccQuantile = 0.99;

/// Shared-covariance Gaussian discriminant. Priors are stored as given and
/// renormalized when posteriors are formed.
class GaussianModel {
 public:
  GaussianModel() = default;
  GaussianModel(MatrixX means, MatrixX covariance, VectorX priors);

  int num_classes() const { return static_cast<int>(means_.cols()); }
  Eigen::Index dimension() const { return means_.rows(); }

  /// d x K, one class mean per column.
  const MatrixX& means() const { return means_; }
  const MatrixX& covariance() const { return covariance_; }
  const VectorX& priors() const { return priors_; }
  VectorX normalized_priors() const { return priors_ / priors_.sum(); }

  /// Class log-likelihoods up to a shared additive constant.
  VectorX log_likelihoods(const Eigen::Ref<const VectorX>& x) const;

 private:
  MatrixX means_;
  MatrixX covariance_;
  VectorX priors_;
  MatrixX weights_;  // Sigma^-1 mu_k per column
  VectorX bias_;     // -1/2 mu_k^T Sigma^-1 mu_k
};

GaussianModel train_gaussian(const LabeledFeatures& data, int num_classes,
                             Scalar regularization = kDefaultRegularization);

/// Softmax of log-likelihood plus log-prior, max-subtracted.
ConfidenceVector posterior(const GaussianModel& model, const Eigen::Ref<const VectorX>& x,
                           std::int64_t frame_index = 0);
ConfidenceVector posterior_with_priors(const GaussianModel& model, const Eigen::Ref<const VectorX>& x,
                                       const Eigen::Ref<const VectorX>& priors, std::int64_t frame_index = 0);
inline ConfidenceVector posterior(const GaussianModel& model, const FeatureVector& x) {
  return posterior(model, x.values, x.frame_index);
}

GaussianModel set_priors(const GaussianModel& model, const VectorX& priors);

/// Per-class Mahalanobis acceptance region g_k.
class OneClassModel {
 public:
  OneClassModel() = default;
  OneClassModel(VectorX mean, MatrixX covariance, Scalar threshold);

  const VectorX& mean() const { return mean_; }
  const MatrixX& covariance() const { return covariance_; }
  /// Squared Mahalanobis units.
  Scalar threshold() const { return threshold_; }

  Scalar distance_squared(const Eigen::Ref<const VectorX>& x) const;
  bool accepts(const Eigen::Ref<const VectorX>& x) const { return distance_squared(x) <= threshold_; }

 private:
  VectorX mean_;
  MatrixX covariance_;
  MatrixX cholesky_lower_;
  Scalar threshold_ = 0;
};

using OneClassModelSet = std::vector<OneClassModel>;

OneClassModelSet train_occ(const LabeledFeatures& data, int num_classes, Scalar quantile = kDefaultOccQuantile,
                           Scalar regularization = kDefaultRegularization);

enum class OccVerdict { inlier, outlier };

OccVerdict occ_check(const OneClassModelSet& models, const Eigen::Ref<const VectorX>& x);

}  // namespace dsqi
