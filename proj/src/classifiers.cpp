#include "dsqi/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dsqi {

namespace {

void check_labels(const LabeledFeatures& data, int num_classes) {
  if (num_classes < 2) throw TrainingError("training needs at least two classes");
  if (data.labels.size() != static_cast<std::size_t>(data.features.rows()))
    throw TrainingError("label count does not match feature rows");
  if (data.features.cols() < 1) throw TrainingError("training features have no columns");
  if (!data.features.allFinite()) throw TrainingError("training features contain non-finite values");
  for (ClassId y : data.labels)
    if (y < 1 || y > num_classes) throw TrainingError("label " + std::to_string(y) + " outside 1..K");
}

std::vector<std::vector<Eigen::Index>> rows_by_class(const LabeledFeatures& data, int num_classes) {
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(num_classes));
  for (Eigen::Index r = 0; r < data.size(); ++r) rows[static_cast<std::size_t>(data.labels[r] - 1)].push_back(r);
  for (int k = 0; k < num_classes; ++k) {
    const auto n = rows[static_cast<std::size_t>(k)].size();
    if (n == 0) throw TrainingError("no training samples for class " + std::to_string(k + 1));
    if (n < 2) throw TrainingError("class " + std::to_string(k + 1) + " has fewer than two training samples");
  }
  return rows;
}

VectorX class_mean(const MatrixX& x, const std::vector<Eigen::Index>& rows) {
  VectorX mu = VectorX::Zero(x.cols());
  for (Eigen::Index r : rows) mu += x.row(r).transpose();
  return mu / static_cast<Scalar>(rows.size());
}

// Scatter matrix sum (x - mu)(x - mu)^T over the given rows.
MatrixX scatter(const MatrixX& x, const std::vector<Eigen::Index>& rows, const VectorX& mu) {
  MatrixX centered(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) centered.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]) - mu.transpose();
  return centered.transpose() * centered;
}

MatrixX regularize(MatrixX cov, Scalar regularization) {
  const Scalar d = static_cast<Scalar>(cov.rows());
  const Scalar ridge = regularization * cov.trace() / d;
  cov.diagonal().array() += ridge;
  // Symmetrize away rounding asymmetry from the products above.
  return (0.5 * (cov + cov.transpose())).eval();
}

Eigen::LLT<MatrixX> factor_or_throw(const MatrixX& cov, const std::string& what) {
  Eigen::LLT<MatrixX> llt(cov);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0).all())
    throw TrainingError(what + " covariance is singular after regularization");
  return llt;
}

}  // namespace

GaussianModel::GaussianModel(MatrixX means, MatrixX covariance, VectorX priors)
    : means_(std::move(means)), covariance_(std::move(covariance)), priors_(std::move(priors)) {
  if (covariance_.rows() != means_.rows() || covariance_.cols() != means_.rows())
    throw ArgumentError("covariance shape does not match feature dimension");
  if (priors_.size() != means_.cols()) throw ArgumentError("prior count does not match class count");
  if (!(priors_.array() > 0).all()) throw ArgumentError("priors must be positive");
  const auto llt = factor_or_throw(covariance_, "shared");
  weights_ = llt.solve(means_);
  bias_ = -0.5 * (means_.cwiseProduct(weights_)).colwise().sum().transpose();
}

VectorX GaussianModel::log_likelihoods(const Eigen::Ref<const VectorX>& x) const {
  if (x.size() != dimension()) throw EvaluationError("feature dimension does not match model");
  if (!x.allFinite()) throw EvaluationError("non-finite feature vector");
  return weights_.transpose() * x + bias_;
}

GaussianModel train_gaussian(const LabeledFeatures& data, int num_classes, Scalar regularization) {
  if (!(regularization >= 0)) throw TrainingError("regularization must be non-negative");
  check_labels(data, num_classes);
  const auto rows = rows_by_class(data, num_classes);

  const Eigen::Index d = data.dimension();
  MatrixX means(d, num_classes);
  MatrixX pooled = MatrixX::Zero(d, d);
  for (int k = 0; k < num_classes; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    means.col(k) = class_mean(data.features, r);
    pooled += scatter(data.features, r, means.col(k));
  }
  const Scalar dof = static_cast<Scalar>(data.size() - num_classes);
  pooled /= std::max<Scalar>(dof, 1);
  MatrixX cov = regularize(std::move(pooled), regularization);
  factor_or_throw(cov, "pooled");
  return GaussianModel(std::move(means), std::move(cov), VectorX::Constant(num_classes, 1.0 / num_classes));
}

ConfidenceVector posterior_with_priors(const GaussianModel& model, const Eigen::Ref<const VectorX>& x,
                                       const Eigen::Ref<const VectorX>& priors, std::int64_t frame_index) {
  if (priors.size() != model.num_classes()) throw EvaluationError("prior count does not match model");
  VectorX score = model.log_likelihoods(x) + (priors / priors.sum()).array().log().matrix();
  score.array() -= score.maxCoeff();
  VectorX weights = score.array().exp();
  return ConfidenceVector::normalized(weights, frame_index);
}

ConfidenceVector posterior(const GaussianModel& model, const Eigen::Ref<const VectorX>& x,
                           std::int64_t frame_index) {
  return posterior_with_priors(model, x, model.priors(), frame_index);
}

GaussianModel set_priors(const GaussianModel& model, const VectorX& priors) {
  if (priors.size() != model.num_classes()) throw ArgumentError("prior count does not match model");
  for (Eigen::Index k = 0; k < priors.size(); ++k)
    if (!(priors(k) > 0 && priors(k) <= 1))
      throw ArgumentError("prior for class " + std::to_string(k + 1) + " outside (0,1]");
  return GaussianModel(model.means(), model.covariance(), priors);
}

OneClassModel::OneClassModel(VectorX mean, MatrixX covariance, Scalar threshold)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), threshold_(threshold) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size())
    throw ArgumentError("covariance shape does not match mean");
  if (!(threshold_ > 0)) throw ArgumentError("one-class threshold must be positive");
  cholesky_lower_ = factor_or_throw(covariance_, "one-class").matrixL();
}

Scalar OneClassModel::distance_squared(const Eigen::Ref<const VectorX>& x) const {
  if (x.size() != mean_.size()) throw EvaluationError("feature dimension does not match one-class model");
  const VectorX z = cholesky_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return z.squaredNorm();
}

OneClassModelSet train_occ(const LabeledFeatures& data, int num_classes, Scalar quantile, Scalar regularization) {
  if (!(quantile > 0 && quantile <= 1)) throw TrainingError("one-class quantile must lie in (0,1]");
  check_labels(data, num_classes);
  const auto rows = rows_by_class(data, num_classes);

  OneClassModelSet models;
  models.reserve(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    VectorX mu = class_mean(data.features, r);
    MatrixX cov = scatter(data.features, r, mu) / static_cast<Scalar>(r.size() - 1);
    cov = regularize(std::move(cov), regularization);
    const Eigen::LLT<MatrixX> llt = factor_or_throw(cov, "class " + std::to_string(k + 1));
    const MatrixX lower = llt.matrixL();

    std::vector<Scalar> distances;
    distances.reserve(r.size());
    for (Eigen::Index row : r) {
      const VectorX z = lower.triangularView<Eigen::Lower>().solve((data.features.row(row).transpose() - mu).eval());
      distances.push_back(z.squaredNorm());
    }
    std::sort(distances.begin(), distances.end());
    // Lower empirical quantile: the ceil(q n)-th order statistic.
    const auto n = distances.size();
    auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<Scalar>(n) - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, n);
    const Scalar threshold = distances[rank - 1];
    if (!(threshold > 0)) throw TrainingError("degenerate one-class threshold for class " + std::to_string(k + 1));
    models.emplace_back(std::move(mu), std::move(cov), threshold);
  }
  return models;
}

OccVerdict occ_check(const OneClassModelSet& models, const Eigen::Ref<const VectorX>& x) {
  for (const auto& m : models)
    if (m.accepts(x)) return OccVerdict::inlier;
  return OccVerdict::outlier;
}

}  // namespace dsqi
