#pragma once

#include "dsqi/classifiers.hpp"
#include "dsqi/frames.hpp"
#include "dsqi/schemes.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace dsqi {

/// Frames `signal`, extracts features and classifies each frame, filling every
/// payload a scheme can ask for. The returned input refers to `signal`, which
/// must outlive it.
StreamInput classify_signal(const MatrixX& signal, const FrameGeometry& geometry, const GaussianModel& model,
                            const FeatureExtractor& extractor);

/// Trains one classifier per adaptive-window frame length.
template <typename FeaturesAt>
ClassifierBank train_bank(const SchemeConfig& cfg, int num_classes, FeaturesAt&& features_at,
                          Scalar regularization = kDefaultRegularization) {
  ClassifierBank bank;
  for (Scalar len = cfg.aw_min_length_ms; len <= cfg.aw_max_length_ms + 1e-9; len += cfg.aw_step_ms)
    bank.by_length_ms.emplace(static_cast<int>(std::lround(len)),
                              train_gaussian(features_at(len), num_classes, regularization));
  return bank;
}

/// Mean-MAV columns of a feature matrix, located by `mav_` name prefix.
std::vector<Scalar> mean_mav_from_features(const LabeledFeatures& data, const std::vector<std::string>& names,
                                           ClassId only_class);

}  // namespace dsqi
