#pragma once

#include "dsqi/classifiers.hpp"
#include "dsqi/frames.hpp"
#include "dsqi/types.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsqi {

enum class SchemeId { none, mv, plda, cbr, cs, bf, aw, ol, od, dcir, vocir };

/// Registered schemes in canonical order, `none` first.
const std::vector<SchemeId>& all_schemes();
std::string_view to_string(SchemeId id);
/// Throws ArgumentError for unregistered names.
SchemeId scheme_from_string(std::string_view name);

/// Post-processed output for one tick.
struct ProcessedDecision {
  std::int64_t frame_index = 0;
  ClassId decision = 1;
  bool rejected = false;
  std::optional<Scalar> effective_threshold;
  std::optional<ConfidenceVector> adjusted_confidence;
};

/// Hyperparameters for every scheme. Defaults are the published settings
/// for the generative (LDA) classifier.
struct SchemeConfig {
  SchemeId scheme = SchemeId::none;

  int history = 8;       // m: past decisions/confidences for MV, BF, VoCIR
  int lock_length = 6;   // m_OL: decisions averaged after an onset

  Scalar reject_threshold = 0.97;     // CBR
  Scalar aw_threshold = 0.97;         // AW
  Scalar threshold_min = 0.4;         // DCIR, VoCIR
  Scalar threshold_max = 0.989;       // DCIR, VoCIR
  Scalar tau = 30;                    // DCIR decay constant in frames
  Scalar beta = 4.0;                  // VoCIR sensitivity
  Scalar growth_base = 0.5;           // pLDA b
  Scalar max_prior = 0.97;            // pLDA P_max
  std::vector<Scalar> scale_factors;  // CS s_k; empty selects the NM-emphasis default
  Scalar nm_scale = 0.97;
  Scalar active_scale = 0.05;

  Scalar aw_min_length_ms = 160;
  Scalar aw_max_length_ms = 256;
  Scalar aw_step_ms = 16;

  static SchemeConfig defaults(SchemeId id);

  /// Resolved s_k for K classes.
  std::vector<Scalar> resolved_scale_factors(const ClassCatalog& catalog) const;
  void validate(const ClassCatalog& catalog) const;
};

// ---------------------------------------------------------------------------
// Scalar building blocks.

/// Bayesian-fusion offsets a_0..a_m; positive, decreasing, summing to 10.
template <typename T = Scalar>
std::vector<T> bf_weights(int m) {
  if (m < 0) throw ArgumentError("history length must be non-negative");
  const T len = static_cast<T>(m + 1);
  T denom = 0;
  for (int l = 1; l <= m + 1; ++l) denom += std::exp(T(-0.5) * static_cast<T>(l) / len);
  std::vector<T> a(static_cast<std::size_t>(m + 1));
  for (int n = 0; n <= m; ++n) a[static_cast<std::size_t>(n)] = T(10) * std::exp(T(-0.5) * static_cast<T>(n + 1) / len) / denom;
  return a;
}

/// Rejection threshold l frames after the most recent decision change.
Scalar dcir_threshold(std::int64_t frames_since_change, const SchemeConfig& cfg);

/// Onset threshold mean + 3 sigma (population) over No-Motion mean-MAV values.
Scalar ol_threshold(std::span<const Scalar> nm_mean_mav);

/// Mode of a chronologically ordered window; ties go to the class seen most recently.
ClassId window_mode(std::span<const ClassId> chronological);

// ---------------------------------------------------------------------------
// Stream processors. Each instance owns the state of exactly one stream.

class MajorityVote {
 public:
  explicit MajorityVote(int history);
  ProcessedDecision process(const DecisionPoint& point);
  void reset();

 private:
  int history_;
  std::vector<ClassId> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<int> counts_;
};

class PriorAdjustment {
 public:
  PriorAdjustment(const GaussianModel& model, Scalar growth_base, Scalar max_prior);
  ProcessedDecision process(const DecisionPoint& point, const FeatureVector& x);
  void reset();
  const VectorX& priors() const { return priors_; }
  int run_length() const { return run_length_; }

 private:
  const GaussianModel* model_;
  Scalar growth_base_;
  Scalar max_prior_;
  VectorX priors_;
  std::optional<ClassId> last_;
  int run_length_ = 0;
};

class ConfidenceRejection {
 public:
  ConfidenceRejection(Scalar threshold, ClassId nm_class) : threshold_(threshold), nm_(nm_class) {}
  ProcessedDecision process(const DecisionPoint& point) const;

 private:
  Scalar threshold_;
  ClassId nm_;
};

class ConfidenceScaling {
 public:
  explicit ConfidenceScaling(std::vector<Scalar> scale_factors);
  ProcessedDecision process(const DecisionPoint& point) const;

 private:
  std::vector<Scalar> scale_;
};

class BayesianFusion {
 public:
  explicit BayesianFusion(int history);
  ProcessedDecision process(const DecisionPoint& point);
  void reset();

 private:
  std::vector<Scalar> offsets_;
  std::vector<VectorX> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Per-frame-length classifiers for adaptive windowing, keyed by whole milliseconds.
struct ClassifierBank {
  std::map<int, GaussianModel> by_length_ms;
};

class AdaptiveWindow {
 public:
  AdaptiveWindow(const ClassifierBank& bank, const FeatureExtractor& extractor, const FrameGeometry& base,
                 const SchemeConfig& cfg, ClassId nm_class);
  /// `latest` holds the most recent samples, newest last.
  ProcessedDecision process(const Eigen::Ref<const MatrixX>& latest, std::int64_t frame_index);
  void reset() { length_ms_ = min_ms_; }
  int current_length_ms() const { return length_ms_; }
  int max_length_ms() const { return max_ms_; }

 private:
  const ClassifierBank* bank_;
  const FeatureExtractor* extractor_;
  FrameGeometry base_;
  Scalar threshold_;
  ClassId nm_;
  int min_ms_;
  int max_ms_;
  int step_ms_;
  int length_ms_;
};

class OnsetLocking {
 public:
  OnsetLocking(Scalar mav_threshold, int lock_length, ClassId nm_class);
  ProcessedDecision process(const DecisionPoint& point, Scalar mean_mav);
  void reset();
  bool locked() const { return locked_.has_value(); }

 private:
  Scalar mav_threshold_;
  int lock_length_;
  ClassId nm_;
  std::vector<ClassId> onset_decisions_;
  std::optional<ClassId> locked_;
};

class OutlierRejection {
 public:
  OutlierRejection(const OneClassModelSet& models, ClassId nm_class) : models_(&models), nm_(nm_class) {}
  ProcessedDecision process(const DecisionPoint& point, const FeatureVector& x) const;

 private:
  const OneClassModelSet* models_;
  ClassId nm_;
};

class DecisionChangeRejection {
 public:
  DecisionChangeRejection(const SchemeConfig& cfg, ClassId nm_class) : cfg_(cfg), nm_(nm_class) {}
  ProcessedDecision process(const DecisionPoint& point);
  void reset();
  std::int64_t frames_since_change() const { return since_change_; }

 private:
  SchemeConfig cfg_;
  ClassId nm_;
  std::optional<ClassId> previous_;
  std::int64_t since_change_ = 0;
};

class ConfidenceVarianceRejection {
 public:
  ConfidenceVarianceRejection(const SchemeConfig& cfg, ClassId nm_class);
  ProcessedDecision process(const DecisionPoint& point);
  void reset();

 private:
  SchemeConfig cfg_;
  ClassId nm_;
  std::vector<VectorX> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Population variance of each class confidence over a chronological window,
/// maximised over classes. Sums run oldest to newest.
Scalar max_confidence_variance(std::span<const VectorX> chronological);

// ---------------------------------------------------------------------------
// Uniform driver.

/// Per-frame payloads. Optional members are empty when unavailable.
struct StreamInput {
  std::vector<DecisionPoint> points;
  std::vector<FeatureVector> features;  // pLDA, OD
  std::vector<Scalar> mean_mav;         // OL
  const MatrixX* signal = nullptr;      // AW: raw samples the points were framed from
  FrameGeometry geometry;
};

/// Trained artefacts a scheme may need; pointers are non-owning.
struct SchemeResources {
  ClassCatalog catalog;
  const GaussianModel* model = nullptr;
  const OneClassModelSet* occ = nullptr;
  const ClassifierBank* bank = nullptr;
  const FeatureExtractor* extractor = nullptr;
  std::optional<Scalar> mav_threshold;
};

std::vector<ProcessedDecision> run_scheme(const SchemeConfig& cfg, const StreamInput& stream,
                                          const SchemeResources& resources);

}  // namespace dsqi
