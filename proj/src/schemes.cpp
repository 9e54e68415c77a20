#include "dsqi/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dsqi {

namespace {

constexpr std::array<std::pair<SchemeId, std::string_view>, 11> kSchemeNames{{
    {SchemeId::none, "none"},
    {SchemeId::mv, "mv"},
    {SchemeId::plda, "plda"},
    {SchemeId::cbr, "cbr"},
    {SchemeId::cs, "cs"},
    {SchemeId::bf, "bf"},
    {SchemeId::aw, "aw"},
    {SchemeId::ol, "ol"},
    {SchemeId::od, "od"},
    {SchemeId::dcir, "dcir"},
    {SchemeId::vocir, "vocir"},
}};

ProcessedDecision pass_through(const DecisionPoint& point) {
  return ProcessedDecision{point.frame_index, point.decision, false, std::nullopt, std::nullopt};
}

ProcessedDecision reject_or_accept(const DecisionPoint& point, bool accept, ClassId nm, std::optional<Scalar> threshold) {
  ProcessedDecision out{point.frame_index, accept ? point.decision : nm, !accept, threshold, std::nullopt};
  return out;
}

void require_unit_interval(Scalar v, const char* name) {
  if (!(v >= 0 && v <= 1)) throw ConfigError(std::string(name) + " must lie in [0,1]");
}

}  // namespace

const std::vector<SchemeId>& all_schemes() {
  static const std::vector<SchemeId> ids = [] {
    std::vector<SchemeId> v;
    for (const auto& [id, name] : kSchemeNames) v.push_back(id);
    return v;
  }();
  return ids;
}

std::string_view to_string(SchemeId id) {
  for (const auto& [sid, name] : kSchemeNames)
    if (sid == id) return name;
  return "unknown";
}

SchemeId scheme_from_string(std::string_view name) {
  for (const auto& [id, n] : kSchemeNames)
    if (n == name) return id;
  throw ArgumentError("unknown scheme '" + std::string(name) + "'");
}

SchemeConfig SchemeConfig::defaults(SchemeId id) {
  SchemeConfig cfg;
  cfg.scheme = id;
  cfg.history = 8;
  cfg.lock_length = 6;
  return cfg;
}

std::vector<Scalar> SchemeConfig::resolved_scale_factors(const ClassCatalog& catalog) const {
  if (!scale_factors.empty()) return scale_factors;
  std::vector<Scalar> s(static_cast<std::size_t>(catalog.num_classes), active_scale);
  s[static_cast<std::size_t>(catalog.nm_class - 1)] = nm_scale;
  return s;
}

void SchemeConfig::validate(const ClassCatalog& catalog) const {
  catalog.validate();
  if (history < 0) throw ConfigError("history length must be non-negative");
  if (scheme == SchemeId::vocir && history < 1) throw ConfigError("VoCIR needs a history of at least one frame");
  if (lock_length < 1) throw ConfigError("lock length must be at least one");
  require_unit_interval(reject_threshold, "rejection threshold");
  require_unit_interval(aw_threshold, "adaptive-window threshold");
  require_unit_interval(threshold_min, "minimum threshold");
  require_unit_interval(threshold_max, "maximum threshold");
  if (threshold_min > threshold_max) throw ConfigError("minimum threshold exceeds maximum threshold");
  if (!(tau > 0)) throw ConfigError("tau must be positive");
  if (!(beta >= 0)) throw ConfigError("beta must be non-negative");
  if (!(growth_base > 0 && growth_base <= 1)) throw ConfigError("growth base must lie in (0,1]");
  if (!(max_prior > 0 && max_prior < 1)) throw ConfigError("maximum prior must lie in (0,1)");
  const auto s = resolved_scale_factors(catalog);
  if (s.size() != static_cast<std::size_t>(catalog.num_classes))
    throw ConfigError("scale factor count does not match class count");
  for (Scalar v : s)
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("scale factors must be positive");
  if (!(aw_step_ms > 0) || aw_min_length_ms > aw_max_length_ms || !(aw_min_length_ms > 0))
    throw ConfigError("invalid adaptive-window length range");
}

Scalar dcir_threshold(std::int64_t frames_since_change, const SchemeConfig& cfg) {
  if (frames_since_change < 0) throw ArgumentError("frames since change must be non-negative");
  return cfg.threshold_min +
         (cfg.threshold_max - cfg.threshold_min) * std::exp(-static_cast<Scalar>(frames_since_change) / cfg.tau);
}

Scalar ol_threshold(std::span<const Scalar> nm_mean_mav) {
  if (nm_mean_mav.empty()) throw TrainingError("no No-Motion frames to derive an onset threshold");
  const Scalar n = static_cast<Scalar>(nm_mean_mav.size());
  const Scalar mean = std::accumulate(nm_mean_mav.begin(), nm_mean_mav.end(), Scalar(0)) / n;
  Scalar ss = 0;
  for (Scalar v : nm_mean_mav) ss += (v - mean) * (v - mean);
  return mean + 3 * std::sqrt(ss / n);
}

ClassId window_mode(std::span<const ClassId> chronological) {
  if (chronological.empty()) throw ArgumentError("mode of an empty window");
  // Windows are short; a quadratic scan avoids sizing a histogram by K.
  ClassId best = chronological.back();
  int best_count = 0;
  for (auto it = chronological.rbegin(); it != chronological.rend(); ++it) {
    const int count = static_cast<int>(std::count(chronological.begin(), chronological.end(), *it));
    if (count > best_count) {
      best = *it;
      best_count = count;
    }
  }
  return best;
}

namespace {

// `at(i)` yields the i-th oldest confidence vector of a window of `size`.
template <typename At>
Scalar max_variance_impl(std::size_t size, At at) {
  if (size == 0) return 0;
  const Eigen::Index k_count = at(0).size();
  const Scalar n = static_cast<Scalar>(size);
  Scalar v = 0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    Scalar sum = 0;
    for (std::size_t i = 0; i < size; ++i) sum += at(i)(k);
    const Scalar mean = sum / n;
    Scalar ss = 0;
    for (std::size_t i = 0; i < size; ++i) {
      const Scalar d = at(i)(k) - mean;
      ss += d * d;
    }
    v = std::max(v, ss / n);
  }
  return v;
}

}  // namespace

Scalar max_confidence_variance(std::span<const VectorX> chronological) {
  return max_variance_impl(chronological.size(), [&](std::size_t i) -> const VectorX& { return chronological[i]; });
}

// --- MV ---------------------------------------------------------------------

MajorityVote::MajorityVote(int history) : history_(history) {
  if (history < 0) throw ConfigError("history length must be non-negative");
  ring_.assign(static_cast<std::size_t>(history) + 1, 0);
}

void MajorityVote::reset() {
  head_ = 0;
  size_ = 0;
  counts_.clear();
}

ProcessedDecision MajorityVote::process(const DecisionPoint& point) {
  const std::size_t cap = ring_.size();
  const auto grow = [&](ClassId k) {
    if (counts_.size() <= static_cast<std::size_t>(k)) counts_.resize(static_cast<std::size_t>(k) + 1, 0);
  };
  if (size_ == cap) {
    --counts_[static_cast<std::size_t>(ring_[head_])];
  } else {
    ++size_;
  }
  ring_[head_] = point.decision;
  grow(point.decision);
  ++counts_[static_cast<std::size_t>(point.decision)];
  head_ = (head_ + 1) % cap;

  const int best = *std::max_element(counts_.begin(), counts_.end());
  // Newest-first scan picks the most recent among tied classes.
  ClassId winner = point.decision;
  for (std::size_t i = 1; i <= size_; ++i) {
    const ClassId k = ring_[(head_ + cap - i) % cap];
    if (counts_[static_cast<std::size_t>(k)] == best) {
      winner = k;
      break;
    }
  }
  return ProcessedDecision{point.frame_index, winner, false, std::nullopt, std::nullopt};
}

// --- pLDA -------------------------------------------------------------------

PriorAdjustment::PriorAdjustment(const GaussianModel& model, Scalar growth_base, Scalar max_prior)
    : model_(&model), growth_base_(growth_base), max_prior_(max_prior) {
  reset();
}

void PriorAdjustment::reset() {
  const int k = model_->num_classes();
  priors_ = VectorX::Constant(k, 1.0 / k);
  last_.reset();
  run_length_ = 0;
}

ProcessedDecision PriorAdjustment::process(const DecisionPoint& point, const FeatureVector& x) {
  ConfidenceVector c = posterior_with_priors(*model_, x.values, priors_, point.frame_index);
  const ClassId y = c.decision();

  if (!last_ || *last_ != y) {
    const int k = model_->num_classes();
    priors_ = VectorX::Constant(k, 1.0 / k);
    run_length_ = 0;
  }
  last_ = y;
  ++run_length_;
  const Scalar raised = priors_(y - 1) + std::pow(growth_base_, static_cast<Scalar>(run_length_));
  if (raised < max_prior_) priors_(y - 1) = raised;

  return ProcessedDecision{point.frame_index, y, false, std::nullopt, std::move(c)};
}

// --- CBR / CS ---------------------------------------------------------------

ProcessedDecision ConfidenceRejection::process(const DecisionPoint& point) const {
  return reject_or_accept(point, point.max_confidence > threshold_, nm_, threshold_);
}

ConfidenceScaling::ConfidenceScaling(std::vector<Scalar> scale_factors) : scale_(std::move(scale_factors)) {
  for (Scalar s : scale_)
    if (!(s > 0)) throw ConfigError("scale factors must be positive");
}

ProcessedDecision ConfidenceScaling::process(const DecisionPoint& point) const {
  const VectorX& c = point.confidence.values();
  if (static_cast<std::size_t>(c.size()) != scale_.size())
    throw ConfigError("scale factor count does not match class count");
  VectorX w(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) w(k) = c(k) * scale_[static_cast<std::size_t>(k)];
  ConfidenceVector scaled = ConfidenceVector::normalized(w, point.frame_index);
  const ClassId y = scaled.decision();
  return ProcessedDecision{point.frame_index, y, false, std::nullopt, std::move(scaled)};
}

// --- BF ---------------------------------------------------------------------

BayesianFusion::BayesianFusion(int history) : offsets_(bf_weights(history)) {
  ring_.resize(static_cast<std::size_t>(history) + 1);
}

void BayesianFusion::reset() {
  head_ = 0;
  size_ = 0;
}

ProcessedDecision BayesianFusion::process(const DecisionPoint& point) {
  const std::size_t cap = ring_.size();
  ring_[head_] = point.confidence.values();
  head_ = (head_ + 1) % cap;
  size_ = std::min(size_ + 1, cap);

  const Eigen::Index k_count = point.confidence.values().size();
  VectorX fused = VectorX::Ones(k_count);
  for (std::size_t n = 0; n < size_; ++n) {
    const VectorX& c = ring_[(head_ + cap - 1 - n) % cap];
    if (c.size() != k_count) throw ArgumentError("class count changed mid-stream");
    for (Eigen::Index k = 0; k < k_count; ++k) fused(k) *= c(k) + offsets_[n];
  }
  ConfidenceVector out = ConfidenceVector::normalized(fused, point.frame_index);
  const ClassId y = out.decision();
  return ProcessedDecision{point.frame_index, y, false, std::nullopt, std::move(out)};
}

// --- AW ---------------------------------------------------------------------

AdaptiveWindow::AdaptiveWindow(const ClassifierBank& bank, const FeatureExtractor& extractor,
                               const FrameGeometry& base, const SchemeConfig& cfg, ClassId nm_class)
    : bank_(&bank),
      extractor_(&extractor),
      base_(base),
      threshold_(cfg.aw_threshold),
      nm_(nm_class),
      min_ms_(static_cast<int>(std::lround(cfg.aw_min_length_ms))),
      max_ms_(static_cast<int>(std::lround(cfg.aw_max_length_ms))),
      step_ms_(static_cast<int>(std::lround(cfg.aw_step_ms))),
      length_ms_(min_ms_) {
  for (int len = min_ms_; len <= max_ms_; len += step_ms_) {
    if (!bank.by_length_ms.count(len))
      throw ConfigError("adaptive windowing has no classifier for a " + std::to_string(len) + " ms frame");
    base_.samples_for(len);
  }
}

ProcessedDecision AdaptiveWindow::process(const Eigen::Ref<const MatrixX>& latest, std::int64_t frame_index) {
  // Near the start of a recording the requested frame may not be available
  // yet; fall back to the longest candidate that fits.
  int usable = length_ms_;
  while (usable > min_ms_ && base_.samples_for(usable) > latest.rows()) usable -= step_ms_;
  const Eigen::Index rows = base_.samples_for(usable);
  if (rows > latest.rows()) throw EmptyStreamError("not enough samples for the minimum adaptive frame");

  const GaussianModel& model = bank_->by_length_ms.at(usable);
  const VectorX x = extractor_->extract(latest.bottomRows(rows));
  ConfidenceVector c = posterior(model, x, frame_index);

  ProcessedDecision out{frame_index, nm_, true, threshold_, std::nullopt};
  if (c.max_confidence() >= threshold_) {
    out.decision = c.decision();
    out.rejected = false;
    length_ms_ = min_ms_;
  } else if (length_ms_ < max_ms_) {
    length_ms_ = std::min(length_ms_ + step_ms_, max_ms_);
  }
  out.adjusted_confidence = std::move(c);
  return out;
}

// --- OL ---------------------------------------------------------------------

OnsetLocking::OnsetLocking(Scalar mav_threshold, int lock_length, ClassId nm_class)
    : mav_threshold_(mav_threshold), lock_length_(lock_length), nm_(nm_class) {
  if (lock_length < 1) throw ConfigError("lock length must be at least one");
}

void OnsetLocking::reset() {
  onset_decisions_.clear();
  locked_.reset();
}

ProcessedDecision OnsetLocking::process(const DecisionPoint& point, Scalar mean_mav) {
  if (mean_mav < mav_threshold_) {
    reset();
    return ProcessedDecision{point.frame_index, nm_, true, std::nullopt, std::nullopt};
  }
  if (locked_) return ProcessedDecision{point.frame_index, *locked_, false, std::nullopt, std::nullopt};

  onset_decisions_.push_back(point.decision);
  if (static_cast<int>(onset_decisions_.size()) == lock_length_) locked_ = window_mode(onset_decisions_);
  return pass_through(point);
}

// --- OD ---------------------------------------------------------------------

ProcessedDecision OutlierRejection::process(const DecisionPoint& point, const FeatureVector& x) const {
  return reject_or_accept(point, occ_check(*models_, x.values) == OccVerdict::inlier, nm_, std::nullopt);
}

// --- DCIR -------------------------------------------------------------------

void DecisionChangeRejection::reset() {
  previous_.reset();
  since_change_ = 0;
}

ProcessedDecision DecisionChangeRejection::process(const DecisionPoint& point) {
  if (!previous_ || *previous_ != point.decision) {
    since_change_ = 0;
  } else {
    ++since_change_;
  }
  previous_ = point.decision;
  const Scalar th = dcir_threshold(since_change_, cfg_);
  return reject_or_accept(point, point.max_confidence >= th, nm_, th);
}

// --- VoCIR ------------------------------------------------------------------

ConfidenceVarianceRejection::ConfidenceVarianceRejection(const SchemeConfig& cfg, ClassId nm_class)
    : cfg_(cfg), nm_(nm_class) {
  if (cfg.history < 1) throw ConfigError("VoCIR needs a history of at least one frame");
  ring_.resize(static_cast<std::size_t>(cfg.history) + 1);
}

void ConfidenceVarianceRejection::reset() {
  head_ = 0;
  size_ = 0;
}

ProcessedDecision ConfidenceVarianceRejection::process(const DecisionPoint& point) {
  const std::size_t cap = ring_.size();
  ring_[head_] = point.confidence.values();
  head_ = (head_ + 1) % cap;
  size_ = std::min(size_ + 1, cap);

  const std::size_t start = (head_ + cap - size_) % cap;
  const Scalar v =
      max_variance_impl(size_, [&](std::size_t i) -> const VectorX& { return ring_[(start + i) % cap]; });
  const Scalar th = std::min(cfg_.threshold_max, cfg_.threshold_min + cfg_.beta * v);
  return reject_or_accept(point, point.max_confidence >= th, nm_, th);
}

// --- driver -----------------------------------------------------------------

namespace {

void require(bool ok, SchemeId id, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "scheme '" << to_string(id) << "' requires " << what;
    throw ConfigError(msg.str());
  }
}

}  // namespace

std::vector<ProcessedDecision> run_scheme(const SchemeConfig& cfg, const StreamInput& stream,
                                          const SchemeResources& res) {
  cfg.validate(res.catalog);
  const auto& points = stream.points;
  const std::size_t n = points.size();
  const ClassId nm = res.catalog.nm_class;
  std::vector<ProcessedDecision> out;
  out.reserve(n);

  const auto need_features = [&] {
    require(stream.features.size() == n, cfg.scheme, "one feature vector per frame");
  };

  switch (cfg.scheme) {
    case SchemeId::none:
      for (const auto& p : points) out.push_back(pass_through(p));
      break;
    case SchemeId::mv: {
      MajorityVote mv(cfg.history);
      for (const auto& p : points) out.push_back(mv.process(p));
      break;
    }
    case SchemeId::plda: {
      require(res.model != nullptr, cfg.scheme, "a generative (Gaussian) classifier");
      need_features();
      PriorAdjustment plda(*res.model, cfg.growth_base, cfg.max_prior);
      for (std::size_t i = 0; i < n; ++i) out.push_back(plda.process(points[i], stream.features[i]));
      break;
    }
    case SchemeId::cbr: {
      const ConfidenceRejection cbr(cfg.reject_threshold, nm);
      for (const auto& p : points) out.push_back(cbr.process(p));
      break;
    }
    case SchemeId::cs: {
      const ConfidenceScaling cs(cfg.resolved_scale_factors(res.catalog));
      for (const auto& p : points) out.push_back(cs.process(p));
      break;
    }
    case SchemeId::bf: {
      BayesianFusion bf(cfg.history);
      for (const auto& p : points) out.push_back(bf.process(p));
      break;
    }
    case SchemeId::aw: {
      require(res.bank != nullptr && res.extractor != nullptr, cfg.scheme, "a classifier bank and feature extractor");
      require(stream.signal != nullptr, cfg.scheme, "the raw signal");
      const Eigen::Index m = stream.geometry.frame_samples();
      const Eigen::Index stride = stream.geometry.stride_samples();
      require(stream.geometry.frame_count(stream.signal->rows()) == static_cast<std::int64_t>(n), cfg.scheme,
              "one decision per frame of the raw signal");
      AdaptiveWindow aw(*res.bank, *res.extractor, stream.geometry, cfg, nm);
      const Eigen::Index max_rows = stream.geometry.samples_for(cfg.aw_max_length_ms);
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index end = static_cast<Eigen::Index>(i) * stride + m;
        const Eigen::Index begin = std::max<Eigen::Index>(0, end - max_rows);
        out.push_back(aw.process(stream.signal->middleRows(begin, end - begin), points[i].frame_index));
      }
      break;
    }
    case SchemeId::ol: {
      require(res.mav_threshold.has_value(), cfg.scheme, "an onset threshold");
      require(stream.mean_mav.size() == n, cfg.scheme, "one mean-MAV value per frame");
      OnsetLocking ol(*res.mav_threshold, cfg.lock_length, nm);
      for (std::size_t i = 0; i < n; ++i) out.push_back(ol.process(points[i], stream.mean_mav[i]));
      break;
    }
    case SchemeId::od: {
      require(res.occ != nullptr && !res.occ->empty(), cfg.scheme, "trained one-class models");
      need_features();
      const OutlierRejection od(*res.occ, nm);
      for (std::size_t i = 0; i < n; ++i) out.push_back(od.process(points[i], stream.features[i]));
      break;
    }
    case SchemeId::dcir: {
      DecisionChangeRejection dcir(cfg, nm);
      for (const auto& p : points) out.push_back(dcir.process(p));
      break;
    }
    case SchemeId::vocir: {
      ConfidenceVarianceRejection vocir(cfg, nm);
      for (const auto& p : points) out.push_back(vocir.process(p));
      break;
    }
  }
  return out;
}

}  // namespace dsqi
