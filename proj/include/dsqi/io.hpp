#pragma once

#include "dsqi/classifiers.hpp"
#include "dsqi/metrics.hpp"
#include "dsqi/schemes.hpp"
#include "dsqi/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dsqi::io {

/// Real values are written with nine significant digits.
std::string format_real(Scalar v);

// --- decision streams ------------------------------------------------------
// frame,ts_ms,true_class,y_hat,c_1,...,c_K

struct StreamRow {
  std::int64_t frame = 0;
  Scalar ts_ms = 0;
  ClassId true_class = 0;
  DecisionPoint point;
};

void write_stream(std::ostream& os, std::span<const StreamRow> rows);
/// Confidences are renormalised on read since nine digits do not preserve the unit sum.
std::vector<StreamRow> read_stream(std::istream& is, const std::string& source = "stream");

std::vector<StreamRow> make_stream_rows(std::span<const DecisionPoint> points, const GroundTruthTimeline* timeline,
                                        Scalar increment_ms);

// --- processed streams -----------------------------------------------------
// stream columns followed by y_tilde,rejected,threshold

void write_processed(std::ostream& os, std::span<const StreamRow> input, std::span<const ProcessedDecision> out);

struct ProcessedRow {
  std::int64_t frame = 0;
  ClassId y_hat = 0;
  ClassId y_tilde = 0;
  bool rejected = false;
  std::optional<Scalar> threshold;
  Scalar confidence = 0;  // max input confidence, used for plotting
};
std::vector<ProcessedRow> read_processed(std::istream& is, const std::string& source = "processed");

// --- timelines -------------------------------------------------------------
// kind,start_frame,end_frame,class,from_class,to_class

void write_timeline(std::ostream& os, const GroundTruthTimeline& timeline);
GroundTruthTimeline read_timeline(std::istream& is, const std::string& source = "timeline");

// --- raw signals and per-frame scalars -------------------------------------

void write_signal(std::ostream& os, const MatrixX& signal);
MatrixX read_signal(std::istream& is, const std::string& source = "signal");

void write_frame_values(std::ostream& os, const std::string& column, std::span<const Scalar> values);
std::vector<Scalar> read_frame_values(std::istream& is, const std::string& source = "values");

// --- labelled training features --------------------------------------------
// label,<feature names>

void write_features(std::ostream& os, const LabeledFeatures& data, const std::vector<std::string>& names);
LabeledFeatures read_features(std::istream& is, std::vector<std::string>* names = nullptr,
                              const std::string& source = "features");

// --- metrics ---------------------------------------------------------------

struct MetricsRow {
  std::string scheme;
  MetricsReport report;
};
void write_metrics(std::ostream& os, std::span<const MetricsRow> rows);

/// Decision-stream plot: one marker per frame coloured by output class,
/// rejection rings, and shaded ground-truth regions.
void write_plot_svg(std::ostream& os, std::span<const ProcessedRow> rows, const GroundTruthTimeline& timeline,
                    int num_classes, const std::string& title);

// --- models ----------------------------------------------------------------

std::string to_json(const GaussianModel& model);
GaussianModel gaussian_from_json(const std::string& text);
std::string to_json(const OneClassModelSet& models);
OneClassModelSet occ_from_json(const std::string& text);
std::string to_json(const ClassifierBank& bank);
ClassifierBank bank_from_json(const std::string& text);
std::string onset_to_json(Scalar mav_threshold);
Scalar onset_from_json(const std::string& text);

// --- configuration ----------------------------------------------------------

/// Flat `section.key = value` settings; later assignments override earlier ones.
class Settings {
 public:
  static Settings parse(std::istream& is, const std::string& source = "config");
  /// Applies a single `key=value` override.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Builds a generator configuration; throws ConfigError on unknown synth.* keys.
GeneratorConfig generator_config(const Settings& settings);
/// Hyperparameters for one scheme, with the per-scheme sections applied.
SchemeConfig scheme_config(SchemeId id, const Settings& settings);
/// All keys the tools understand.
const std::vector<std::string>& known_keys();

// --- files -------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace dsqi::io
