// Batch front end: synth / train / run / eval / compare.

#include "dsqi/io.hpp"
#include "dsqi/metrics.hpp"
#include "dsqi/pipeline.hpp"
#include "dsqi/schemes.hpp"
#include "dsqi/synth.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace dsqi;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kUsage = 2, kParse = 3, kAlignment = 4, kTraining = 5 };

std::string default_out_dir() {
  if (const char* env = std::getenv("DSQI_OUT_DIR"); env && *env) return env;
  return ".";
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;

  io::Settings settings() const {
    io::Settings s;
    if (!config.empty()) {
      std::istringstream in(io::read_file(config));
      s = io::Settings::parse(in, config);
    }
    for (const auto& o : overrides) s.assign(o);
    return s;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config, "Flat key=value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--set", opt.overrides, "Override a setting, e.g. --set dcir.tau=30");
}

template <typename T>
T read_with(const std::string& path, T (*reader)(std::istream&, const std::string&)) {
  std::istringstream in(io::read_file(path));
  return reader(in, path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::vector<SchemeId> parse_schemes(const std::vector<std::string>& names) {
  if (names.empty()) return all_schemes();
  std::vector<SchemeId> ids;
  for (const auto& n : names) ids.push_back(scheme_from_string(n));
  return ids;
}

// --- synth -------------------------------------------------------------------

struct SynthOptions {
  CommonOptions common;
  std::string out = default_out_dir();
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> classes;
  std::optional<int> repetitions;
};

int cmd_synth(const SynthOptions& opt) {
  io::Settings settings = opt.common.settings();
  if (opt.seed) settings.set("synth.seed", std::to_string(*opt.seed));
  if (opt.classes) settings.set("synth.classes", std::to_string(*opt.classes));
  const GeneratorConfig cfg = io::generator_config(settings);
  const std::string mode = opt.mode.value_or(settings.get("synth.mode").value_or("confidence"));
  const int repetitions = opt.repetitions.value_or(std::stoi(settings.get("synth.training_repetitions").value_or("5")));
  if (repetitions < 1) throw ConfigError("synth.training_repetitions must be >= 1");
  const fs::path out(opt.out);
  ensure_dir(out);

  const GroundTruthTimeline timeline = gen_timeline(cfg);
  std::ostringstream tl;
  io::write_timeline(tl, timeline);
  io::write_file(out / "timeline.csv", tl.str());

  if (mode == "confidence") {
    const auto points = gen_confidence_stream(cfg, timeline);
    std::ostringstream s;
    io::write_stream(s, io::make_stream_rows(points, &timeline, cfg.geometry.increment_ms));
    io::write_file(out / "stream.csv", s.str());

    const auto mav = gen_mean_mav(cfg, timeline);
    std::ostringstream m;
    io::write_frame_values(m, "mean_mav", mav);
    io::write_file(out / "mav.csv", m.str());

    // Onset threshold from a separate rest-only recording.
    GeneratorConfig rest = cfg;
    rest.seed = cfg.seed + 1;
    rest.schedule = {cfg.nm_class};
    const auto nm_mav = gen_mean_mav(rest, gen_timeline(rest));
    io::write_file(out / "onset.json", io::onset_to_json(ol_threshold(nm_mav)));
  } else if (mode == "emg") {
    const MatrixX signal = gen_emg(cfg, timeline);
    std::ostringstream s;
    io::write_signal(s, signal);
    io::write_file(out / "signal.csv", s.str());

    const TimeDomainExtractor extractor;
    const auto names = extractor.feature_names(cfg.num_channels);
    const SchemeConfig aw = SchemeConfig::defaults(SchemeId::aw);
    for (Scalar len = aw.aw_min_length_ms; len <= aw.aw_max_length_ms + 1e-9; len += aw.aw_step_ms) {
      const auto data = gen_training_features(cfg, extractor, len, repetitions);
      std::ostringstream f;
      io::write_features(f, data, names);
      const int ms = static_cast<int>(std::lround(len));
      io::write_file(out / ("train_features_" + std::to_string(ms) + ".csv"), f.str());
      if (ms == static_cast<int>(std::lround(cfg.geometry.frame_length_ms))) io::write_file(out / "train_features.csv", f.str());
    }
  } else {
    throw ArgumentError("--mode must be confidence or emg");
  }

  std::cout << "classes " << cfg.num_classes << "\n"
            << "frames " << timeline.num_frames() << "\n"
            << "transitions " << timeline.num_transitions() << "\n"
            << "steady_segments " << (timeline.segments().size() - timeline.num_transitions()) << "\n";
  return kOk;
}

// --- train -------------------------------------------------------------------

struct TrainOptions {
  CommonOptions common;
  std::string features;
  std::string bank_dir;
  std::string out = default_out_dir();
  std::optional<int> classes;
  ClassId nm_class = 1;
};

int cmd_train(const TrainOptions& opt) {
  const io::Settings settings = opt.common.settings();
  const auto reg = std::stod(settings.get("train.regularization").value_or("1e-6"));
  const auto quantile = std::stod(settings.get("train.occ_quantile").value_or("0.99"));

  std::vector<std::string> names;
  std::istringstream in(io::read_file(opt.features));
  const LabeledFeatures data = io::read_features(in, &names, opt.features);
  int k = 0;
  if (opt.classes) {
    k = *opt.classes;
  } else {
    for (ClassId y : data.labels) k = std::max(k, y);
  }
  if (k < 2) throw TrainingError("training data must contain at least two classes");

  const fs::path out(opt.out);
  ensure_dir(out);
  io::write_file(out / "lda.json", io::to_json(train_gaussian(data, k, reg)));
  io::write_file(out / "occ.json", io::to_json(train_occ(data, k, quantile, reg)));
  io::write_file(out / "onset.json", io::onset_to_json(ol_threshold(mean_mav_from_features(data, names, opt.nm_class))));

  if (!opt.bank_dir.empty()) {
    const SchemeConfig aw = io::scheme_config(SchemeId::aw, settings);
    const auto bank = train_bank(aw, k, [&](Scalar len) {
      const fs::path p = fs::path(opt.bank_dir) / ("train_features_" + std::to_string(std::lround(len)) + ".csv");
      std::istringstream f(io::read_file(p));
      return io::read_features(f, nullptr, p.string());
    }, reg);
    io::write_file(out / "bank.json", io::to_json(bank));
  }
  std::cout << "trained " << k << " classes on " << data.size() << " frames (d=" << data.dimension() << ")\n";
  return kOk;
}

// --- run ---------------------------------------------------------------------

struct RunOptions {
  CommonOptions common;
  std::string stream;
  std::string signal;
  std::string aux;
  std::string models;
  std::string timeline;
  std::vector<std::string> schemes;
  std::string out = default_out_dir();
  ClassId nm_class = 1;
};

struct LoadedRun {
  MatrixX signal;
  std::vector<io::StreamRow> rows;
  StreamInput input;
  std::optional<GaussianModel> model;
  std::optional<OneClassModelSet> occ;
  std::optional<ClassifierBank> bank;
  TimeDomainExtractor extractor;
  SchemeResources resources;
  Scalar increment_ms = 16;
};

std::unique_ptr<LoadedRun> load_run(const RunOptions& opt, const io::Settings& settings) {
  auto run = std::make_unique<LoadedRun>();
  const GeneratorConfig gen = io::generator_config(settings);
  run->increment_ms = gen.geometry.increment_ms;
  const fs::path models(opt.models);
  const auto model_file = [&](const char* name) -> std::optional<fs::path> {
    if (opt.models.empty()) return std::nullopt;
    const fs::path p = models / name;
    return fs::exists(p) ? std::optional(p) : std::nullopt;
  };

  if (auto p = model_file("lda.json")) run->model = io::gaussian_from_json(io::read_file(*p));
  if (auto p = model_file("occ.json")) run->occ = io::occ_from_json(io::read_file(*p));
  if (auto p = model_file("bank.json")) run->bank = io::bank_from_json(io::read_file(*p));
  if (auto p = model_file("onset.json")) run->resources.mav_threshold = io::onset_from_json(io::read_file(*p));

  std::optional<GroundTruthTimeline> timeline;
  if (!opt.timeline.empty()) timeline = read_with(opt.timeline, &io::read_timeline);

  if (!opt.signal.empty()) {
    if (!run->model) throw ConfigError("classifying a raw signal needs lda.json in --models");
    run->signal = read_with(opt.signal, &io::read_signal);
    run->input = classify_signal(run->signal, gen.geometry, *run->model, run->extractor);
    run->rows = io::make_stream_rows(run->input.points, timeline ? &*timeline : nullptr, run->increment_ms);
  } else if (!opt.stream.empty()) {
    run->rows = read_with(opt.stream, &io::read_stream);
    for (std::size_t i = 0; i < run->rows.size(); ++i) {
      if (run->rows[i].frame != static_cast<std::int64_t>(i))
        throw ParseError(opt.stream + ": frames must be consecutive from 0 (row " + std::to_string(i + 2) + ")");
      run->input.points.push_back(run->rows[i].point);
    }
    if (!opt.aux.empty()) run->input.mean_mav = read_with(opt.aux, &io::read_frame_values);
  } else {
    throw ArgumentError("pass --stream or --signal");
  }
  if (run->input.points.empty()) throw EmptyStreamError("input stream has no frames");

  run->resources.catalog = ClassCatalog{run->input.points.front().confidence.num_classes(), opt.nm_class};
  run->resources.model = run->model ? &*run->model : nullptr;
  run->resources.occ = run->occ ? &*run->occ : nullptr;
  run->resources.bank = run->bank ? &*run->bank : nullptr;
  run->resources.extractor = &run->extractor;
  return run;
}

std::vector<std::pair<SchemeId, fs::path>> run_all(const RunOptions& opt, const io::Settings& settings,
                                                    const LoadedRun& run) {
  const fs::path out(opt.out);
  ensure_dir(out);
  if (!opt.signal.empty()) {
    std::ostringstream s;
    io::write_stream(s, run.rows);
    io::write_file(out / "stream.csv", s.str());
  }
  std::vector<std::pair<SchemeId, fs::path>> written;
  for (SchemeId id : parse_schemes(opt.schemes)) {
    const auto processed = run_scheme(io::scheme_config(id, settings), run.input, run.resources);
    std::ostringstream s;
    io::write_processed(s, run.rows, processed);
    const fs::path p = out / (std::string(to_string(id)) + ".csv");
    io::write_file(p, s.str());
    written.emplace_back(id, p);
  }
  return written;
}

int cmd_run(const RunOptions& opt) {
  const io::Settings settings = opt.common.settings();
  const auto run = load_run(opt, settings);
  const auto written = run_all(opt, settings, *run);
  for (const auto& [id, path] : written) std::cout << to_string(id) << " " << path.string() << "\n";
  return kOk;
}

// --- eval --------------------------------------------------------------------

struct EvalOptions {
  CommonOptions common;
  std::string timeline;
  std::vector<std::string> processed;
  std::string out;
  std::string plot_dir;
  ClassId nm_class = 1;
};

std::vector<io::MetricsRow> evaluate_files(const std::vector<std::string>& files, const GroundTruthTimeline& timeline,
                                           ClassId nm_class, Scalar increment_ms, const std::string& plot_dir) {
  std::vector<io::MetricsRow> rows;
  for (const auto& file : files) {
    const auto processed = read_with(file, &io::read_processed);
    for (std::size_t i = 0; i < processed.size(); ++i)
      if (processed[i].frame != static_cast<std::int64_t>(i)) {
        std::ostringstream msg;
        msg << file << ": first misaligned frame at row " << (i + 2) << " (expected frame " << i << ", got "
            << processed[i].frame << ")";
        throw AlignmentError(msg.str());
      }
    if (static_cast<std::int64_t>(processed.size()) != timeline.num_frames()) {
      std::ostringstream msg;
      msg << file << ": " << processed.size() << " frames but timeline covers " << timeline.num_frames()
          << "; first mismatch at frame " << std::min<std::int64_t>(static_cast<std::int64_t>(processed.size()), timeline.num_frames());
      throw AlignmentError(msg.str());
    }
    std::vector<ClassId> y;
    y.reserve(processed.size());
    int k = 0;
    for (const auto& r : processed) {
      y.push_back(r.y_tilde);
      k = std::max({k, r.y_tilde, r.y_hat});
    }
    const std::string scheme = fs::path(file).stem().string();
    rows.push_back(io::MetricsRow{scheme, evaluate(y, timeline, nm_class, increment_ms)});
    if (!plot_dir.empty()) {
      ensure_dir(plot_dir);
      std::ostringstream svg;
      io::write_plot_svg(svg, processed, timeline, k, scheme);
      io::write_file(fs::path(plot_dir) / (scheme + ".svg"), svg.str());
    }
  }
  return rows;
}

void print_table(std::ostream& os, const std::vector<io::MetricsRow>& rows) {
  os << std::left << std::setw(8) << "scheme" << std::right << std::setw(9) << "AER" << std::setw(9) << "TER"
     << std::setw(9) << "INS" << std::setw(10) << "T_OFF" << std::setw(10) << "T_ON" << std::setw(10) << "T_TRANS"
     << std::setw(9) << "tINS" << std::setw(9) << "TCE" << std::setw(9) << "PNM" << "\n";
  os << std::fixed;
  for (const auto& r : rows) {
    const auto& s = r.report.steady;
    const auto& t = r.report.transition;
    os << std::left << std::setw(8) << r.scheme << std::right << std::setprecision(4) << std::setw(9) << s.aer
       << std::setw(9) << s.ter << std::setw(9) << s.ins << std::setprecision(1) << std::setw(10) << t.offset_ms
       << std::setw(10) << t.onset_ms << std::setw(10) << t.transition_ms << std::setprecision(4) << std::setw(9)
       << t.ins << std::setw(9) << t.tce << std::setw(9) << t.pnm << "\n";
  }
  os.unsetf(std::ios::fixed);
}

void emit_metrics(const std::string& out, const std::vector<io::MetricsRow>& rows) {
  std::ostringstream csv;
  io::write_metrics(csv, rows);
  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    io::write_file(out, csv.str());
  }
}

int cmd_eval(const EvalOptions& opt) {
  const io::Settings settings = opt.common.settings();
  const GeneratorConfig gen = io::generator_config(settings);
  const auto timeline = read_with(opt.timeline, &io::read_timeline);
  const auto rows = evaluate_files(opt.processed, timeline, opt.nm_class, gen.geometry.increment_ms, opt.plot_dir);
  emit_metrics(opt.out, rows);
  return kOk;
}

// --- compare -----------------------------------------------------------------

struct CompareOptions {
  RunOptions run;
  std::string plot_dir;
  std::string metrics;
};

int cmd_compare(const CompareOptions& opt) {
  if (opt.run.timeline.empty()) throw ArgumentError("compare needs --timeline");
  const io::Settings settings = opt.run.common.settings();
  const auto run = load_run(opt.run, settings);
  const auto written = run_all(opt.run, settings, *run);
  std::vector<std::string> files;
  for (const auto& [id, path] : written) files.push_back(path.string());
  const auto timeline = read_with(opt.run.timeline, &io::read_timeline);
  const auto rows = evaluate_files(files, timeline, opt.run.nm_class, run->increment_ms, opt.plot_dir);
  emit_metrics(opt.metrics.empty() ? (fs::path(opt.run.out) / "metrics.csv").string() : opt.metrics, rows);
  print_table(std::cout, rows);
  return kOk;
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  add_common(cmd, opt.common);
  cmd->add_option("--stream", opt.stream, "Confidence-stream CSV")->check(CLI::ExistingFile);
  cmd->add_option("--signal", opt.signal, "Raw signal CSV (classified with --models/lda.json)")->check(CLI::ExistingFile);
  cmd->add_option("--aux", opt.aux, "Per-frame mean-MAV CSV for onset locking")->check(CLI::ExistingFile);
  cmd->add_option("--models", opt.models, "Directory holding lda.json, occ.json, onset.json, bank.json");
  cmd->add_option("--timeline", opt.timeline, "Timeline CSV")->check(CLI::ExistingFile);
  cmd->add_option("--schemes", opt.schemes, "Schemes to run (default: all)")->delimiter(',');
  cmd->add_option("--out", opt.out, "Output directory");
  cmd->add_option("--nm-class", opt.nm_class, "No-Motion class id");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-stream post-processing toolkit"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic session");
  add_common(s, synth.common);
  s->add_option("--out", synth.out, "Output directory");
  s->add_option("--mode", synth.mode, "confidence or emg")->check(CLI::IsMember({"confidence", "emg"}));
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--classes", synth.classes, "Number of classes");
  s->add_option("--repetitions", synth.repetitions, "Training holds per class (emg mode)");

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Fit Gaussian, one-class and onset models");
  add_common(t, train.common);
  t->add_option("--features", train.features, "Labelled feature CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--bank-dir", train.bank_dir, "Directory with train_features_<ms>.csv for adaptive windowing");
  t->add_option("--out", train.out, "Output directory");
  t->add_option("--classes", train.classes, "Number of classes (default: largest label)");
  t->add_option("--nm-class", train.nm_class, "No-Motion class id");

  RunOptions run;
  auto* r = app.add_subcommand("run", "Apply schemes to a decision stream");
  add_run_options(r, run);

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Compute steady-state and transition metrics");
  add_common(e, eval.common);
  e->add_option("--timeline", eval.timeline, "Timeline CSV")->required()->check(CLI::ExistingFile);
  e->add_option("processed", eval.processed, "Processed stream CSVs")->required()->check(CLI::ExistingFile);
  e->add_option("--out", eval.out, "Metrics CSV path (default: stdout)");
  e->add_option("--plot-dir", eval.plot_dir, "Write one SVG decision-stream plot per input");
  e->add_option("--nm-class", eval.nm_class, "No-Motion class id");

  CompareOptions compare;
  auto* c = app.add_subcommand("compare", "Run schemes and evaluate them in one pass");
  add_run_options(c, compare.run);
  c->add_option("--plot-dir", compare.plot_dir, "Write SVG plots");
  c->add_option("--metrics", compare.metrics, "Metrics CSV path (default: <out>/metrics.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*r) return cmd_run(run);
    if (*e) return cmd_eval(eval);
    if (*c) return cmd_compare(compare);
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kParse;
  } catch (const AlignmentError& err) {
    std::cerr << "alignment error: " << err.what() << "\n";
    return kAlignment;
  } catch (const TrainingError& err) {
    std::cerr << "training error: " << err.what() << "\n";
    return kTraining;
  } catch (const ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kOther;
  }
  return kUsage;
}
