#include "dsqi/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dsqi::io {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw ParseError(msg.str());
}

Scalar parse_real(const std::string& s, const std::string& source, std::size_t line) {
  Scalar v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) parse_fail(source, line, "expected a number, got '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& source, std::size_t line) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) parse_fail(source, line, "expected an integer, got '" + s + "'");
  return v;
}

// Reads a header line and the remaining rows, tracking 1-based line numbers.
struct CsvReader {
  std::istream& is;
  std::string source;
  std::size_t line_no = 0;

  std::vector<std::string> header() {
    std::string line;
    if (!std::getline(is, line)) parse_fail(source, 1, "missing header");
    ++line_no;
    return split(line);
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      fields = split(line);
      return true;
    }
    return false;
  }
};

void expect_columns(const std::vector<std::string>& got, const std::vector<std::string>& want,
                    const std::string& source, std::size_t line) {
  if (got.size() < want.size()) parse_fail(source, line, "too few columns");
  for (std::size_t i = 0; i < want.size(); ++i)
    if (got[i] != want[i]) parse_fail(source, line, "expected column '" + want[i] + "', got '" + got[i] + "'");
}

std::string stream_header(int k) {
  std::string h = "frame,ts_ms,true_class,y_hat";
  for (int c = 1; c <= k; ++c) h += ",c_" + std::to_string(c);
  return h;
}

void write_stream_fields(std::ostream& os, const StreamRow& r) {
  os << r.frame << ',' << format_real(r.ts_ms) << ',' << r.true_class << ',' << r.point.decision;
  const VectorX& c = r.point.confidence.values();
  for (Eigen::Index k = 0; k < c.size(); ++k) os << ',' << format_real(c(k));
}

int count_confidence_columns(const std::vector<std::string>& header, std::size_t first) {
  int k = 0;
  for (std::size_t i = first; i < header.size(); ++i) {
    if (header[i] != "c_" + std::to_string(k + 1)) break;
    ++k;
  }
  return k;
}

json matrix_json(const MatrixX& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const VectorX& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MatrixX matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  MatrixX m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) throw ParseError("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<Scalar>();
  }
  return m;
}

VectorX vector_from(const json& j) {
  VectorX v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<Scalar>();
  return v;
}

json gaussian_json(const GaussianModel& m) {
  return json{{"type", "gaussian"},
              {"num_classes", m.num_classes()},
              {"dimension", m.dimension()},
              {"means", matrix_json(m.means().transpose())},
              {"covariance", matrix_json(m.covariance())},
              {"priors", vector_json(m.priors())}};
}

GaussianModel gaussian_from(const json& j) {
  if (j.value("type", "") != "gaussian") throw ParseError("not a gaussian model");
  return GaussianModel(matrix_from(j.at("means")).transpose(), matrix_from(j.at("covariance")),
                       vector_from(j.at("priors")));
}

template <typename F>
auto parse_json(const std::string& text, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace

std::string format_real(Scalar v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_stream(std::ostream& os, std::span<const StreamRow> rows) {
  const int k = rows.empty() ? 0 : rows.front().point.confidence.num_classes();
  os << stream_header(k) << '\n';
  for (const auto& r : rows) {
    write_stream_fields(os, r);
    os << '\n';
  }
}

std::vector<StreamRow> read_stream(std::istream& is, const std::string& source) {
  CsvReader in{is, source};
  const auto head = in.header();
  expect_columns(head, {"frame", "ts_ms", "true_class", "y_hat"}, source, 1);
  const int k = count_confidence_columns(head, 4);
  if (k < 2) parse_fail(source, 1, "need at least two confidence columns c_1..c_K");

  std::vector<StreamRow> rows;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() < static_cast<std::size_t>(4 + k)) parse_fail(source, in.line_no, "too few fields");
    StreamRow r;
    r.frame = parse_int(f[0], source, in.line_no);
    r.ts_ms = parse_real(f[1], source, in.line_no);
    r.true_class = static_cast<ClassId>(parse_int(f[2], source, in.line_no));
    VectorX c(k);
    for (int i = 0; i < k; ++i) c(i) = parse_real(f[static_cast<std::size_t>(4 + i)], source, in.line_no);
    try {
      r.point = DecisionPoint::from(ConfidenceVector::normalized(c, r.frame));
    } catch (const Error& e) {
      parse_fail(source, in.line_no, e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<StreamRow> make_stream_rows(std::span<const DecisionPoint> points, const GroundTruthTimeline* timeline,
                                        Scalar increment_ms) {
  std::vector<ClassId> labels;
  if (timeline) labels = timeline->frame_labels();
  std::vector<StreamRow> rows;
  rows.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const ClassId truth = i < labels.size() ? labels[i] : 0;
    rows.push_back(StreamRow{p.frame_index, static_cast<Scalar>(p.frame_index) * increment_ms, truth, p});
  }
  return rows;
}

void write_processed(std::ostream& os, std::span<const StreamRow> input, std::span<const ProcessedDecision> out) {
  if (input.size() != out.size()) throw AlignmentError("processed stream length differs from input");
  const int k = input.empty() ? 0 : input.front().point.confidence.num_classes();
  os << stream_header(k) << ",y_tilde,rejected,threshold\n";
  for (std::size_t i = 0; i < input.size(); ++i) {
    write_stream_fields(os, input[i]);
    os << ',' << out[i].decision << ',' << (out[i].rejected ? 1 : 0) << ',';
    if (out[i].effective_threshold) os << format_real(*out[i].effective_threshold);
    os << '\n';
  }
}

std::vector<ProcessedRow> read_processed(std::istream& is, const std::string& source) {
  CsvReader in{is, source};
  const auto head = in.header();
  expect_columns(head, {"frame", "ts_ms", "true_class", "y_hat"}, source, 1);
  const int k = count_confidence_columns(head, 4);
  const std::size_t tail = static_cast<std::size_t>(4 + k);
  if (head.size() != tail + 3 || head[tail] != "y_tilde" || head[tail + 1] != "rejected" || head[tail + 2] != "threshold")
    parse_fail(source, 1, "expected trailing columns y_tilde,rejected,threshold");

  std::vector<ProcessedRow> rows;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != head.size()) parse_fail(source, in.line_no, "wrong number of fields");
    ProcessedRow r;
    r.frame = parse_int(f[0], source, in.line_no);
    r.y_hat = static_cast<ClassId>(parse_int(f[3], source, in.line_no));
    for (int i = 0; i < k; ++i) r.confidence = std::max(r.confidence, parse_real(f[static_cast<std::size_t>(4 + i)], source, in.line_no));
    r.y_tilde = static_cast<ClassId>(parse_int(f[tail], source, in.line_no));
    r.rejected = parse_int(f[tail + 1], source, in.line_no) != 0;
    if (!f[tail + 2].empty()) r.threshold = parse_real(f[tail + 2], source, in.line_no);
    rows.push_back(r);
  }
  return rows;
}

void write_timeline(std::ostream& os, const GroundTruthTimeline& timeline) {
  os << "kind,start_frame,end_frame,class,from_class,to_class\n";
  for (const auto& s : timeline.segments()) {
    if (s.kind == SegmentKind::steady) {
      os << "steady," << s.start_frame << ',' << s.end_frame << ',' << s.cls << ",,\n";
    } else {
      os << "transition," << s.start_frame << ',' << s.end_frame << ",," << s.from_class << ',' << s.to_class << '\n';
    }
  }
}

GroundTruthTimeline read_timeline(std::istream& is, const std::string& source) {
  CsvReader in{is, source};
  expect_columns(in.header(), {"kind", "start_frame", "end_frame", "class", "from_class", "to_class"}, source, 1);
  std::vector<Segment> segs;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != 6) parse_fail(source, in.line_no, "expected 6 fields");
    Segment s;
    if (f[0] == "steady") {
      s.kind = SegmentKind::steady;
      s.cls = static_cast<ClassId>(parse_int(f[3], source, in.line_no));
    } else if (f[0] == "transition") {
      s.kind = SegmentKind::transition;
      s.from_class = static_cast<ClassId>(parse_int(f[4], source, in.line_no));
      s.to_class = static_cast<ClassId>(parse_int(f[5], source, in.line_no));
    } else {
      parse_fail(source, in.line_no, "unknown segment kind '" + f[0] + "'");
    }
    s.start_frame = parse_int(f[1], source, in.line_no);
    s.end_frame = parse_int(f[2], source, in.line_no);
    segs.push_back(s);
  }
  try {
    return GroundTruthTimeline(std::move(segs));
  } catch (const ArgumentError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

void write_signal(std::ostream& os, const MatrixX& signal) {
  os << "sample";
  for (Eigen::Index ch = 0; ch < signal.cols(); ++ch) os << ",ch_" << (ch + 1);
  os << '\n';
  for (Eigen::Index s = 0; s < signal.rows(); ++s) {
    os << s;
    for (Eigen::Index ch = 0; ch < signal.cols(); ++ch) os << ',' << format_real(signal(s, ch));
    os << '\n';
  }
}

MatrixX read_signal(std::istream& is, const std::string& source) {
  CsvReader in{is, source};
  const auto head = in.header();
  if (head.empty() || head[0] != "sample" || head.size() < 2) parse_fail(source, 1, "expected sample,ch_1,...");
  const auto channels = static_cast<Eigen::Index>(head.size() - 1);
  std::vector<Scalar> data;
  std::vector<std::string> f;
  Eigen::Index rows = 0;
  while (in.next(f)) {
    if (f.size() != head.size()) parse_fail(source, in.line_no, "wrong number of fields");
    for (Eigen::Index ch = 0; ch < channels; ++ch) data.push_back(parse_real(f[static_cast<std::size_t>(ch + 1)], source, in.line_no));
    ++rows;
  }
  return Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), rows, channels);
}

void write_frame_values(std::ostream& os, const std::string& column, std::span<const Scalar> values) {
  os << "frame," << column << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << format_real(values[i]) << '\n';
}

std::vector<Scalar> read_frame_values(std::istream& is, const std::string& source) {
  CsvReader in{is, source};
  const auto head = in.header();
  if (head.size() != 2 || head[0] != "frame") parse_fail(source, 1, "expected frame,<value>");
  std::vector<Scalar> values;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != 2) parse_fail(source, in.line_no, "expected 2 fields");
    if (parse_int(f[0], source, in.line_no) != static_cast<std::int64_t>(values.size()))
      parse_fail(source, in.line_no, "frames must be consecutive from 0");
    values.push_back(parse_real(f[1], source, in.line_no));
  }
  return values;
}

void write_features(std::ostream& os, const LabeledFeatures& data, const std::vector<std::string>& names) {
  os << "label";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    os << data.labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < data.dimension(); ++c) os << ',' << format_real(data.features(r, c));
    os << '\n';
  }
}

LabeledFeatures read_features(std::istream& is, std::vector<std::string>* names, const std::string& source) {
  CsvReader in{is, source};
  const auto head = in.header();
  if (head.size() < 2 || head[0] != "label") parse_fail(source, 1, "expected label,<features...>");
  if (names) names->assign(head.begin() + 1, head.end());
  const auto d = static_cast<Eigen::Index>(head.size() - 1);
  std::vector<Scalar> data;
  LabeledFeatures out;
  std::vector<std::string> f;
  while (in.next(f)) {
    if (f.size() != head.size()) parse_fail(source, in.line_no, "wrong number of fields");
    out.labels.push_back(static_cast<ClassId>(parse_int(f[0], source, in.line_no)));
    for (Eigen::Index c = 0; c < d; ++c) data.push_back(parse_real(f[static_cast<std::size_t>(c + 1)], source, in.line_no));
  }
  out.features = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), static_cast<Eigen::Index>(out.labels.size()), d);
  return out;
}

void write_metrics(std::ostream& os, std::span<const MetricsRow> rows) {
  os << "scheme,steady_aer,steady_ter,steady_ins,steady_segments,t_offset_ms,t_onset_ms,t_transition_ms,"
        "transition_ins,tce,pnm,transitions_included,transitions_excluded\n";
  for (const auto& r : rows) {
    const auto& s = r.report.steady;
    const auto& t = r.report.transition;
    os << r.scheme << ',' << format_real(s.aer) << ',' << format_real(s.ter) << ',' << format_real(s.ins) << ','
       << s.segments << ',' << format_real(t.offset_ms) << ',' << format_real(t.onset_ms) << ','
       << format_real(t.transition_ms) << ',' << format_real(t.ins) << ',' << format_real(t.tce) << ','
       << format_real(t.pnm) << ',' << t.included << ',' << t.excluded << '\n';
  }
}

void write_plot_svg(std::ostream& os, std::span<const ProcessedRow> rows, const GroundTruthTimeline& timeline,
                    int num_classes, const std::string& title) {
  static constexpr const char* kPalette[] = {"#7f7f7f", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#bcbd22", "#17becf"};
  const auto colour = [](ClassId k) { return kPalette[static_cast<std::size_t>(std::max(0, k - 1)) % 10]; };
  const double dx = 2.0;
  const double height = 200;
  const double top = 30;
  const double left = 40;
  const double width = left + dx * static_cast<double>(std::max<std::size_t>(rows.size(), 1)) + 20;
  const double band = height / std::max(1, num_classes);

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << (top + height + 30)
     << "\" viewBox=\"0 0 " << width << ' ' << (top + height + 30) << "\">\n";
  os << "<title>" << title << "</title>\n";
  os << "<g class=\"truth\">\n";
  for (const auto& s : timeline.segments()) {
    const ClassId k = s.kind == SegmentKind::steady ? s.cls : s.to_class;
    os << "<rect x=\"" << (left + dx * static_cast<double>(s.start_frame)) << "\" y=\"" << top << "\" width=\""
       << dx * static_cast<double>(s.length()) << "\" height=\"" << height << "\" fill=\""
       << (s.kind == SegmentKind::steady ? colour(k) : "#dddddd") << "\" fill-opacity=\"0.15\"/>\n";
  }
  os << "</g>\n<g class=\"frames\">\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double x = left + dx * static_cast<double>(i) + dx / 2;
    const double y = top + band * (static_cast<double>(r.y_tilde) - 0.5) + (0.5 - r.confidence) * band * 0.8;
    os << "<circle class=\"frame\" cx=\"" << x << "\" cy=\"" << y << "\" r=\"0.9\" fill=\"" << colour(r.y_tilde)
       << "\"/>\n";
  }
  os << "</g>\n<g class=\"rejections\">\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].rejected) continue;
    const double x = left + dx * static_cast<double>(i) + dx / 2;
    const double y = top + band * (static_cast<double>(rows[i].y_tilde) - 0.5);
    os << "<circle class=\"rejected\" cx=\"" << x << "\" cy=\"" << y << "\" r=\"1.6\" fill=\"none\" stroke=\"black\" "
          "stroke-width=\"0.4\"/>\n";
  }
  os << "</g>\n";
  for (int k = 1; k <= num_classes; ++k)
    os << "<text x=\"4\" y=\"" << (top + band * (k - 0.5) + 3) << "\" font-size=\"8\" fill=\"" << colour(k) << "\">"
       << k << "</text>\n";
  os << "</svg>\n";
}

std::string to_json(const GaussianModel& model) { return gaussian_json(model).dump(1) + "\n"; }

GaussianModel gaussian_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) { return gaussian_from(j); });
}

std::string to_json(const OneClassModelSet& models) {
  json arr = json::array();
  for (const auto& m : models)
    arr.push_back(json{{"mean", vector_json(m.mean())}, {"covariance", matrix_json(m.covariance())}, {"threshold", m.threshold()}});
  return json{{"type", "occ"}, {"models", arr}}.dump(1) + "\n";
}

OneClassModelSet occ_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    if (j.value("type", "") != "occ") throw ParseError("not a one-class model file");
    OneClassModelSet out;
    for (const auto& m : j.at("models"))
      out.emplace_back(vector_from(m.at("mean")), matrix_from(m.at("covariance")), m.at("threshold").get<Scalar>());
    return out;
  });
}

std::string to_json(const ClassifierBank& bank) {
  json models = json::object();
  for (const auto& [len, model] : bank.by_length_ms) models[std::to_string(len)] = gaussian_json(model);
  return json{{"type", "bank"}, {"models", models}}.dump(1) + "\n";
}

ClassifierBank bank_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    if (j.value("type", "") != "bank") throw ParseError("not a classifier bank file");
    ClassifierBank bank;
    for (const auto& [key, value] : j.at("models").items()) bank.by_length_ms.emplace(std::stoi(key), gaussian_from(value));
    return bank;
  });
}

std::string onset_to_json(Scalar mav_threshold) {
  return json{{"type", "onset"}, {"mav_threshold", mav_threshold}}.dump(1) + "\n";
}

Scalar onset_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    if (j.value("type", "") != "onset") throw ParseError("not an onset threshold file");
    return j.at("mav_threshold").get<Scalar>();
  });
}

// --- settings ----------------------------------------------------------------

Settings Settings::parse(std::istream& is, const std::string& source) {
  Settings s;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(source, n, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) parse_fail(source, n, "empty key");
    s.values_[key] = trim(line.substr(eq + 1));
  }
  return s;
}

void Settings::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ArgumentError("expected key=value, got '" + assignment + "'");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::optional<std::string> Settings::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

Scalar as_real(const Settings& s, const std::string& key, Scalar fallback) {
  const auto v = s.get(key);
  if (!v) return fallback;
  Scalar out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) throw ConfigError("setting " + key + " is not a number: '" + *v + "'");
  return out;
}

std::int64_t as_int(const Settings& s, const std::string& key, std::int64_t fallback) {
  const auto v = s.get(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) throw ConfigError("setting " + key + " is not an integer: '" + *v + "'");
  return out;
}

std::vector<Scalar> as_real_list(const std::string& key, const std::string& v) {
  std::vector<Scalar> out;
  for (const auto& part : split(v)) {
    Settings tmp;
    tmp.set(key, trim(part));
    out.push_back(as_real(tmp, key, 0));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "synth.seed", "synth.mode", "synth.classes", "synth.nm_class", "synth.channels", "synth.sample_rate_hz",
      "synth.frame_length_ms", "synth.increment_ms", "synth.steady_ms", "synth.transition_ms", "synth.shape",
      "synth.steady_concentration", "synth.steady_softening", "synth.steady_blip_rate",
      "synth.transition_concentration", "synth.transition_diffuseness", "synth.volatility", "synth.mav_noise",
      "synth.schedule", "synth.training_repetitions",
      "train.regularization", "train.occ_quantile",
      "mv.m", "bf.m", "vocir.m", "ol.m", "plda.b", "plda.p_max", "cbr.th", "aw.th", "aw.min_ms", "aw.max_ms",
      "aw.step_ms", "cs.nm_scale", "cs.active_scale", "cs.scales", "dcir.th_min", "dcir.th_max", "dcir.tau",
      "vocir.th_min", "vocir.th_max", "vocir.beta"};
  return keys;
}

GeneratorConfig generator_config(const Settings& s) {
  for (const auto& [key, value] : s.values())
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw ConfigError("unknown setting '" + key + "'");

  GeneratorConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(as_int(s, "synth.seed", static_cast<std::int64_t>(cfg.seed)));
  cfg.num_classes = static_cast<int>(as_int(s, "synth.classes", cfg.num_classes));
  cfg.nm_class = static_cast<ClassId>(as_int(s, "synth.nm_class", cfg.nm_class));
  cfg.num_channels = static_cast<int>(as_int(s, "synth.channels", cfg.num_channels));
  cfg.geometry.sample_rate_hz = as_real(s, "synth.sample_rate_hz", cfg.geometry.sample_rate_hz);
  cfg.geometry.frame_length_ms = as_real(s, "synth.frame_length_ms", cfg.geometry.frame_length_ms);
  cfg.geometry.increment_ms = as_real(s, "synth.increment_ms", cfg.geometry.increment_ms);
  cfg.steady_ms = as_real(s, "synth.steady_ms", cfg.steady_ms);
  cfg.transition_ms = as_real(s, "synth.transition_ms", cfg.transition_ms);
  if (const auto shape = s.get("synth.shape")) {
    if (*shape == "linear") cfg.shape = TransitionShape::linear;
    else if (*shape == "sigmoid") cfg.shape = TransitionShape::sigmoid;
    else throw ConfigError("synth.shape must be linear or sigmoid");
  }
  cfg.steady_concentration = as_real(s, "synth.steady_concentration", cfg.steady_concentration);
  cfg.steady_softening = as_real(s, "synth.steady_softening", cfg.steady_softening);
  cfg.steady_blip_rate = as_real(s, "synth.steady_blip_rate", cfg.steady_blip_rate);
  cfg.transition_concentration = as_real(s, "synth.transition_concentration", cfg.transition_concentration);
  cfg.transition_diffuseness = as_real(s, "synth.transition_diffuseness", cfg.transition_diffuseness);
  cfg.volatility = as_real(s, "synth.volatility", cfg.volatility);
  cfg.mav_noise = as_real(s, "synth.mav_noise", cfg.mav_noise);
  if (const auto sched = s.get("synth.schedule"); sched && *sched != "all-pairs") {
    for (Scalar v : as_real_list("synth.schedule", *sched)) cfg.schedule.push_back(static_cast<ClassId>(v));
  }
  cfg.validate();
  return cfg;
}

SchemeConfig scheme_config(SchemeId id, const Settings& s) {
  SchemeConfig cfg = SchemeConfig::defaults(id);
  switch (id) {
    case SchemeId::mv: cfg.history = static_cast<int>(as_int(s, "mv.m", cfg.history)); break;
    case SchemeId::bf: cfg.history = static_cast<int>(as_int(s, "bf.m", cfg.history)); break;
    case SchemeId::vocir:
      cfg.history = static_cast<int>(as_int(s, "vocir.m", cfg.history));
      cfg.threshold_min = as_real(s, "vocir.th_min", cfg.threshold_min);
      cfg.threshold_max = as_real(s, "vocir.th_max", cfg.threshold_max);
      cfg.beta = as_real(s, "vocir.beta", cfg.beta);
      break;
    case SchemeId::dcir:
      cfg.threshold_min = as_real(s, "dcir.th_min", cfg.threshold_min);
      cfg.threshold_max = as_real(s, "dcir.th_max", cfg.threshold_max);
      cfg.tau = as_real(s, "dcir.tau", cfg.tau);
      break;
    default: break;
  }
  cfg.lock_length = static_cast<int>(as_int(s, "ol.m", cfg.lock_length));
  cfg.growth_base = as_real(s, "plda.b", cfg.growth_base);
  cfg.max_prior = as_real(s, "plda.p_max", cfg.max_prior);
  cfg.reject_threshold = as_real(s, "cbr.th", cfg.reject_threshold);
  cfg.aw_threshold = as_real(s, "aw.th", cfg.aw_threshold);
  cfg.aw_min_length_ms = as_real(s, "aw.min_ms", cfg.aw_min_length_ms);
  cfg.aw_max_length_ms = as_real(s, "aw.max_ms", cfg.aw_max_length_ms);
  cfg.aw_step_ms = as_real(s, "aw.step_ms", cfg.aw_step_ms);
  cfg.nm_scale = as_real(s, "cs.nm_scale", cfg.nm_scale);
  cfg.active_scale = as_real(s, "cs.active_scale", cfg.active_scale);
  if (const auto scales = s.get("cs.scales")) cfg.scale_factors = as_real_list("cs.scales", *scales);
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace dsqi::io
