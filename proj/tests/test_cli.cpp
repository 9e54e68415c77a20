#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DSQI_CLI_PATH;

struct Sandbox {
  fs::path root;
  Sandbox() {
    root = fs::temp_directory_path() / ("dsqi_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }
  std::string operator/(const std::string& p) const { return (root / p).string(); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

int count_prefix(const std::vector<std::string>& ls, const std::string& prefix) {
  int n = 0;
  for (const auto& l : ls) n += l.rfind(prefix, 0) == 0;
  return n;
}

// Two classes, 3 x 312 + 2 x 32 = 1000 frames.
const std::string kThousand = "--classes 2 --set synth.steady_ms=4992 --set synth.transition_ms=512";

}  // namespace

TEST_CASE("synth writes a 42-transition session by default") {
  Sandbox box;
  REQUIRE(run("synth --out " + box / "s") == 0);
  CHECK(count_prefix(lines(box / "s/timeline.csv"), "transition,") == 42);
  CHECK(fs::exists(box / "s/stream.csv"));
  CHECK(fs::exists(box / "s/mav.csv"));
  CHECK(fs::exists(box / "s/onset.json"));
}

TEST_CASE("synth is seeded and honours the class count") {
  Sandbox box;
  REQUIRE(run("synth --seed 7 --out " + box / "a") == 0);
  REQUIRE(run("synth --seed 7 --out " + box / "b") == 0);
  REQUIRE(run("synth --seed 8 --out " + box / "c") == 0);
  CHECK(slurp(box / "a/stream.csv") == slurp(box / "b/stream.csv"));
  CHECK(slurp(box / "a/timeline.csv") == slurp(box / "b/timeline.csv"));
  CHECK(slurp(box / "a/stream.csv") != slurp(box / "c/stream.csv"));

  REQUIRE(run("synth --classes 3 --out " + box / "k3") == 0);
  CHECK(count_prefix(lines(box / "k3/timeline.csv"), "transition,") == 6);
}

TEST_CASE("output directory defaults to the environment") {
  Sandbox box;
  REQUIRE(run("synth --classes 2", "DSQI_OUT_DIR=" + box / "env") == 0);
  CHECK(fs::exists(box / "env/timeline.csv"));
}

TEST_CASE("run: identity and full rejection") {
  Sandbox box;
  REQUIRE(run("synth --classes 3 --out " + box / "s") == 0);
  REQUIRE(run("run --stream " + box / "s/stream.csv" + " --schemes none,cbr --set cbr.th=1.0 --out " + box / "r") == 0);

  const auto none = lines(box / "r/none.csv");
  const auto cbr = lines(box / "r/cbr.csv");
  REQUIRE(none.size() == lines(box / "s/stream.csv").size());
  const auto header = split(none[0]);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  for (std::size_t i = 1; i < none.size(); ++i) {
    const auto a = split(none[i]);
    const auto b = split(cbr[i]);
    CHECK(a[col("y_tilde")] == a[col("y_hat")]);
    CHECK(b[col("y_tilde")] == "1");
    CHECK(b[col("rejected")] == "1");
  }
}

TEST_CASE("train -> run all schemes on a raw-signal session") {
  Sandbox box;
  REQUIRE(run("synth --mode emg " + kThousand + " --set synth.training_repetitions=2 --out " + box / "e") == 0);
  REQUIRE(run("train --features " + box / "e/train_features.csv" + " --bank-dir " + box / "e" + " --out " + box / "m") == 0);
  for (const char* f : {"lda.json", "occ.json", "onset.json", "bank.json"}) CHECK(fs::exists(box / (std::string("m/") + f)));

  REQUIRE(run("train --features " + box / "e/train_features.csv" + " --bank-dir " + box / "e" + " --out " + box / "m2") == 0);
  CHECK(slurp(box / "m/lda.json") == slurp(box / "m2/lda.json"));
  CHECK(slurp(box / "m/bank.json") == slurp(box / "m2/bank.json"));

  const std::string schemes = "mv,plda,cbr,cs,bf,aw,ol,od,dcir,vocir";
  REQUIRE(run("compare --signal " + box / "e/signal.csv" + " --models " + box / "m" + " --timeline " +
              box / "e/timeline.csv" + " --schemes " + schemes + " --out " + box / "r" + " --plot-dir " + box / "p") == 0);
  const auto stream_rows = lines(box / "r/stream.csv").size();
  CHECK(stream_rows == 1001);
  int files = 0;
  for (const auto& e : fs::directory_iterator(box / "r"))
    if (e.path().filename() != "stream.csv" && e.path().filename() != "metrics.csv") {
      ++files;
      CHECK(lines(e.path().string()).size() == stream_rows);
    }
  CHECK(files == 10);
  CHECK(lines(box / "r/metrics.csv").size() == 11);

  const std::string svg = slurp(box / "p/dcir.svg");
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t markers = 0;
  for (std::size_t pos = 0; (pos = svg.find("class=\"frame\"", pos)) != std::string::npos; ++pos) ++markers;
  CHECK(markers == 1000);
}

TEST_CASE("eval on a perfect stream") {
  Sandbox box;
  REQUIRE(run("synth --classes 3 --out " + box / "s") == 0);
  const auto stream = lines(box / "s/stream.csv");
  const auto header = split(stream[0]);
  {
    std::ofstream out(box / "perfect.csv");
    out << stream[0] << ",y_tilde,rejected,threshold\n";
    for (std::size_t i = 1; i < stream.size(); ++i) {
      const auto f = split(stream[i]);
      out << stream[i] << "," << f[2] << ",0,\n";
    }
  }
  REQUIRE(run("eval --timeline " + box / "s/timeline.csv" + " " + box / "perfect.csv" + " --out " + box / "m.csv") == 0);
  const auto m = lines(box / "m.csv");
  REQUIRE(m.size() == 2);
  const auto names = split(m[0]);
  const auto row = split(m[1]);
  CHECK(row[0] == "perfect");
  for (const char* metric : {"steady_aer", "steady_ter", "steady_ins"}) {
    const auto idx = static_cast<std::size_t>(std::find(names.begin(), names.end(), metric) - names.begin());
    REQUIRE(idx < row.size());
    CHECK(row[idx] == "0");
  }
}

TEST_CASE("exit codes") {
  Sandbox box;
  CHECK(run("") == 2);
  CHECK(run("synth --bogus") == 2);
  CHECK(run("synth --classes 1 --out " + box / "x") == 2);
  REQUIRE(run("synth --classes 3 --out " + box / "s") == 0);
  CHECK(run("run --stream " + box / "s/stream.csv" + " --schemes kalman --out " + box / "r") == 2);
  CHECK(run("run --stream " + box / "s/stream.csv" + " --schemes od --out " + box / "r") == 2);

  {
    std::ofstream bad(box / "bad.csv");
    bad << "frame,ts_ms,true_class,y_hat,c_1,c_2,c_3\n0,0,1,1,0.9,0.05,oops\n";
  }
  CHECK(run("run --stream " + box / "bad.csv" + " --out " + box / "r") == 3);

  REQUIRE(run("run --stream " + box / "s/stream.csv" + " --schemes none --out " + box / "r") == 0);
  const auto rows = lines(box / "r/none.csv");
  {
    std::ofstream cut(box / "short.csv");
    for (std::size_t i = 0; i + 5 < rows.size(); ++i) cut << rows[i] << "\n";
  }
  CHECK(run("eval --timeline " + box / "s/timeline.csv" + " " + box / "short.csv") == 4);
  {
    std::ofstream skip(box / "skip.csv");
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != 10) skip << rows[i] << "\n";
  }
  CHECK(run("eval --timeline " + box / "s/timeline.csv" + " " + box / "skip.csv") == 4);

  {
    std::ofstream one(box / "one.csv");
    one << "label,a,b\n1,0.1,0.2\n1,0.3,0.1\n1,0.2,0.2\n";
  }
  CHECK(run("train --features " + box / "one.csv" + " --out " + box / "m") == 5);
}
