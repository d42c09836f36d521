#include "arb/config.hpp"
#include "arb/io.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace arb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("arb_lab_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Run {
  int code;
  std::string err;
};

Run lab(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(ARB_LAB_EXE) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

const std::string small_model = "model.M = 4\nmodel.rho = 0.5\nsimulation.n = 100\nsimulation.seed = 5\n";
const std::string reference_model =
    "model.M = 8\nmodel.ratio = 0.5\nmodel.rho = 0.5\nestimation.rule = log\nestimation.c1 = 0.5\n";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config_text(
      "# comment\nmodel.M = 8 # trailing\nexperiment.grid = 2^8, 1024\nsimulation.burn_in = auto\n"
      "estimation.rule = power\nestimation.theta = 0.3\n");
  CHECK(c.m == 8);
  CHECK(c.grid == std::vector<Eigen::Index>{256, 1024});
  CHECK_FALSE(c.burn_in);
  CHECK(c.truncation().kind == TruncationRule::Kind::Power);

  CHECK_THROWS_AS(parse_config_text("model.bogus = 1\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.M = 4\nmodel.M = 5\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.M = four\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("justtext\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("experiment.grid = 1024, 256\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.profile = bessel\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.weights = wavelet\nwavelet.beta = 0.5\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.weights = wavelet\nmodel.M = 10\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("model.M = 4\nmodel.rho = 0.1, 0.2\n"), config_error);
  try {
    parse_config_text("model.rho_max = 1.0\n");
    FAIL("expected an error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("stationarity") != std::string::npos);
  }
}

TEST_CASE("config echo round-trips") {
  const RunConfig c = parse_config_text(
      "model.weights = wavelet\nmodel.profile = bessel\nwavelet.J = 1\nwavelet.J_max = 2\nmodel.rho = 0.1\n"
      "experiment.eta = 0.25\nsimulation.seed = 123456789012345\n");
  const std::string text = config_text(c);
  const RunConfig back = parse_config_text(text);
  CHECK(config_text(back) == text);
  CHECK(back.m == 8);
  CHECK(back.seed == 123456789012345ULL);
}

TEST_CASE("csv round-trips are lossless") {
  const ARBModel m = make_model(parse_config_text(reference_model));
  const Trajectory tr = simulate(m, 50, 20, 1);
  std::stringstream ss;
  io::write_trajectory(ss, tr);
  CHECK(io::read_trajectory(ss).samples == tr.samples);

  std::stringstream sm;
  io::write_matrix(sm, m.rho() * 1.0 / 3.0);
  CHECK(io::read_matrix(sm) == m.rho() * 1.0 / 3.0);

  std::stringstream sv;
  const Eigen::VectorXd v = m.spectral().values() / 7.0;
  io::write_vector(sv, v);
  CHECK(io::read_vector(sv) == v);

  const wavelet::CoeffArray c(tr.row(3), 0, 2);
  std::stringstream sc;
  io::write_coefficients(sc, c);
  const auto back = io::read_coefficients(sc);
  CHECK(back.flat() == c.flat());
  CHECK(back.coarsest() == 0);
  CHECK(back.finest() == 2);
}

TEST_CASE("malformed csv rows name the line") {
  std::stringstream bad("i,f1,f2\n0,1,2\n1,3\n");
  try {
    io::read_trajectory(bad, "t.csv");
    FAIL("expected an error");
  } catch (const io::csv_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::stringstream nan("i,f1,f2\n0,1,2\n1,3,x\n");
  CHECK_THROWS_AS(io::read_trajectory(nan), io::csv_error);
}

TEST_CASE("simulate writes the trajectory and echo") {
  const fs::path dir = scratch("simulate");
  write(dir / "run.cfg", small_model);
  const Run r = lab("simulate --config " + (dir / "run.cfg").string() + " --out " + (dir / "a").string(), dir);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "a" / "trajectory.csv");
  CHECK(count_lines(csv) == 101);
  CHECK(lines_of(csv)[0] == "i,f1,f2,f3,f4");
  CHECK(fs::exists(dir / "a" / "model.cfg"));
  CHECK_NOTHROW(load_config((dir / "a" / "model.cfg").string()));

  REQUIRE(lab("simulate --config " + (dir / "run.cfg").string() + " --out " + (dir / "b").string(), dir).code == 0);
  CHECK(slurp(dir / "b" / "trajectory.csv") == csv);

  REQUIRE(lab("simulate --config " + (dir / "run.cfg").string() + " --seed 6 --out " + (dir / "c").string(), dir).code == 0);
  CHECK(slurp(dir / "c" / "trajectory.csv") != csv);
}

TEST_CASE("invalid config fails fast without output") {
  const fs::path dir = scratch("invalid");
  write(dir / "bad.cfg", small_model + "model.rho_max = 1.0\n");
  const Run r = lab("simulate --config " + (dir / "bad.cfg").string() + " --out " + (dir / "out").string(), dir);
  CHECK(r.code != 0);
  CHECK(r.err.find("stationarity") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  write(dir / "typo.cfg", small_model + "experiment.replicate = 3\n");
  const Run t = lab("experiment --config " + (dir / "typo.cfg").string() + " --out " + (dir / "out").string(), dir);
  CHECK(t.code != 0);
  CHECK(t.err.find("experiment.replicate") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  CHECK(lab("simulate --config " + (dir / "missing.cfg").string(), dir).code != 0);
  CHECK(lab("simulate", dir).code != 0);
}

TEST_CASE("estimate follows the truncation rule") {
  const fs::path dir = scratch("estimate");
  write(dir / "run.cfg", reference_model + "simulation.n = 4096\n");
  REQUIRE(lab("simulate --config " + (dir / "run.cfg").string() + " --out " + (dir / "sim").string(), dir).code == 0);
  const Run r = lab("estimate --config " + (dir / "run.cfg").string() + " --trajectory " +
                        (dir / "sim" / "trajectory.csv").string() + " --out " + (dir / "est").string(),
                    dir);
  REQUIRE(r.code == 0);
  for (const char* f : {"eigenvalues.csv", "eigenvectors.csv", "rho_estimate.csv", "prediction.csv", "estimate.csv"})
    CHECK(fs::exists(dir / "est" / f));
  const auto info = lines_of(slurp(dir / "est" / "estimate.csv"));
  CHECK(info[2] == "k_n,4");  // floor(0.5 ln 4096) = 4

  std::ifstream rho(dir / "est" / "rho_estimate.csv");
  const Eigen::MatrixXd est = io::read_matrix(rho);
  CHECK(est.rows() == 8);
  std::ifstream eig(dir / "est" / "eigenvalues.csv");
  CHECK(io::read_vector(eig).size() == 8);

  write(dir / "two.csv", "i,f1,f2,f3,f4,f5,f6,f7,f8\n0,1,0,0,0,0,0,0,0\n1,0,1,0,0,0,0,0,0\n");
  REQUIRE(lab("estimate --config " + (dir / "run.cfg").string() + " --trajectory " + (dir / "two.csv").string() +
                  " --out " + (dir / "two").string(),
              dir)
              .code == 0);
  CHECK(lines_of(slurp(dir / "two" / "estimate.csv"))[2] == "k_n,1");

  write(dir / "bad.csv", "i,f1,f2,f3,f4,f5,f6,f7,f8\n0,1,0,0,0,0,0,0,0\n1,0,1,0,0,0,0,0\n");
  const Run bad = lab("estimate --config " + (dir / "run.cfg").string() + " --trajectory " + (dir / "bad.csv").string() +
                          " --out " + (dir / "bad").string(),
                      dir);
  CHECK(bad.code != 0);
  CHECK(bad.err.find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "bad"));

  write(dir / "narrow.csv", "i,f1,f2\n0,1,0\n1,0,1\n");
  CHECK(lab("estimate --config " + (dir / "run.cfg").string() + " --trajectory " + (dir / "narrow.csv").string() +
                " --out " + (dir / "narrow").string(),
            dir)
            .code != 0);
}

TEST_CASE("experiment summaries") {
  const fs::path dir = scratch("experiment");
  write(dir / "run.cfg", reference_model + "experiment.grid = 256, 512, 1024\nexperiment.replicates = 5\n"
                                           "experiment.metrics = cov_hs\n");
  REQUIRE(lab("experiment --config " + (dir / "run.cfg").string() + " --out " + (dir / "a").string(), dir).code == 0);
  const auto summary = lines_of(slurp(dir / "a" / "summary_cov_hs.csv"));
  REQUIRE(summary.size() == 6);
  CHECK(summary[0] == "n,median_cov_hs");
  CHECK(summary[1].rfind("256,", 0) == 0);
  CHECK(summary[4].rfind("slope,", 0) == 0);
  CHECK(summary[5].rfind("r2,", 0) == 0);
  const auto longf = lines_of(slurp(dir / "a" / "experiment_long.csv"));
  CHECK(longf[0] == "n,replicate,metric,value");
  CHECK(longf.size() == 1 + 3 * 5 * 2);
  CHECK(fs::exists(dir / "a" / "plot_summary.csv"));
  CHECK(fs::exists(dir / "a" / "tail.csv"));

  // Thread count does not change a single byte.
  write(dir / "threads.cfg", slurp(dir / "run.cfg") + "experiment.threads = 3\n");
  REQUIRE(lab("experiment --config " + (dir / "threads.cfg").string() + " --out " + (dir / "b").string(), dir).code == 0);
  CHECK(slurp(dir / "a" / "experiment_long.csv") == slurp(dir / "b" / "experiment_long.csv"));
  CHECK(slurp(dir / "a" / "summary_cov_hs.csv") == slurp(dir / "b" / "summary_cov_hs.csv"));

  write(dir / "one.cfg", reference_model + "experiment.grid = 256, 1024\nexperiment.replicates = 1\n"
                                           "experiment.metrics = cov_hs\n");
  REQUIRE(lab("experiment --config " + (dir / "one.cfg").string() + " --out " + (dir / "c").string(), dir).code == 0);
  const auto one = lines_of(slurp(dir / "c" / "summary_cov_hs.csv"));
  const auto raw = lines_of(slurp(dir / "c" / "experiment_long.csv"));
  CHECK(one[1].substr(one[1].find(',') + 1) == raw[1].substr(raw[1].rfind(',') + 1));
  CHECK(one[3].find("NA") == std::string::npos);

  write(dir / "single.cfg", reference_model + "experiment.grid = 256\nexperiment.replicates = 3\n"
                                              "experiment.metrics = cov_hs\n");
  REQUIRE(lab("experiment --config " + (dir / "single.cfg").string() + " --out " + (dir / "d").string(), dir).code == 0);
  CHECK(lines_of(slurp(dir / "d" / "summary_cov_hs.csv"))[2] == "slope,NA");
}

TEST_CASE("audit subcommand") {
  const fs::path dir = scratch("audit");
  write(dir / "perfect.cfg", reference_model + "simulation.n = 4096\naudit.perfect_moments = true\naudit.replicates = 2\n"
                                               "estimation.c0 = 4\n");
  REQUIRE(lab("audit --config " + (dir / "perfect.cfg").string() + " --out " + (dir / "p").string(), dir).code == 0);
  const auto rows = lines_of(slurp(dir / "p" / "audit.csv"));
  CHECK(rows[0] == "n,replicate,k_n,record,lhs,rhs,holds,status");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",1,") != std::string::npos);

  write(dir / "ref.cfg", reference_model + "simulation.n = 4096\naudit.replicates = 5\n");
  REQUIRE(lab("audit --config " + (dir / "ref.cfg").string() + " --out " + (dir / "r").string(), dir).code == 0);
  const auto summary = lines_of(slurp(dir / "r" / "audit_summary.csv"));
  CHECK(summary[0] == "record,count,holds_rate,violated,informational");
  CHECK(summary[1] == "kernel_bound,5,1,0,0");

  write(dir / "early.cfg", reference_model + "simulation.n = 200\naudit.replicates = 3\naudit.n_min = 512\n");
  REQUIRE(lab("audit --config " + (dir / "early.cfg").string() + " --out " + (dir / "e").string(), dir).code == 0);
  const std::string early = slurp(dir / "e" / "audit.csv");
  for (const auto& line : lines_of(early))
    if (line.find("kernel_perturbation") != std::string::npos || line.find("eigenvector_perturbation") != std::string::npos)
      CHECK(line.find("informational") != std::string::npos);

  // A trajectory written by simulate is accepted back by audit.
  REQUIRE(lab("simulate --config " + (dir / "ref.cfg").string() + " --out " + (dir / "sim").string(), dir).code == 0);
  REQUIRE(lab("audit --config " + (dir / "ref.cfg").string() + " --trajectory " + (dir / "sim" / "trajectory.csv").string() +
                  " --out " + (dir / "t").string(),
              dir)
              .code == 0);
  CHECK(count_lines(slurp(dir / "t" / "audit.csv")) == 1 + 6);
}

TEST_CASE("shipped configs run") {
  const fs::path dir = scratch("configs");
  const std::string src = ARB_SOURCE_DIR;
  REQUIRE(lab("simulate --config " + src + "/configs/wavelet.cfg --out " + (dir / "w").string(), dir).code == 0);
  std::ifstream coeffs(dir / "w" / "last_coefficients.csv");
  const auto c = io::read_coefficients(coeffs);
  CHECK(c.size() == 16);
  CHECK(count_lines(slurp(dir / "w" / "last_samples.csv")) == 17);
  REQUIRE(lab("audit --config " + src + "/configs/reference.cfg --out " + (dir / "r").string(), dir).code == 0);
}
