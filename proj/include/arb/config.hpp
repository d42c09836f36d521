#pragma once

// Flat `section.key = value` run configuration: parsing, validation, echo,
// and construction of the model it describes.

#include "arb/core.hpp"
#include "arb/diagnostics.hpp"
#include "arb/estimator.hpp"
#include "arb/gelfand.hpp"
#include "arb/process.hpp"
#include "arb/rng.hpp"
#include "arb/wavelet.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace arb {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // model
  Eigen::Index m = 32;
  std::string weights = "uniform";    // uniform | wavelet
  std::string profile = "geometric";  // geometric | power | bessel
  double ratio = 0.5;
  double scale = 1.0;
  double exponent = 2.0;
  double gamma = 2.5;
  std::optional<double> bessel_c0;  // empty: largest c0 with C_m <= t_m^2 / 2
  std::vector<double> rho{0.5};     // one value (constant) or M values
  double rho_band = 0.0;
  double rho_max = 0.99;
  std::string basis = "canonical";  // canonical | rotated
  std::uint64_t basis_seed = 0;

  // wavelet
  int wavelet_j = 2;
  int wavelet_j_max = 3;
  double wavelet_beta = 1.0;
  std::string wavelet_family = "haar";
  int wavelet_filter = 2;

  // simulation
  Eigen::Index n = 1024;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 1;

  // estimation
  std::string rule = "log";  // log | power | fixed
  double c1 = 0.5;
  double c0 = 0.0;
  double theta = 0.5;
  Eigen::Index k = 1;

  // experiment
  std::vector<Eigen::Index> grid{256, 1024, 4096, 16384};
  int replicates = 30;
  std::vector<Metric> metrics{Metric::CovHS, Metric::CrossCovHS, Metric::EigSup, Metric::RhoOpB, Metric::PredictionB};
  std::optional<double> eta;  // empty: median rho_op_b error at the first grid point
  unsigned threads = 0;

  // audit
  Eigen::Index audit_n_min = 512;
  int audit_replicates = 10;
  bool perfect_moments = false;
  int probes = 1000;

  // output
  std::string out_dir = ".";
  int precision = 17;

  TruncationRule truncation() const {
    if (rule == "power") return TruncationRule::power(theta);
    if (rule == "fixed") return TruncationRule::fixed(k);
    return TruncationRule::log(c1, c0);
  }

  wavelet::Basis wavelet_basis() const {
    const auto fam = wavelet_family == "haar" ? wavelet::Family::Haar : wavelet::Family::Daubechies;
    return {fam, wavelet_filter, wavelet_j, wavelet_j_max};
  }
};

namespace detail_cfg {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] inline void fail(const std::string& key, const std::string& what) {
  throw config_error("config: " + key + ": " + what);
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) fail(key, "expected a number, got '" + v + "'");
  return out;
}

/// Integers; `2^k` is accepted as a power of two.
inline long long to_int(const std::string& key, const std::string& v) {
  if (const auto caret = v.find('^'); caret != std::string::npos) {
    const long long base = to_int(key, v.substr(0, caret));
    const long long ex = to_int(key, v.substr(caret + 1));
    if (ex < 0 || ex > 62) fail(key, "exponent out of range");
    long long r = 1;
    for (long long i = 0; i < ex; ++i) {
      if (r > (1LL << 62) / std::max(base, 1LL)) fail(key, "value overflows");
      r *= base;
    }
    return r;
  }
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) fail(key, "expected an integer, got '" + v + "'");
  return out;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) fail(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true/false, got '" + v + "'");
}

inline std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  fail(key, "'" + v + "' is not one of {" + list + "}");
}

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail_cfg

/// Parses and validates a configuration. Unknown keys, duplicates, malformed
/// values and inconsistent combinations are all rejected before anything runs.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "config") {
  using namespace detail_cfg;
  RunConfig c;
  std::map<std::string, std::string> seen;
  std::string line;
  int lineno = 0;
  bool m_given = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw config_error(where + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos) throw config_error(where + ": key '" + key + "' has no section");
    if (v.empty()) throw config_error(where + ": empty value for '" + key + "'");
    if (!seen.emplace(key, v).second) throw config_error(where + ": duplicate key '" + key + "'");

    if (key == "model.M") {
      c.m = to_int(key, v);
      m_given = true;
    } else if (key == "model.weights") c.weights = one_of(key, v, {"uniform", "wavelet"});
    else if (key == "model.profile") c.profile = one_of(key, v, {"geometric", "power", "bessel"});
    else if (key == "model.ratio") c.ratio = to_double(key, v);
    else if (key == "model.scale") c.scale = to_double(key, v);
    else if (key == "model.exponent") c.exponent = to_double(key, v);
    else if (key == "model.gamma") c.gamma = to_double(key, v);
    else if (key == "model.c0") {
      if (v != "auto") c.bessel_c0 = to_double(key, v);
    } else if (key == "model.rho") {
      c.rho.clear();
      for (const auto& part : split(v, ',')) c.rho.push_back(to_double(key, part));
    } else if (key == "model.rho_band") c.rho_band = to_double(key, v);
    else if (key == "model.rho_max") c.rho_max = to_double(key, v);
    else if (key == "model.basis") c.basis = one_of(key, v, {"canonical", "rotated"});
    else if (key == "model.basis_seed") c.basis_seed = to_u64(key, v);
    else if (key == "wavelet.J") c.wavelet_j = static_cast<int>(to_int(key, v));
    else if (key == "wavelet.J_max") c.wavelet_j_max = static_cast<int>(to_int(key, v));
    else if (key == "wavelet.beta") c.wavelet_beta = to_double(key, v);
    else if (key == "wavelet.family") c.wavelet_family = one_of(key, v, {"haar", "daubechies"});
    else if (key == "wavelet.filter_length") c.wavelet_filter = static_cast<int>(to_int(key, v));
    else if (key == "simulation.n") c.n = to_int(key, v);
    else if (key == "simulation.burn_in") {
      if (v != "auto") {
        const auto b = to_int(key, v);
        if (b < 0) fail(key, "must be >= 0");
        c.burn_in = static_cast<std::size_t>(b);
      }
    } else if (key == "simulation.seed") c.seed = to_u64(key, v);
    else if (key == "estimation.rule") c.rule = one_of(key, v, {"log", "power", "fixed"});
    else if (key == "estimation.c1") c.c1 = to_double(key, v);
    else if (key == "estimation.c0") c.c0 = to_double(key, v);
    else if (key == "estimation.theta") c.theta = to_double(key, v);
    else if (key == "estimation.k") c.k = to_int(key, v);
    else if (key == "experiment.grid") {
      c.grid.clear();
      for (const auto& part : split(v, ',')) c.grid.push_back(to_int(key, part));
    } else if (key == "experiment.replicates") c.replicates = static_cast<int>(to_int(key, v));
    else if (key == "experiment.metrics") {
      c.metrics.clear();
      for (const auto& part : split(v, ',')) {
        const auto m = metric_from_string(part);
        if (!m) fail(key, "unknown metric '" + part + "'");
        c.metrics.push_back(*m);
      }
    } else if (key == "experiment.eta") {
      if (v != "auto") c.eta = to_double(key, v);
    } else if (key == "experiment.threads") {
      const auto t = to_int(key, v);
      if (t < 0) fail(key, "must be >= 0");
      c.threads = static_cast<unsigned>(t);
    } else if (key == "audit.n_min") c.audit_n_min = to_int(key, v);
    else if (key == "audit.replicates") c.audit_replicates = static_cast<int>(to_int(key, v));
    else if (key == "audit.perfect_moments") c.perfect_moments = to_bool(key, v);
    else if (key == "audit.probes") c.probes = static_cast<int>(to_int(key, v));
    else if (key == "output.dir") c.out_dir = v;
    else if (key == "output.precision") c.precision = static_cast<int>(to_int(key, v));
    else throw config_error(where + ": unknown key '" + key + "'");
  }

  // Cross-field checks.
  if (c.weights == "wavelet") {
    if (c.wavelet_j < 0 || c.wavelet_j_max < c.wavelet_j || c.wavelet_j_max > 12)
      fail("wavelet.J", "need 0 <= J <= J_max <= 12");
    if (!(c.wavelet_beta > 0.5)) fail("wavelet.beta", "must exceed 1/2");
    const Eigen::Index grid_m = Eigen::Index{1} << (c.wavelet_j_max + 1);
    if (m_given && c.m != grid_m) fail("model.M", "must equal 2^(J_max+1) = " + std::to_string(grid_m) + " for wavelet weights");
    c.m = grid_m;
    try {
      (void)c.wavelet_basis();
    } catch (const contract_error& e) {
      fail("wavelet", e.what());
    }
  } else if (c.profile == "bessel") {
    fail("model.profile", "bessel eigenvalues need model.weights = wavelet");
  }
  if (c.m < 2 || c.m > 4096) fail("model.M", "must lie in [2, 4096]");
  if (c.profile == "geometric" && !(c.ratio > 0.0 && c.ratio < 1.0)) fail("model.ratio", "must lie in (0,1)");
  if (!(c.scale > 0.0)) fail("model.scale", "must be positive");
  if (c.profile == "power" && !(c.exponent > 0.0)) fail("model.exponent", "must be positive");
  if (c.profile == "bessel" && !(c.gamma > 0.0)) fail("model.gamma", "must be positive");
  if (c.bessel_c0 && !(*c.bessel_c0 > 0.0)) fail("model.c0", "must be positive");
  if (c.rho.size() != 1 && static_cast<Eigen::Index>(c.rho.size()) != c.m)
    fail("model.rho", "give one value or M = " + std::to_string(c.m) + " values");
  if (!(c.rho_max < 1.0))
    fail("model.rho_max", "stationarity condition ||rho^j0||_L(B) < 1 requires rho_max < 1 (got " + fmt(c.rho_max) + ")");
  for (double r : c.rho)
    if (!(std::abs(r) <= c.rho_max))
      fail("model.rho", "stationarity condition violated: |rho_j| = " + fmt(std::abs(r)) + " exceeds rho_max = " + fmt(c.rho_max));
  if (c.n < 2) fail("simulation.n", "must be >= 2");
  if (c.rule == "log" && !(c.c1 > 0.0)) fail("estimation.c1", "must be positive");
  if (c.rule == "power" && !(c.theta > 0.0 && c.theta < 1.0)) fail("estimation.theta", "must lie in (0,1)");
  if (c.rule == "fixed" && (c.k < 1 || c.k > c.m)) fail("estimation.k", "must lie in [1, M]");
  if (c.grid.empty()) fail("experiment.grid", "must not be empty");
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (c.grid[i] < 2) fail("experiment.grid", "values must be >= 2");
    if (i > 0 && c.grid[i] <= c.grid[i - 1]) fail("experiment.grid", "must be strictly increasing");
  }
  if (c.replicates < 1) fail("experiment.replicates", "must be >= 1");
  if (c.metrics.empty()) fail("experiment.metrics", "must not be empty");
  if (c.eta && !(*c.eta > 0.0)) fail("experiment.eta", "must be positive");
  if (c.audit_n_min < 2) fail("audit.n_min", "must be >= 2");
  if (c.audit_replicates < 1) fail("audit.replicates", "must be >= 1");
  if (c.probes < 1) fail("audit.probes", "must be >= 1");
  if (c.precision < 1 || c.precision > 17) fail("output.precision", "must lie in [1, 17]");
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

/// Fully resolved configuration in the same flat syntax; parse_config accepts it back.
inline std::string config_text(const RunConfig& c) {
  using detail_cfg::fmt;
  std::ostringstream os;
  auto list_d = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + fmt(x);
    return s;
  };
  os << "model.M = " << c.m << '\n'
     << "model.weights = " << c.weights << '\n'
     << "model.profile = " << c.profile << '\n'
     << "model.ratio = " << fmt(c.ratio) << '\n'
     << "model.scale = " << fmt(c.scale) << '\n'
     << "model.exponent = " << fmt(c.exponent) << '\n'
     << "model.gamma = " << fmt(c.gamma) << '\n'
     << "model.c0 = " << (c.bessel_c0 ? fmt(*c.bessel_c0) : "auto") << '\n'
     << "model.rho = " << list_d(c.rho) << '\n'
     << "model.rho_band = " << fmt(c.rho_band) << '\n'
     << "model.rho_max = " << fmt(c.rho_max) << '\n'
     << "model.basis = " << c.basis << '\n'
     << "model.basis_seed = " << c.basis_seed << '\n'
     << "wavelet.J = " << c.wavelet_j << '\n'
     << "wavelet.J_max = " << c.wavelet_j_max << '\n'
     << "wavelet.beta = " << fmt(c.wavelet_beta) << '\n'
     << "wavelet.family = " << c.wavelet_family << '\n'
     << "wavelet.filter_length = " << c.wavelet_filter << '\n'
     << "simulation.n = " << c.n << '\n'
     << "simulation.burn_in = " << (c.burn_in ? std::to_string(*c.burn_in) : "auto") << '\n'
     << "simulation.seed = " << c.seed << '\n'
     << "estimation.rule = " << c.rule << '\n'
     << "estimation.c1 = " << fmt(c.c1) << '\n'
     << "estimation.c0 = " << fmt(c.c0) << '\n'
     << "estimation.theta = " << fmt(c.theta) << '\n'
     << "estimation.k = " << c.k << '\n';
  std::string grid, metrics;
  for (auto g : c.grid) grid += (grid.empty() ? "" : ",") + std::to_string(g);
  for (auto m : c.metrics) metrics += std::string(metrics.empty() ? "" : ",") + to_string(m);
  os << "experiment.grid = " << grid << '\n'
     << "experiment.replicates = " << c.replicates << '\n'
     << "experiment.metrics = " << metrics << '\n'
     << "experiment.eta = " << (c.eta ? fmt(*c.eta) : "auto") << '\n'
     << "experiment.threads = " << c.threads << '\n'
     << "audit.n_min = " << c.audit_n_min << '\n'
     << "audit.replicates = " << c.audit_replicates << '\n'
     << "audit.perfect_moments = " << (c.perfect_moments ? "true" : "false") << '\n'
     << "audit.probes = " << c.probes << '\n'
     << "output.dir = " << c.out_dir << '\n'
     << "output.precision = " << c.precision << '\n';
  return os.str();
}

/// Weights described by the config (normalized Besov weights for wavelet runs).
inline Weights make_weights(const RunConfig& c) {
  if (c.weights == "wavelet") return wavelet::besov_weights(c.wavelet_j, c.wavelet_j_max, c.wavelet_beta).normalized;
  return Weights::uniform(c.m);
}

/// Largest c0 for which the Bessel eigenvalues satisfy C_m <= t_m^2 / 2 in the
/// canonical frame, so that the RKHS norm dominates the H~* norm.
inline double bessel_auto_c0(const Weights& w, const wavelet::Basis& basis, double gamma) {
  const Eigen::VectorXd shape = wavelet::bessel_eigen_profile(gamma, basis, 1.0);
  return 0.5 * (w.t().array().square() / shape.array()).minCoeff();
}

inline ARBModel make_model(const RunConfig& c) {
  const Weights w = make_weights(c);
  ModelSpec spec;
  if (c.profile == "geometric") spec.eigenvalues = geometric_profile(c.m, c.ratio, c.scale);
  else if (c.profile == "power") spec.eigenvalues = power_profile(c.m, c.exponent, c.scale);
  else {
    const auto basis = c.wavelet_basis();
    const double c0 = c.bessel_c0.value_or(bessel_auto_c0(w, basis, c.gamma));
    spec.eigenvalues = wavelet::bessel_eigen_profile(c.gamma, basis, c0);
  }
  spec.rho = c.rho.size() == 1 ? Eigen::VectorXd::Constant(c.m, c.rho[0])
                               : Eigen::Map<const Eigen::VectorXd>(c.rho.data(), c.m).eval();
  if (c.rho_band != 0.0) spec.band = Eigen::VectorXd::Constant(c.m - 1, c.rho_band);
  if (c.basis == "rotated") {
    Engine eng(c.basis_seed);
    spec.basis = random_orthonormal_basis(w, eng);
  }
  spec.rho_max = c.rho_max;
  return ARBModel(w, std::move(spec));
}

inline ExperimentConfig experiment_config(const RunConfig& c) {
  ExperimentConfig e;
  e.grid = c.grid;
  e.replicates = c.replicates;
  e.master_seed = c.seed;
  e.burn_in = c.burn_in;
  e.rule = c.truncation();
  e.threads = c.threads;
  return e;
}

}  // namespace arb
