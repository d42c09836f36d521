// arb_lab: simulate ARB(1) trajectories, estimate the autocorrelation
// operator, run Monte Carlo rate/tail experiments and audit the finite-n
// perturbation bounds. All output is CSV; see README.md for the schemas.
//
// Every subcommand computes its full result in memory before touching the
// output directory, so a bad config or input never leaves partial files.

#include "arb/config.hpp"
#include "arb/diagnostics.hpp"
#include "arb/estimator.hpp"
#include "arb/io.hpp"
#include "arb/process.hpp"
#include "arb/wavelet.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace arb;

namespace {

struct Outputs {
  std::ostringstream& add(const std::string& name) {
    streams.emplace_back(name, std::make_unique<std::ostringstream>());
    return *streams.back().second;
  }

  void flush(const std::string& dir) {
    fs::create_directories(dir);
    for (auto& [name, os] : streams) {
      const fs::path p = fs::path(dir) / name;
      std::ofstream f(p, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
      f << os->str();
      if (!f) throw std::runtime_error("write failed for '" + p.string() + "'");
    }
  }

  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> streams;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  RunConfig load() const {
    RunConfig c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (out_dir) c.out_dir = *out_dir;
    return c;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "flat section.key = value config file")->required();
  sub->add_option("--seed", c.seed, "overrides simulation.seed");
  sub->add_option("--out", c.out_dir, "overrides output.dir");
}

int run_simulate(const Common& opts) {
  const RunConfig cfg = opts.load();
  const ARBModel model = make_model(cfg);
  const std::size_t burn_in = cfg.burn_in.value_or(model.default_burn_in());
  const Trajectory traj = simulate(model, static_cast<std::size_t>(cfg.n), burn_in, cfg.seed);

  Outputs out;
  io::write_trajectory(out.add("trajectory.csv"), traj, cfg.precision);
  out.add("model.cfg") << config_text(cfg);
  if (cfg.weights == "wavelet") {
    const auto basis = cfg.wavelet_basis();
    const wavelet::CoeffArray coeffs(traj.last(), basis.coarsest(), basis.finest());
    io::write_coefficients(out.add("last_coefficients.csv"), coeffs, cfg.precision);
    io::write_samples(out.add("last_samples.csv"), wavelet::idwt(coeffs, basis), cfg.precision);
  }
  out.flush(cfg.out_dir);
  std::cout << "simulate: n=" << traj.length() << " M=" << traj.dim() << " burn_in=" << burn_in
            << " seed=" << cfg.seed << " -> " << cfg.out_dir << '\n';
  return 0;
}

int run_estimate(const Common& opts, const std::string& trajectory_path) {
  const RunConfig cfg = opts.load();
  const Weights w = make_weights(cfg);
  const Trajectory traj = io::read_trajectory(trajectory_path);
  if (traj.dim() != w.size())
    throw contract_error("trajectory has " + std::to_string(traj.dim()) + " coordinates but the config has M = " +
                         std::to_string(w.size()));
  const TruncationRule rule = cfg.truncation();
  const RhoEstimate est = estimate_rho(traj, w, rule);
  const Element pred = predict(est, traj.last());

  Outputs out;
  io::write_vector(out.add("eigenvalues.csv"), est.eigs.values, "value", cfg.precision);
  io::write_matrix(out.add("eigenvectors.csv"), est.eigs.vectors, cfg.precision);
  io::write_matrix(out.add("rho_estimate.csv"), est.matrix, cfg.precision);
  io::write_vector(out.add("prediction.csv"), pred, "value", cfg.precision);
  auto& info = out.add("estimate.csv");
  info << "key,value\n"
       << "n," << est.n << '\n'
       << "k_n," << est.k << '\n'
       << "k_requested," << rule.requested(est.n) << '\n'
       << "rank," << est.eigs.rank << '\n'
       << "near_tie," << (est.eigs.near_tie ? 1 : 0) << '\n';
  out.add("estimate.cfg") << config_text(cfg) << "# trajectory = " << trajectory_path << '\n'
                          << "# rule = " << est.rule << '\n';
  out.flush(cfg.out_dir);
  if (est.eigs.near_tie)
    std::cerr << "arb_lab: warning: empirical eigenvalues nearly tie; eigenvector order and signs are unstable\n";
  std::cout << "estimate: n=" << est.n << " k_n=" << est.k << " rule=" << est.rule << '\n';
  return 0;
}

int run_experiment(const Common& opts) {
  const RunConfig cfg = opts.load();
  const ARBModel model = make_model(cfg);
  const ExperimentConfig ecfg = experiment_config(cfg);
  const auto results = run_replicates(model, ecfg);

  std::vector<RateReport> reports;
  for (Metric m : cfg.metrics) reports.push_back(summarize_rate(results, cfg.grid, m));
  double eta = 0.0;
  if (cfg.eta) {
    eta = *cfg.eta;
  } else {
    std::vector<double> first;
    for (const auto& r : results.front()) first.push_back(r.rho_op_b);
    eta = median(first);
  }
  const auto tail = summarize_tail(model, results, cfg.grid, eta);

  Outputs out;
  io::write_long_report(out.add("experiment_long.csv"), results, cfg.metrics, cfg.precision);
  for (const auto& rep : reports)
    io::write_summary(out.add(std::string("summary_") + to_string(rep.metric) + ".csv"), rep, cfg.precision);
  io::write_plot_summary(out.add("plot_summary.csv"), reports, cfg.precision);
  io::write_tail(out.add("tail.csv"), tail, cfg.precision);
  out.add("experiment.cfg") << config_text(cfg);
  out.flush(cfg.out_dir);
  for (const auto& rep : reports) {
    std::cout << to_string(rep.metric) << ": slope=";
    if (rep.fit)
      std::cout << rep.fit->slope << " r2=" << rep.fit->r2 << '\n';
    else
      std::cout << "NA\n";
  }
  return 0;
}

int run_audit(const Common& opts, const std::optional<std::string>& trajectory_path) {
  const RunConfig cfg = opts.load();
  const ARBModel model = make_model(cfg);
  const Weights& w = model.weights();
  const TruncationRule rule = cfg.truncation();
  const std::size_t burn_in = cfg.burn_in.value_or(model.default_burn_in());

  std::optional<Trajectory> given;
  if (trajectory_path) {
    given = io::read_trajectory(*trajectory_path);
    if (given->dim() != w.size())
      throw contract_error("trajectory has " + std::to_string(given->dim()) +
                           " coordinates but the config has M = " + std::to_string(w.size()));
  }
  const int reps = given ? 1 : cfg.audit_replicates;
  std::vector<BoundReport> reports(static_cast<std::size_t>(reps));
  parallel_for(reports.size(), cfg.threads, [&](std::size_t r) {
    EmpiricalMoments mom;
    if (given) {
      mom = empirical_moments(*given, w);
    } else if (cfg.perfect_moments) {
      mom = perfect_moments(model, cfg.n);
    } else {
      const auto traj = simulate(model, static_cast<std::size_t>(cfg.n), burn_in, derive_seed(cfg.seed, 0, r));
      mom = empirical_moments(traj, w);
    }
    const Eigen::Index k_n = select_truncation(spectral_decomposition(mom.covariance, w), mom.n, rule);
    AuditOptions ao;
    ao.n_min = cfg.audit_n_min;
    ao.probes = cfg.probes;
    ao.probe_seed = derive_seed(cfg.seed, 1, r);
    ao.replicate = static_cast<int>(r);
    reports[r] = inequality_audit(model, mom, k_n, ao);
  });

  Outputs out;
  io::write_audit(out.add("audit.csv"), reports, cfg.precision);
  io::write_audit_summary(out.add("audit_summary.csv"), reports, cfg.precision);
  out.add("audit.cfg") << config_text(cfg);
  out.flush(cfg.out_dir);
  std::cout << "audit: " << reps << " replicate(s), n=" << reports.front().n << " k_n=" << reports.front().k_n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARB(1) simulation, estimation and diagnostics"};
  app.require_subcommand(1);

  Common sim_opts, est_opts, exp_opts, aud_opts;
  std::string est_traj;
  std::optional<std::string> aud_traj;

  auto* sim = app.add_subcommand("simulate", "simulate a trajectory");
  add_common(sim, sim_opts);
  auto* est = app.add_subcommand("estimate", "estimate rho from a trajectory CSV");
  add_common(est, est_opts);
  est->add_option("--trajectory", est_traj, "trajectory CSV (i,f1..fM)")->required();
  auto* exp = app.add_subcommand("experiment", "Monte Carlo rate and tail experiment");
  add_common(exp, exp_opts);
  auto* aud = app.add_subcommand("audit", "audit the perturbation bounds");
  add_common(aud, aud_opts);
  aud->add_option("--trajectory", aud_traj, "audit this trajectory instead of simulating");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_opts);
    if (*est) return run_estimate(est_opts, est_traj);
    if (*exp) return run_experiment(exp_opts);
    if (*aud) return run_audit(aud_opts, aud_traj);
  } catch (const std::exception& e) {
    std::cerr << "arb_lab: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
