#pragma once

// Spectral-gap constants, operator norms, kernel sup-distances, finite-n
// audits of the eigenvector/kernel perturbation bounds, and the Monte Carlo
// rate and tail experiments.

#include "arb/core.hpp"
#include "arb/estimator.hpp"
#include "arb/gelfand.hpp"
#include "arb/process.hpp"
#include "arb/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace arb {

// ---------------------------------------------------------------------------
// Spectral constants

/// (C_j - C_{j+1})^{-1} for 0-based j; the eigenvalue past the last one is
/// taken as 0, matching the zero tail of a finite-rank operator.
inline double inverse_gap(const Eigen::VectorXd& c, Eigen::Index j) {
  const double next = (j + 1 < c.size()) ? c[j + 1] : 0.0;
  return 1.0 / (c[j] - next);
}

/// a_j (0-based): 2 sqrt2 / (C_1 - C_2) for j = 0, else 2 sqrt2 max of the two adjacent inverse gaps.
inline double gap_constant(const Eigen::VectorXd& c, Eigen::Index j) {
  const double k = 2.0 * std::sqrt(2.0);
  if (j == 0) return k * inverse_gap(c, 0);
  return k * std::max(inverse_gap(c, j - 1), inverse_gap(c, j));
}

/// Lambda_k = max_{j <= k} (C_j - C_{j+1})^{-1}.
inline double max_inverse_gap(const Eigen::VectorXd& c, Eigen::Index k) {
  double out = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) out = std::max(out, inverse_gap(c, j));
  return out;
}

inline double sum_gap_constants(const Eigen::VectorXd& c, Eigen::Index k) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) s += gap_constant(c, j);
  return s;
}

struct ConstantsReport {
  Eigen::Index k = 0;
  Eigen::VectorXd a;    // a_1 .. a_{M-1}
  double lambda_k = 0;  // Lambda_k
  Eigen::VectorXd n_m;  // N_m = sum_j Phi_{m,j}^2
  double n_max = 0;     // N
  double v = 0;         // V = max_j ||phi_j||_B

  // Links of the ordering k < C_k^-1 < (C_k - C_{k+1})^-1 < a_k < Lambda_k < sum a_j.
  bool k_lt_inv_ck = false;
  bool inv_ck_lt_inv_gap = false;  // forced
  bool inv_gap_lt_ak = false;      // forced
  bool ak_lt_lambda = false;       // reported only; fails for geometric decay
  bool lambda_le_sum_a = false;
};

inline ConstantsReport spectral_constants(const SpectralModel& model, const Weights& w, Eigen::Index k) {
  const auto m = model.size();
  detail::require_same_size(m, w.size(), "spectral_constants");
  detail::require(k >= 1 && k <= m - 1, "spectral_constants: k must lie in [1, M-1]");
  const Eigen::VectorXd& c = model.values();
  ConstantsReport r;
  r.k = k;
  r.a.resize(m - 1);
  for (Eigen::Index j = 0; j < m - 1; ++j) r.a[j] = gap_constant(c, j);
  r.lambda_k = max_inverse_gap(c, k);
  r.n_m = model.vectors().rowwise().squaredNorm();
  r.n_max = r.n_m.maxCoeff();
  r.v = model.vectors().cwiseAbs().maxCoeff();

  const double inv_ck = 1.0 / c[k - 1];
  const double inv_gap = inverse_gap(c, k - 1);
  const double ak = r.a[k - 1];
  r.k_lt_inv_ck = static_cast<double>(k) < inv_ck;
  r.inv_ck_lt_inv_gap = inv_ck < inv_gap;
  r.inv_gap_lt_ak = inv_gap < ak;
  r.ak_lt_lambda = ak < r.lambda_k;
  r.lambda_le_sum_a = r.lambda_k <= r.a.head(k).sum();
  return r;
}

// ---------------------------------------------------------------------------
// Operator norms

struct OperatorNorms {
  double hs = 0;    // Hilbert-Schmidt norm on H~
  double op_h = 0;  // operator norm on H~
  double op_b = 0;  // operator norm on B (max abs row sum of the coefficient matrix)
};

inline double op_norm_h(const LinOp& a, const Weights& w) {
  const Eigen::MatrixXd s = symmetrized(a, w);
  if (s.isZero(0.0)) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
  return svd.singularValues()[0];
}

inline double hs_norm(const LinOp& a, const Weights& w) { return symmetrized(a, w).norm(); }

inline OperatorNorms operator_norms(const LinOp& a, const Weights& w) {
  return {hs_norm(a, w), op_norm_h(a, w), op_norm_b(a)};
}

// ---------------------------------------------------------------------------
// Covariance kernels c(F_k, F_l)

/// K_{kl} = sum_j C_j Phi_{k,j} Phi_{l,j}
inline Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
  return vectors * values.asDiagonal() * vectors.transpose();
}

inline Eigen::MatrixXd kernel_matrix(const SpectralModel& m) { return kernel_matrix(m.values(), m.vectors()); }
inline Eigen::MatrixXd kernel_matrix(const Eigensystem& e) { return kernel_matrix(e.values, e.vectors); }

/// Kernel of a coefficient-space covariance operator C = K T.
inline Eigen::MatrixXd kernel_matrix(const LinOp& c, const Weights& w) {
  return c * w.t().cwiseInverse().asDiagonal();
}

/// ||c||_{B x B} = sup_{k,l} |c(F_k, F_l)|
inline double kernel_sup_norm(const Eigen::MatrixXd& k) { return k.cwiseAbs().maxCoeff(); }

inline double kernel_sup_distance(const SpectralModel& truth, const Eigensystem& emp, const Weights& w) {
  detail::require_same_size(truth.size(), w.size(), "kernel_sup_distance");
  detail::require_same_size(emp.size(), w.size(), "kernel_sup_distance");
  return kernel_sup_norm(kernel_matrix(truth) - kernel_matrix(emp));
}

inline double kernel_sup_distance(const LinOp& truth, const Eigensystem& emp, const Weights& w) {
  detail::require(truth.rows() == w.size() && truth.cols() == w.size(), "kernel_sup_distance: dimension mismatch");
  detail::require_same_size(emp.size(), w.size(), "kernel_sup_distance");
  return kernel_sup_norm(kernel_matrix(truth, w) - kernel_matrix(emp));
}

struct KernelBoundCheck {
  double lhs;  // ||c||_{B x B}
  double rhs;  // N ||C||_{L(H~)}
  bool holds;
};

inline KernelBoundCheck kernel_bound(const SpectralModel& model) {
  const double lhs = kernel_sup_norm(kernel_matrix(model));
  const double n = model.vectors().rowwise().squaredNorm().maxCoeff();
  const double rhs = n * model.values()[0];
  return {lhs, rhs, lhs <= rhs * (1.0 + 1e-12)};
}

// ---------------------------------------------------------------------------
// Inequality audits

enum class AuditStatus { Holds, Violated, Informational };

inline const char* to_string(AuditStatus s) {
  switch (s) {
    case AuditStatus::Holds: return "holds";
    case AuditStatus::Violated: return "violated";
    case AuditStatus::Informational: return "informational";
  }
  return "?";
}

struct BoundRecord {
  std::string name;
  Eigen::Index n = 0;
  int replicate = 0;
  double lhs = 0;
  double rhs = 0;
  bool holds = false;
  AuditStatus status = AuditStatus::Informational;
};

struct BoundReport {
  Eigen::Index n = 0;
  Eigen::Index k_n = 0;
  int replicate = 0;
  std::vector<BoundRecord> records;
  double k1 = 0;  // min <C_n v, v> / <C v, v> over probes
  double k2 = 0;  // max of the same ratio

  const BoundRecord* find(const std::string& name) const {
    for (const auto& r : records)
      if (r.name == name) return &r;
    return nullptr;
  }
};

struct AuditOptions {
  Eigen::Index n_min = 512;
  int probes = 1000;
  std::uint64_t probe_seed = 0;
  int replicate = 0;
  double slack = 1e-12;  // absolute slack on lhs <= rhs
};

/// Finite-n instance of the kernel and eigenvector perturbation bounds,
/// the norm-equivalence constants K1, K2 and the truncation defects of rho.
inline BoundReport inequality_audit(const ARBModel& model, const EmpiricalMoments& mom, Eigen::Index k_n,
                                    const AuditOptions& opt = {}) {
  const Weights& w = model.weights();
  const SpectralModel& truth = model.spectral();
  const auto m = model.size();
  const Eigensystem eigs = align(spectral_decomposition(mom.covariance, w), truth, w);
  detail::require(k_n >= 1 && k_n <= m, "inequality_audit: k_n out of range");
  if (k_n > eigs.rank) throw model_error("inequality_audit: k_n exceeds the numerical rank");

  const LinOp& c = model.covariance();
  const LinOp diff = c - mom.covariance;
  const double c_minus_cn_l = op_norm_h(diff, w);
  const double c_minus_cn_s = hs_norm(diff, w);
  const double c_l = truth.values()[0];
  const double cn_l = eigs.values[0];
  const double c_s = hs_norm(c, w);
  const Eigen::MatrixXd& phi = truth.vectors();
  const double n_big = phi.rowwise().squaredNorm().maxCoeff();
  const double v_big = phi.cwiseAbs().maxCoeff();
  const double sup_f = eigs.aligned->cwiseAbs().maxCoeff();
  const double lambda = max_inverse_gap(truth.values(), k_n);
  const double ck = truth.values()[k_n - 1];

  const Eigen::MatrixXd delta = eigs.vectors - *eigs.aligned;
  double tail = 0.0;
  for (Eigen::Index j = k_n; j < m; ++j) tail += std::pow(norm(delta.col(j), w, Space::Htilde), 2);
  double head_h = 0.0;
  double head_b = 0.0;
  for (Eigen::Index j = 0; j < k_n; ++j) {
    head_h = std::max(head_h, norm(delta.col(j), w, Space::Htilde));
    head_b = std::max(head_b, norm(delta.col(j), w, Space::B));
  }

  const bool asymptotic_info = mom.n < opt.n_min;
  auto make = [&](std::string name, double lhs, double rhs, bool asymptotic) {
    BoundRecord r;
    r.name = std::move(name);
    r.n = mom.n;
    r.replicate = opt.replicate;
    r.lhs = lhs;
    r.rhs = rhs;
    r.holds = lhs <= rhs + opt.slack;
    if (asymptotic && asymptotic_info)
      r.status = AuditStatus::Informational;
    else
      r.status = r.holds ? AuditStatus::Holds : AuditStatus::Violated;
    return r;
  };

  BoundReport rep;
  rep.n = mom.n;
  rep.k_n = k_n;
  rep.replicate = opt.replicate;

  const auto kb = kernel_bound(truth);
  rep.records.push_back(make("kernel_bound", kb.lhs, kb.rhs, false));

  const double kernel_lhs = kernel_sup_norm(kernel_matrix(truth) - kernel_matrix(eigs));
  const double root = std::sqrt(static_cast<double>(k_n) * 8.0 * lambda * lambda * c_minus_cn_l * c_minus_cn_l + tail);
  const double kernel_rhs =
      std::max(n_big, std::sqrt(n_big)) *
      (c_minus_cn_l + 2.0 * std::max(std::sqrt(c_l), std::sqrt(std::max(cn_l, 0.0))) * sup_f * root);
  rep.records.push_back(make("kernel_perturbation", kernel_lhs, kernel_rhs, true));

  const double vec_rhs = (2.0 / ck) * (kernel_rhs + head_h * n_big * c_s + v_big * c_minus_cn_s);
  rep.records.push_back(make("eigenvector_perturbation", head_b, vec_rhs, true));

  // K1, K2 over random probes in span{phi_1..phi_k}
  Engine eng(opt.probe_seed);
  std::normal_distribution<double> gauss;
  const auto phik = phi.leftCols(k_n);
  const Eigen::MatrixXd tc = w.t().asDiagonal() * c;
  const Eigen::MatrixXd tcn = w.t().asDiagonal() * mom.covariance;
  double k1 = std::numeric_limits<double>::infinity();
  double k2 = 0.0;
  Eigen::VectorXd z(k_n);
  for (int p = 0; p < opt.probes; ++p) {
    for (Eigen::Index i = 0; i < k_n; ++i) z[i] = gauss(eng);
    const Eigen::VectorXd v = phik * z;
    const double ratio = v.dot(tcn * v) / v.dot(tc * v);
    k1 = std::min(k1, ratio);
    k2 = std::max(k2, ratio);
  }
  rep.k1 = k1;
  rep.k2 = k2;
  BoundRecord eq = make("norm_equivalence", k1, k2, true);
  eq.holds = k1 > 0.0 && k1 <= k2;
  if (eq.status != AuditStatus::Informational) eq.status = eq.holds ? AuditStatus::Holds : AuditStatus::Violated;
  rep.records.push_back(eq);

  const LinOp& rho = model.rho();
  const LinOp pk = projection_matrix(phi, k_n, w);
  const LinOp pn = projection_matrix(eigs.vectors, k_n, w);
  BoundRecord a3 = make("projection_defect_true", op_norm_b(rho - pk * rho), 0.0, true);
  a3.status = AuditStatus::Informational;
  rep.records.push_back(a3);
  BoundRecord r7 = make("projection_defect_empirical", op_norm_b(rho - pn * rho * pn), 0.0, true);
  r7.status = AuditStatus::Informational;
  rep.records.push_back(r7);
  return rep;
}

inline BoundReport inequality_audit(const ARBModel& model, const Trajectory& traj, Eigen::Index k_n,
                                    const AuditOptions& opt = {}) {
  return inequality_audit(model, empirical_moments(traj, model.weights()), k_n, opt);
}

/// Moments replaced by their theoretical values (C_n := C, D_n := D).
inline EmpiricalMoments perfect_moments(const ARBModel& model, Eigen::Index n) {
  return {model.covariance(), model.cross_covariance(), n};
}

// ---------------------------------------------------------------------------
// Monte Carlo experiments

/// Runs body(i) for i in [0, count) over up to `threads` workers. Results must
/// be written to per-index slots so the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

enum class Metric { CovHS, CrossCovHS, EigSup, RhoOpB, PredictionB, NaivePredictionB, EigSupScaled };

inline constexpr Metric kAllMetrics[] = {Metric::CovHS,       Metric::CrossCovHS,       Metric::EigSup,
                                         Metric::RhoOpB,      Metric::PredictionB,      Metric::NaivePredictionB,
                                         Metric::EigSupScaled};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::CovHS: return "cov_hs";
    case Metric::CrossCovHS: return "crosscov_hs";
    case Metric::EigSup: return "eig_sup";
    case Metric::RhoOpB: return "rho_op_b";
    case Metric::PredictionB: return "prediction_b";
    case Metric::NaivePredictionB: return "naive_prediction_b";
    case Metric::EigSupScaled: return "eig_sup_scaled";
  }
  return "?";
}

inline std::optional<Metric> metric_from_string(const std::string& s) {
  for (Metric m : kAllMetrics)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct ReplicateResult {
  Eigen::Index n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  Eigen::Index k_n = 0;
  double cov_hs = 0;              // ||C_n - C||_S
  double crosscov_hs = 0;         // ||D_n - D||_S
  double eig_sup = 0;             // max_j |C_{n,j} - C_j|
  double rho_op_b = 0;            // ||rho~ - rho||_L(B)
  double prediction_b = 0;        // ||rho~(X_n) - rho(X_n)||_B
  double naive_prediction_b = 0;  // ||rho(X_n)||_B, error of predicting zero

  double get(Metric m) const {
    switch (m) {
      case Metric::CovHS: return cov_hs;
      case Metric::CrossCovHS: return crosscov_hs;
      case Metric::EigSup: return eig_sup;
      case Metric::RhoOpB: return rho_op_b;
      case Metric::PredictionB: return prediction_b;
      case Metric::NaivePredictionB: return naive_prediction_b;
      case Metric::EigSupScaled: {
        const double dn = static_cast<double>(n);
        return std::sqrt(dn / std::log(dn)) * eig_sup;
      }
    }
    return 0.0;
  }
};

struct ExperimentConfig {
  std::vector<Eigen::Index> grid;
  int replicates = 30;
  std::uint64_t master_seed = 1;
  std::optional<std::size_t> burn_in;
  TruncationRule rule = TruncationRule::log(0.5);
  unsigned threads = 0;
};

inline void validate(const ExperimentConfig& cfg) {
  detail::require(!cfg.grid.empty(), "experiment: empty n-grid");
  detail::require(cfg.replicates >= 1, "experiment: need at least one replicate");
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    detail::require(cfg.grid[i] >= 2, "experiment: grid values must be >= 2");
    if (i > 0) detail::require(cfg.grid[i] > cfg.grid[i - 1], "experiment: n-grid must be strictly increasing");
  }
}

inline ReplicateResult run_replicate(const ARBModel& model, Eigen::Index n, std::size_t burn_in, std::uint64_t seed,
                                     const TruncationRule& rule) {
  const Weights& w = model.weights();
  const Trajectory traj = simulate(model, static_cast<std::size_t>(n), burn_in, seed);
  const EmpiricalMoments mom = empirical_moments(traj, w);
  const Eigensystem eigs = spectral_decomposition(mom.covariance, w);
  ReplicateResult r;
  r.n = n;
  r.seed = seed;
  r.cov_hs = hs_norm(mom.covariance - model.covariance(), w);
  r.crosscov_hs = hs_norm(mom.cross_covariance - model.cross_covariance(), w);
  r.eig_sup = (eigs.values - model.spectral().values()).cwiseAbs().maxCoeff();
  r.k_n = select_truncation(eigs, n, rule);
  const LinOp est = component_estimator(mom.cross_covariance, eigs, r.k_n, w);
  r.rho_op_b = op_norm_b(est - model.rho());
  const Element x = traj.last();
  const Element truth = model.rho() * x;
  r.prediction_b = norm(Element(est * x - truth), w, Space::B);
  r.naive_prediction_b = norm(truth, w, Space::B);
  return r;
}

/// results[g][r] for grid point g and replicate r.
inline std::vector<std::vector<ReplicateResult>> run_replicates(const ARBModel& model, const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t burn_in = cfg.burn_in.value_or(model.default_burn_in());
  const auto g = cfg.grid.size();
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<ReplicateResult>> out(g, std::vector<ReplicateResult>(reps));
  parallel_for(g * reps, cfg.threads, [&](std::size_t idx) {
    const std::size_t gi = idx / reps;
    const std::size_t ri = idx % reps;
    const std::uint64_t seed = derive_seed(cfg.master_seed, gi, ri);
    ReplicateResult r = run_replicate(model, cfg.grid[gi], burn_in, seed, cfg.rule);
    r.replicate = static_cast<int>(ri);
    out[gi][ri] = r;
  });
  return out;
}

inline double median(std::vector<double> v) {
  detail::require(!v.empty(), "median of an empty sample");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

inline std::optional<LineFit> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || x.size() != y.size()) return std::nullopt;
  const double nx = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nx;
  my /= nx;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) return std::nullopt;
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// log sqrt(ln n / n), the abscissa of the rate fit.
inline double log_rate(Eigen::Index n) {
  const double dn = static_cast<double>(n);
  return 0.5 * (std::log(std::log(dn)) - std::log(dn));
}

struct RateReport {
  Metric metric = Metric::CovHS;
  std::vector<Eigen::Index> grid;
  std::vector<double> medians;
  std::optional<LineFit> fit;  // empty with a single grid point or a zero median
};

inline RateReport summarize_rate(const std::vector<std::vector<ReplicateResult>>& results,
                                 const std::vector<Eigen::Index>& grid, Metric metric) {
  RateReport rep;
  rep.metric = metric;
  rep.grid = grid;
  std::vector<double> xs, ys;
  bool loggable = true;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> vals;
    vals.reserve(results[g].size());
    for (const auto& r : results[g]) vals.push_back(r.get(metric));
    const double med = median(std::move(vals));
    rep.medians.push_back(med);
    if (!(med > 0)) loggable = false;
    xs.push_back(log_rate(grid[g]));
    ys.push_back(std::log(med));
  }
  if (loggable) rep.fit = least_squares(xs, ys);
  return rep;
}

inline std::vector<RateReport> rate_experiment(const ARBModel& model, const ExperimentConfig& cfg,
                                               const std::vector<Metric>& tracked) {
  const auto results = run_replicates(model, cfg);
  std::vector<RateReport> out;
  for (Metric m : tracked) out.push_back(summarize_rate(results, cfg.grid, m));
  return out;
}

struct TailRow {
  Eigen::Index n = 0;
  double eta = 0;
  double frequency = 0;     // fraction of replicates with ||rho~ - rho||_L(B) >= eta
  Eigen::Index k_n = 0;     // median truncation level
  double shape_proxy = 0;   // C_k^-1 k sum_{j<=k} a_j
};

inline std::vector<TailRow> summarize_tail(const ARBModel& model,
                                           const std::vector<std::vector<ReplicateResult>>& results,
                                           const std::vector<Eigen::Index>& grid, double eta) {
  detail::require(eta > 0.0, "tail_experiment: eta must be positive");
  std::vector<TailRow> rows;
  const Eigen::VectorXd& c = model.spectral().values();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TailRow row;
    row.n = grid[g];
    row.eta = eta;
    std::size_t hits = 0;
    std::vector<Eigen::Index> ks;
    for (const auto& r : results[g]) {
      if (r.rho_op_b >= eta) ++hits;
      ks.push_back(r.k_n);
    }
    row.frequency = static_cast<double>(hits) / static_cast<double>(results[g].size());
    std::nth_element(ks.begin(), ks.begin() + static_cast<std::ptrdiff_t>((ks.size() - 1) / 2), ks.end());
    row.k_n = ks[(ks.size() - 1) / 2];
    row.shape_proxy = static_cast<double>(row.k_n) / c[row.k_n - 1] * sum_gap_constants(c, row.k_n);
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<TailRow> tail_experiment(const ARBModel& model, const ExperimentConfig& cfg, double eta) {
  return summarize_tail(model, run_replicates(model, cfg), cfg.grid, eta);
}

}  // namespace arb
