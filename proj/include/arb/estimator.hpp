#pragma once

// Empirical covariance/cross-covariance operators, their H~-spectral
// decomposition, truncation selection, the component-wise estimator of the
// autocorrelation operator and the plug-in predictor.

#include "arb/core.hpp"
#include "arb/gelfand.hpp"
#include "arb/process.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace arb {

struct EmpiricalMoments {
  LinOp covariance;        // C_n = (1/n) sum X_i X_i^T T
  LinOp cross_covariance;  // D_n = (1/(n-1)) sum X_{i+1} X_i^T T
  Eigen::Index n = 0;
};

inline EmpiricalMoments empirical_moments(const Trajectory& traj, const Weights& w) {
  const auto n = traj.length();
  detail::require(n >= 2, "empirical_moments: need n >= 2");
  detail::require_same_size(traj.dim(), w.size(), "empirical_moments");
  const auto& x = traj.samples;
  const auto t = w.t().asDiagonal();
  EmpiricalMoments out;
  out.n = n;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  out.covariance = (gram / static_cast<double>(n)) * t;
  out.cross_covariance =
      (x.bottomRows(n - 1).transpose() * x.topRows(n - 1) / static_cast<double>(n - 1)) * t;
  return out;
}

/// Empirical eigenpairs sorted descending. Values below the rank tolerance are
/// exactly zero; `aligned` holds sgn<phi_{n,j}, phi_j> phi_j once a true frame
/// has been supplied.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  std::optional<Eigen::MatrixXd> aligned;
  Eigen::Index rank = 0;
  bool near_tie = false;

  Eigen::Index size() const { return values.size(); }
};

inline constexpr double kRankTolerance = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kTieTolerance = 1e-14;

/// T^{1/2} A T^{-1/2}: the matrix of A in the H~-orthonormal coordinates.
inline Eigen::MatrixXd symmetrized(const LinOp& a, const Weights& w) {
  detail::require(a.rows() == w.size() && a.cols() == w.size(), "operator dimension mismatch");
  return w.sqrt_t().asDiagonal() * a * w.sqrt_t().cwiseInverse().asDiagonal();
}

inline Eigensystem spectral_decomposition(const LinOp& op, const Weights& w) {
  Eigen::MatrixXd s = symmetrized(op, w);
  const double scale = std::max(s.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw contract_error("spectral_decomposition: operator is not self-adjoint in H~");
  }
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw model_error("spectral_decomposition: eigensolver failed");

  const auto m = s.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  // Eigen returns ascending values; reverse, then stable-sort so exact ties keep index order.
  for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = m - 1 - i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()[a] > es.eigenvalues()[b];
  });

  Eigensystem out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  const Eigen::VectorXd inv_sqrt_t = w.sqrt_t().cwiseInverse();
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.values[j] = es.eigenvalues()[src];
    Eigen::VectorXd v = inv_sqrt_t.cwiseProduct(es.eigenvectors().col(src));
    v /= norm(v, w, Space::Htilde);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.vectors.col(j) = v;
  }
  const double top = std::max(out.values[0], 0.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (out.values[j] <= kRankTolerance * top) out.values[j] = 0.0;
  }
  out.rank = (out.values.array() > 0.0).count();
  for (Eigen::Index j = 1; j < out.rank; ++j) {
    if (out.values[j - 1] - out.values[j] <= kTieTolerance * top) out.near_tie = true;
  }
  return out;
}

inline Eigensystem spectral_decomposition(const EmpiricalMoments& m, const Weights& w) {
  return spectral_decomposition(m.covariance, w);
}

/// sgn(<emp, truth>_{H~}) truth with sgn(0) = +1.
inline Element sign_align(const Element& emp, const Element& truth, const Weights& w) {
  return inner(emp, truth, w) >= 0.0 ? Element(truth) : Element(-truth);
}

/// Attaches aligned companions phi'_{n,j} built from the true eigenvectors.
inline Eigensystem align(Eigensystem eigs, const SpectralModel& truth, const Weights& w) {
  detail::require_same_size(eigs.size(), truth.size(), "align");
  Eigen::MatrixXd aligned(eigs.vectors.rows(), eigs.vectors.cols());
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    aligned.col(j) = sign_align(eigs.vectors.col(j), truth.vector(j), w);
  }
  eigs.aligned = std::move(aligned);
  return eigs;
}

struct TruncationRule {
  enum class Kind { Log, Power, Fixed };
  Kind kind = Kind::Log;
  double c1 = 0.5;
  double c0 = 0.0;
  double theta = 0.5;
  Eigen::Index k = 1;

  static TruncationRule log(double c1, double c0 = 0.0) { return {Kind::Log, c1, c0, 0.5, 1}; }
  static TruncationRule power(double theta) { return {Kind::Power, 0.5, 0.0, theta, 1}; }
  static TruncationRule fixed(Eigen::Index k) { return {Kind::Fixed, 0.5, 0.0, 0.5, k}; }

  std::string describe() const {
    switch (kind) {
      case Kind::Log: return "log(c1=" + std::to_string(c1) + ",c0=" + std::to_string(c0) + ")";
      case Kind::Power: return "power(theta=" + std::to_string(theta) + ")";
      case Kind::Fixed: return "fixed(k=" + std::to_string(k) + ")";
    }
    return "?";
  }

  /// Level requested by the rule before the positivity clip.
  Eigen::Index requested(Eigen::Index n) const {
    double raw = 1.0;
    switch (kind) {
      case Kind::Log: raw = std::floor(c1 * std::log(static_cast<double>(n)) + c0); break;
      case Kind::Power: raw = std::floor(std::pow(static_cast<double>(n), theta)); break;
      case Kind::Fixed: raw = static_cast<double>(k); break;
    }
    return static_cast<Eigen::Index>(std::max(1.0, raw));
  }
};

/// k_n from the rule, clipped to the largest j with C_{n,j} above the rank tolerance.
inline Eigen::Index select_truncation(const Eigensystem& eigs, Eigen::Index n,
                                      const TruncationRule& rule) {
  detail::require(n >= 2, "select_truncation: need n >= 2");
  if (eigs.rank == 0) throw model_error("select_truncation: all empirical eigenvalues are zero");
  return std::min(rule.requested(n), eigs.rank);
}

struct RhoEstimate {
  LinOp matrix;
  Eigen::Index k = 0;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  std::string rule;
  Eigensystem eigs;
};

/// Pi~ D_n C_n^{-1} Pi~ with the inverse taken on the retained spectral block only.
inline LinOp component_estimator(const LinOp& cross_cov, const Eigensystem& eigs, Eigen::Index k,
                                 const Weights& w) {
  detail::require(k >= 1 && k <= eigs.size(), "estimator: k out of range");
  if (k > eigs.rank || !(eigs.values[k - 1] > 0.0)) {
    throw model_error("estimator: k = " + std::to_string(k) + " exceeds the numerical rank " +
                      std::to_string(eigs.rank));
  }
  const auto vk = eigs.vectors.leftCols(k);
  const Eigen::MatrixXd dual = vk.transpose() * w.t().asDiagonal();  // x -> <x, phi_{n,j}>
  const Eigen::VectorXd inv = eigs.values.head(k).cwiseInverse();
  return vk * (dual * cross_cov * vk) * inv.asDiagonal() * dual;
}

inline RhoEstimate estimate_rho(const EmpiricalMoments& mom, const Weights& w, Eigen::Index k) {
  RhoEstimate est;
  est.eigs = spectral_decomposition(mom.covariance, w);
  est.k = k;
  est.n = mom.n;
  est.rule = "fixed(k=" + std::to_string(k) + ")";
  est.matrix = component_estimator(mom.cross_covariance, est.eigs, k, w);
  return est;
}

inline RhoEstimate estimate_rho(const Trajectory& traj, const Weights& w, const TruncationRule& rule) {
  const auto mom = empirical_moments(traj, w);
  RhoEstimate est;
  est.eigs = spectral_decomposition(mom.covariance, w);
  est.k = select_truncation(est.eigs, mom.n, rule);
  est.n = mom.n;
  est.seed = traj.seed;
  est.rule = rule.describe();
  est.matrix = component_estimator(mom.cross_covariance, est.eigs, est.k, w);
  return est;
}

inline Element predict(const RhoEstimate& est, const Element& x) {
  detail::require_same_size(x.size(), est.matrix.cols(), "predict");
  return est.matrix * x;
}

enum class Projection { Empirical, Aligned };

/// H~-orthogonal projection onto the first k empirical (or aligned) eigenvectors.
inline Element project(const Element& x, const Eigensystem& eigs, Eigen::Index k,
                       Projection variant, const Weights& w) {
  detail::require_same_size(x.size(), w.size(), "project");
  detail::require(k >= 0 && k <= eigs.size(), "project: k out of range");
  if (variant == Projection::Aligned && !eigs.aligned) {
    throw contract_error("project: aligned variant requested without alignment data");
  }
  if (k == 0) return Element::Zero(x.size());
  const Eigen::MatrixXd& v = variant == Projection::Aligned ? *eigs.aligned : eigs.vectors;
  const auto vk = v.leftCols(k);
  return vk * (vk.transpose() * w.t().cwiseProduct(x));
}

/// Matrix of the projection onto the first k columns of an H~-orthonormal frame.
inline LinOp projection_matrix(const Eigen::MatrixXd& frame, Eigen::Index k, const Weights& w) {
  const auto vk = frame.leftCols(k);
  return vk * vk.transpose() * w.t().asDiagonal();
}

}  // namespace arb
