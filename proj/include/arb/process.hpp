#pragma once

// ARB(1) models X_n = rho(X_{n-1}) + eps_n with a diagonal (optionally
// banded) autocorrelation operator in an H~-orthonormal frame, uniform
// innovations per mode, and trajectory simulation.

#include "arb/core.hpp"
#include "arb/gelfand.hpp"
#include "arb/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

namespace arb {

/// Operator norm of the coefficient matrix as a map B -> B (max abs row sum).
inline double op_norm_b(const LinOp& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

/// C_j = scale * ratio^j, j = 1..M.
inline Eigen::VectorXd geometric_profile(Eigen::Index m, double ratio, double scale = 1.0) {
  detail::require(ratio > 0.0 && ratio < 1.0, "geometric profile: ratio must lie in (0,1)");
  Eigen::VectorXd c(m);
  for (Eigen::Index j = 0; j < m; ++j) c[j] = scale * std::pow(ratio, static_cast<double>(j + 1));
  return c;
}

/// C_j = scale * j^{-exponent}, j = 1..M.
inline Eigen::VectorXd power_profile(Eigen::Index m, double exponent, double scale = 1.0) {
  detail::require(exponent > 0.0, "power profile: exponent must be positive");
  Eigen::VectorXd c(m);
  for (Eigen::Index j = 0; j < m; ++j) c[j] = scale * std::pow(static_cast<double>(j + 1), -exponent);
  return c;
}

/// Random H~-orthonormal frame T^{-1/2} Q with Q Haar-distributed orthogonal.
inline Eigen::MatrixXd random_orthonormal_basis(const Weights& w, Engine& eng) {
  const auto m = w.size();
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = 0; r < m; ++r) g(r, c) = gauss(eng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::VectorXd d = qr.matrixQR().diagonal();
  for (Eigen::Index c = 0; c < m; ++c)
    if (d[c] < 0) q.col(c) = -q.col(c);
  return w.sqrt_t().cwiseInverse().asDiagonal() * q;
}

struct ModelSpec {
  Eigen::VectorXd eigenvalues;  // target C_j, strictly decreasing
  Eigen::VectorXd rho;          // rho_j on the diagonal of the phi-frame matrix
  Eigen::VectorXd band;         // optional entries <rho(phi_{j+1}), phi_j>, size M-1 or empty
  Eigen::MatrixXd basis;        // H~-orthonormal frame phi_j (columns); empty -> canonical
  double rho_max = 0.99;
};

class ARBModel {
 public:
  ARBModel(Weights w, ModelSpec spec) : weights_(std::move(w)) {
    const auto m = weights_.size();
    if (spec.basis.size() == 0) spec.basis = canonical_basis(weights_);
    detail::require(spec.basis.rows() == m && spec.basis.cols() == m, "model basis must be M x M");
    detail::require_same_size(spec.eigenvalues.size(), m, "model eigenvalues");
    detail::require_same_size(spec.rho.size(), m, "model rho");
    detail::require(spec.band.size() == 0 || spec.band.size() == m - 1,
                    "model band must have M-1 entries");
    if (!(spec.rho_max < 1.0)) {
      throw model_error("stationarity condition ||rho^j0||_L(B) < 1 requires rho_max < 1 (got " +
                        std::to_string(spec.rho_max) + ")");
    }
    const double sup_rho = spec.rho.cwiseAbs().maxCoeff();
    if (!(sup_rho < 1.0) || sup_rho > spec.rho_max) {
      throw model_error("stationarity condition violated: sup_j |rho_j| = " + std::to_string(sup_rho) +
                        " must be < 1 and <= rho_max = " + std::to_string(spec.rho_max));
    }
    // Validates distinct eigenvalues and orthonormality of the frame.
    SpectralModel target(spec.eigenvalues, spec.basis, weights_);

    frame_ = spec.basis;
    rho_frame_ = spec.rho.asDiagonal();
    diagonal_ = spec.band.size() == 0 || spec.band.isZero(0.0);
    if (!diagonal_) {
      for (Eigen::Index j = 0; j + 1 < m; ++j) rho_frame_(j, j + 1) = spec.band[j];
    }
    rho_diag_ = spec.rho;

    sigma2_ = spec.eigenvalues.array() * (1.0 - spec.rho.array().square());
    half_width_ = (3.0 * sigma2_.array()).sqrt();
    sigma_eps2_ = sigma2_.sum();

    if (diagonal_) {
      cov_frame_ = spec.eigenvalues.asDiagonal();
      spectral_.emplace(std::move(target));
      spectral_radius_ = sup_rho;
    } else {
      Eigen::EigenSolver<Eigen::MatrixXd> es(rho_frame_, false);
      spectral_radius_ = es.eigenvalues().cwiseAbs().maxCoeff();
      if (!(spectral_radius_ < 1.0)) {
        throw model_error("stationarity condition violated: spectral radius of rho is " +
                          std::to_string(spectral_radius_));
      }
      cov_frame_ = stationary_covariance(rho_frame_, sigma2_);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sa(cov_frame_);
      const Eigen::Index mm = m;
      Eigen::VectorXd vals(mm);
      Eigen::MatrixXd vecs(mm, mm);
      for (Eigen::Index j = 0; j < mm; ++j) {
        vals[j] = sa.eigenvalues()[mm - 1 - j];
        vecs.col(j) = frame_ * sa.eigenvectors().col(mm - 1 - j);
      }
      spectral_.emplace(vals, vecs, weights_);
    }

    const Eigen::MatrixXd tail = frame_.transpose() * weights_.t().asDiagonal();  // Phi^{-1}
    rho_ = frame_ * rho_frame_ * tail;
    c_ = frame_ * cov_frame_ * frame_.transpose() * weights_.t().asDiagonal();
    d_ = frame_ * rho_frame_ * cov_frame_ * frame_.transpose() * weights_.t().asDiagonal();

    j0_ = 0;
    LinOp power = rho_;
    for (int j = 1; j <= 10000; ++j) {
      if (op_norm_b(power) < 1.0) {
        j0_ = j;
        break;
      }
      power = power * rho_;
    }
    if (j0_ == 0) throw model_error("stationarity condition: no power of rho contracts in L(B)");
  }

  const Weights& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }
  bool diagonal() const { return diagonal_; }

  /// Spectral form of the true autocovariance operator C.
  const SpectralModel& spectral() const { return *spectral_; }
  /// Frame in which the dynamics are written (equals spectral().vectors() when diagonal).
  const Eigen::MatrixXd& frame() const { return frame_; }
  const Eigen::MatrixXd& rho_frame() const { return rho_frame_; }
  const Eigen::VectorXd& rho_diagonal() const { return rho_diag_; }
  const Eigen::MatrixXd& covariance_frame() const { return cov_frame_; }

  const Eigen::VectorXd& innovation_variances() const { return sigma2_; }
  const Eigen::VectorXd& half_widths() const { return half_width_; }
  double sigma_eps2() const { return sigma_eps2_; }
  double spectral_radius() const { return spectral_radius_; }
  int j0() const { return j0_; }

  /// Coefficient matrices of rho, C and D = rho C acting on Elements.
  const LinOp& rho() const { return rho_; }
  const LinOp& covariance() const { return c_; }
  const LinOp& cross_covariance() const { return d_; }

  /// Almost-sure bound |<X_n, phi_j>| <= a_j / (1 - |rho_j|) (diagonal models).
  Eigen::VectorXd frame_bounds() const {
    return half_width_.array() / (1.0 - rho_diag_.array().abs());
  }

  /// ceil(10 / (1 - rho_max)) with rho_max the spectral radius.
  std::size_t default_burn_in() const {
    return static_cast<std::size_t>(std::ceil(10.0 / (1.0 - spectral_radius_)));
  }

 private:
  static Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& r, const Eigen::VectorXd& s2) {
    // Sigma = sum_k R^k S R^kT by squaring: Sigma <- Sigma + A Sigma A^T, A <- A^2.
    Eigen::MatrixXd sigma = s2.asDiagonal();
    Eigen::MatrixXd a = r;
    for (int it = 0; it < 64 && a.cwiseAbs().maxCoeff() > 1e-300; ++it) {
      sigma += a * sigma * a.transpose();
      a = a * a;
      if (a.norm() < 1e-18) break;
    }
    return 0.5 * (sigma + sigma.transpose());
  }

  Weights weights_;
  std::optional<SpectralModel> spectral_;
  Eigen::MatrixXd frame_;
  Eigen::MatrixXd rho_frame_;
  Eigen::VectorXd rho_diag_;
  Eigen::MatrixXd cov_frame_;
  Eigen::VectorXd sigma2_;
  Eigen::VectorXd half_width_;
  double sigma_eps2_ = 0.0;
  double spectral_radius_ = 0.0;
  bool diagonal_ = true;
  int j0_ = 1;
  LinOp rho_;
  LinOp c_;
  LinOp d_;
};

inline ARBModel build_model(const Weights& w, const ModelSpec& spec) { return ARBModel(w, spec); }

/// n x M samples, row i holding the coordinates of X_i.
struct Trajectory {
  Eigen::MatrixXd samples;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;

  Trajectory() = default;
  Trajectory(Eigen::MatrixXd s, std::uint64_t sd, std::size_t bi)
      : samples(std::move(s)), seed(sd), burn_in(bi) {
    detail::require(samples.rows() >= 2, "Trajectory: need n >= 2");
    detail::require_finite(samples, "Trajectory");
  }

  Eigen::Index length() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
  Element row(Eigen::Index i) const { return samples.row(i).transpose(); }
  Element last() const { return row(length() - 1); }
};

/// Iterates the state equation in frame coordinates from X_{-burn_in} = 0 with
/// uniform innovations on [-a_j, a_j] and returns the retained rows in
/// F-coordinates. One engine stream per trajectory; draws are taken in mode
/// order at every step.
inline Trajectory simulate(const ARBModel& model, std::size_t n, std::size_t burn_in,
                           std::uint64_t seed) {
  detail::require(n >= 2, "simulate: need n >= 2");
  const auto m = model.size();
  Engine eng(seed);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd eps(m);
  Eigen::MatrixXd frame_rows(static_cast<Eigen::Index>(n), m);
  const Eigen::VectorXd& a = model.half_widths();
  const Eigen::VectorXd& r = model.rho_diagonal();
  const bool diag = model.diagonal();
  const std::size_t total = n + burn_in;
  for (std::size_t step = 0; step < total; ++step) {
    for (Eigen::Index j = 0; j < m; ++j) eps[j] = a[j] * uniform_symmetric(eng);
    if (diag) {
      xi = r.cwiseProduct(xi) + eps;
    } else {
      xi = model.rho_frame() * xi + eps;
    }
    if (step >= burn_in) frame_rows.row(static_cast<Eigen::Index>(step - burn_in)) = xi.transpose();
  }
  Eigen::MatrixXd samples = frame_rows * model.frame().transpose();
  return {std::move(samples), seed, burn_in};
}

struct TheoreticalMoments {
  LinOp covariance;
  LinOp cross_covariance;
};

inline TheoreticalMoments theoretical_moments(const ARBModel& model) {
  return {model.covariance(), model.cross_covariance()};
}

}  // namespace arb
