#pragma once

// Kuelbs-weighted coordinate spaces: the weight sequence (t_m), the five
// norms of the embedding chain H~ <- B <- H <- B* <- H~*, the Riesz map
// between H~ and its dual, and the RKHS norm of a covariance operator.

#include "arb/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string_view>
#include <vector>

namespace arb {

/// Positive weights summing to one. Construction renormalizes whatever mass
/// the input carries; the raw mass is kept for reporting.
class Weights {
 public:
  explicit Weights(Eigen::VectorXd raw) {
    detail::require(raw.size() >= 2, "Weights: need M >= 2");
    detail::require_finite(raw, "Weights");
    detail::require((raw.array() > 0.0).all(), "Weights: entries must be strictly positive");
    raw_mass_ = raw.sum();
    t_ = raw / raw_mass_;
    sqrt_t_ = t_.array().sqrt();
  }

  static Weights uniform(Eigen::Index m) {
    detail::require(m >= 2, "Weights: need M >= 2");
    return Weights(Eigen::VectorXd::Ones(m));
  }

  Eigen::Index size() const { return t_.size(); }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& sqrt_t() const { return sqrt_t_; }
  double operator[](Eigen::Index m) const { return t_[m]; }
  double raw_mass() const { return raw_mass_; }

  /// T = diag(t) as a dense matrix.
  Eigen::MatrixXd diag() const { return t_.asDiagonal(); }

 private:
  Eigen::VectorXd t_;
  Eigen::VectorXd sqrt_t_;
  double raw_mass_ = 1.0;
};

enum class Space { B, Htilde, H, Bdual, HtildeDual };

inline std::string_view to_string(Space s) {
  switch (s) {
    case Space::B: return "B";
    case Space::Htilde: return "Htilde";
    case Space::H: return "H";
    case Space::Bdual: return "Bdual";
    case Space::HtildeDual: return "HtildeDual";
  }
  return "?";
}

/// <x, y>_{H~} = sum_m t_m x_m y_m
inline double inner(const Element& x, const Element& y, const Weights& w) {
  detail::require_same_size(x.size(), w.size(), "inner");
  detail::require_same_size(y.size(), w.size(), "inner");
  return (w.t().array() * x.array() * y.array()).sum();
}

/// <x, y>_{H~*} = sum_m x_m y_m / t_m
inline double inner_dual(const Element& x, const Element& y, const Weights& w) {
  detail::require_same_size(x.size(), w.size(), "inner_dual");
  detail::require_same_size(y.size(), w.size(), "inner_dual");
  return (x.array() * y.array() / w.t().array()).sum();
}

inline double norm(const Element& x, const Weights& w, Space space) {
  detail::require_same_size(x.size(), w.size(), "norm");
  detail::require_finite(x, "norm");
  const auto a = x.array();
  switch (space) {
    case Space::B: return a.abs().maxCoeff();
    case Space::Htilde: return std::sqrt((w.t().array() * a.square()).sum());
    case Space::H: return std::sqrt(a.square().sum());
    case Space::Bdual: return a.abs().sum();
    case Space::HtildeDual: return std::sqrt((a.square() / w.t().array()).sum());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Coordinates of the dual element: f*_m = t_m f_m. Isometric from H~ onto H~*.
inline Element riesz_map(const Element& f, const Weights& w) {
  detail::require_same_size(f.size(), w.size(), "riesz_map");
  return (w.t().array() * f.array()).matrix();
}

/// Columns phi_j = e_j / sqrt(t_j): the H~-orthonormal basis aligned with the
/// coordinate functionals.
inline Eigen::MatrixXd canonical_basis(const Weights& w) {
  return w.sqrt_t().cwiseInverse().asDiagonal();
}

/// Max deviation of Phi^T diag(t) Phi from the identity.
inline double gram_error(const Eigen::MatrixXd& phi, const Weights& w) {
  const Eigen::MatrixXd g = phi.transpose() * w.t().asDiagonal() * phi;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

/// Spectral form of a covariance operator on H~: strictly decreasing positive
/// eigenvalues C_j and H~-orthonormal eigenvectors phi_j (columns).
class SpectralModel {
 public:
  static constexpr double kGramTolerance = 1e-10;

  SpectralModel(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors, const Weights& w)
      : values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)) {
    const auto m = w.size();
    detail::require_same_size(values_.size(), m, "SpectralModel eigenvalues");
    detail::require(vectors_.rows() == m && vectors_.cols() == m,
                    "SpectralModel: eigenvector matrix must be M x M");
    detail::require_finite(values_, "SpectralModel eigenvalues");
    detail::require_finite(vectors_, "SpectralModel eigenvectors");
    if (values_[m - 1] <= 0.0) throw model_error("SpectralModel: eigenvalues must be positive");
    for (Eigen::Index j = 1; j < m; ++j) {
      if (!(values_[j - 1] > values_[j])) {
        throw model_error("SpectralModel: eigenvalues must be strictly decreasing "
                          "(one-dimensional eigenspaces), violated at j = " +
                          std::to_string(j + 1));
      }
    }
    if (gram_error(vectors_, w) > kGramTolerance) {
      throw contract_error("SpectralModel: eigenvectors are not H~-orthonormal");
    }
  }

  Eigen::Index size() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  double value(Eigen::Index j) const { return values_[j]; }
  auto vector(Eigen::Index j) const { return vectors_.col(j); }

  /// Coefficient matrix of C = sum_j C_j phi_j (x) phi_j acting on Elements.
  LinOp operator_matrix(const Weights& w) const {
    return vectors_ * values_.asDiagonal() * vectors_.transpose() * w.t().asDiagonal();
  }

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

/// ||f||_{H(X)} = sqrt(sum_j <f, phi_j>^2_{H~} / C_j). Returns +inf when f has
/// mass on a direction with non-positive eigenvalue.
inline double rkhs_norm(const Element& f, const SpectralModel& model, const Weights& w) {
  detail::require_same_size(f.size(), w.size(), "rkhs_norm");
  detail::require_same_size(model.size(), w.size(), "rkhs_norm");
  const Eigen::VectorXd proj = model.vectors().transpose() * (w.t().array() * f.array()).matrix();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < proj.size(); ++j) {
    const double c = model.value(j);
    if (c <= 0.0) {
      if (std::abs(proj[j]) > 1e-12) return std::numeric_limits<double>::infinity();
      continue;
    }
    acc += proj[j] * proj[j] / c;
  }
  return std::sqrt(acc);
}

}  // namespace arb
