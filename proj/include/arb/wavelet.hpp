#pragma once

// Periodized orthonormal wavelets on [0,1): analysis/synthesis on a dyadic
// grid, Besov norms of B^0_{inf,inf} and B^0_{1,1}, the Besov-type Kuelbs
// weight sequence, the Haar kernel of the weighting operator and a
// Bessel-potential eigenvalue profile.

#include "arb/core.hpp"
#include "arb/gelfand.hpp"

#include <algorithm>
#include <functional>
#include <span>
#include <vector>

namespace arb::wavelet {

enum class Family { Haar, Daubechies };

/// Low-pass filters h with sum h = sqrt(2), sum h^2 = 1.
inline std::vector<double> lowpass_filter(Family family, int length) {
  if (family == Family::Haar) {
    detail::require(length == 2, "Haar filter has length 2");
    const double r = 1.0 / std::sqrt(2.0);
    return {r, r};
  }
  switch (length) {
    case 2: {
      const double r = 1.0 / std::sqrt(2.0);
      return {r, r};
    }
    case 4: {
      const double s3 = std::sqrt(3.0);
      const double d = 4.0 * std::sqrt(2.0);
      return {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
    }
    case 6:
      return {0.33267055295008263, 0.80689150931109255, 0.45987750211849154,
              -0.13501102001025458, -0.08544127388202666, 0.03522629188570953};
    case 8:
      return {0.23037781330889650, 0.71484657055291564, 0.63088076792985890,
              -0.02798376941685985, -0.18703481171909309, 0.03084138183556076,
              0.03288301166688520, -0.01059740178506903};
    default:
      throw contract_error("Daubechies filter length must be one of 2, 4, 6, 8");
  }
}

/// Multiresolution layout: 2^J scaling functions at the coarsest level J and
/// 2^j wavelets for every level j in [J, J_max]; the sample grid has
/// 2^(J_max+1) points.
class Basis {
 public:
  Basis(Family family, int filter_length, int coarsest, int finest)
      : family_(family),
        h_(lowpass_filter(family, filter_length)),
        coarsest_(coarsest),
        finest_(finest) {
    detail::require(coarsest >= 0, "wavelet basis: J must be >= 0");
    detail::require(finest >= coarsest, "wavelet basis: J_max must be >= J");
    detail::require(finest <= 24, "wavelet basis: J_max too large");
    detail::require((std::size_t{1} << (coarsest + 1)) >= h_.size(),
                    "wavelet basis: 2^J too small for the filter support");
    g_.resize(h_.size());
    const auto len = h_.size();
    for (std::size_t n = 0; n < len; ++n) {
      g_[n] = ((n % 2 == 0) ? 1.0 : -1.0) * h_[len - 1 - n];
    }
  }

  static Basis haar(int coarsest, int finest) { return {Family::Haar, 2, coarsest, finest}; }
  static Basis daubechies(int filter_length, int coarsest, int finest) {
    return {Family::Daubechies, filter_length, coarsest, finest};
  }

  /// Smallest valid basis with the given grid size.
  static Basis for_grid(Family family, int filter_length, std::size_t grid_size, int coarsest) {
    detail::require(grid_size >= 2 && (grid_size & (grid_size - 1)) == 0,
                    "wavelet grid size must be a power of two");
    int finest = -1;
    while ((std::size_t{1} << (finest + 1)) < grid_size) ++finest;
    return {family, filter_length, coarsest, finest};
  }

  Family family() const { return family_; }
  int coarsest() const { return coarsest_; }
  int finest() const { return finest_; }
  std::size_t grid_size() const { return std::size_t{1} << (finest_ + 1); }
  std::size_t scaling_count() const { return std::size_t{1} << coarsest_; }
  const std::vector<double>& lowpass() const { return h_; }
  const std::vector<double>& highpass() const { return g_; }

  /// Resolution level of flat coefficient index m (scaling indices report J).
  int level_of(std::size_t m) const {
    if (m < scaling_count()) return coarsest_;
    int j = 0;
    while ((std::size_t{1} << (j + 1)) <= m) ++j;
    return j;
  }

 private:
  Family family_;
  std::vector<double> h_;
  std::vector<double> g_;
  int coarsest_;
  int finest_;
};

/// Wavelet coefficients. Flat layout: alpha_{J,0..2^J-1}, then beta_{J,.},
/// beta_{J+1,.}, ..., beta_{J_max,.}; beta_{j,k} sits at index 2^j + k.
class CoeffArray {
 public:
  CoeffArray(Eigen::VectorXd flat, int coarsest, int finest)
      : flat_(std::move(flat)), coarsest_(coarsest), finest_(finest) {
    detail::require(coarsest >= 0 && finest >= coarsest, "CoeffArray: invalid levels");
    detail::require(flat_.size() == (Eigen::Index{1} << (finest + 1)),
                    "CoeffArray: total count must be 2^(J_max+1)");
    detail::require_finite(flat_, "CoeffArray");
  }

  CoeffArray(const Eigen::VectorXd& alpha, const std::vector<Eigen::VectorXd>& beta, int coarsest)
      : coarsest_(coarsest), finest_(coarsest + static_cast<int>(beta.size()) - 1) {
    detail::require(!beta.empty(), "CoeffArray: need at least one detail level");
    detail::require(alpha.size() == (Eigen::Index{1} << coarsest),
                    "CoeffArray: alpha must have 2^J entries");
    flat_.resize(Eigen::Index{1} << (finest_ + 1));
    flat_.head(alpha.size()) = alpha;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      const int j = coarsest + static_cast<int>(i);
      detail::require(beta[i].size() == (Eigen::Index{1} << j),
                      "CoeffArray: level j must have 2^j entries");
      flat_.segment(Eigen::Index{1} << j, beta[i].size()) = beta[i];
    }
    detail::require_finite(flat_, "CoeffArray");
  }

  int coarsest() const { return coarsest_; }
  int finest() const { return finest_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::Index size() const { return flat_.size(); }

  auto alpha() const { return flat_.head(Eigen::Index{1} << coarsest_); }
  auto beta(int level) const {
    detail::require(level >= coarsest_ && level <= finest_, "CoeffArray: level out of range");
    return flat_.segment(Eigen::Index{1} << level, Eigen::Index{1} << level);
  }

  /// The coefficients read as an Element of the Kuelbs coordinate space.
  const Element& as_element() const { return flat_; }

 private:
  Eigen::VectorXd flat_;
  int coarsest_;
  int finest_;
};

namespace detail_dwt {

inline void analysis_step(std::span<const double> in, std::span<double> approx,
                          std::span<double> det, const Basis& b) {
  const std::size_t n = in.size();
  const auto& h = b.lowpass();
  const auto& g = b.highpass();
  for (std::size_t k = 0; k < n / 2; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double x = in[(2 * k + i) % n];
      a += h[i] * x;
      d += g[i] * x;
    }
    approx[k] = a;
    det[k] = d;
  }
}

inline void synthesis_step(std::span<const double> approx, std::span<const double> det,
                           std::span<double> out, const Basis& b) {
  const std::size_t n = out.size();
  const auto& h = b.lowpass();
  const auto& g = b.highpass();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      out[(2 * k + i) % n] += h[i] * approx[k] + g[i] * det[k];
    }
  }
}

}  // namespace detail_dwt

inline CoeffArray dwt(const Eigen::VectorXd& samples, const Basis& basis) {
  const auto n = static_cast<std::size_t>(samples.size());
  detail::require(n >= 2 && (n & (n - 1)) == 0, "dwt: sample count must be a power of two");
  detail::require(n == basis.grid_size(), "dwt: sample count does not match the basis grid");
  Eigen::VectorXd flat(samples.size());
  std::vector<double> cur(samples.data(), samples.data() + n);
  std::vector<double> approx;
  for (int j = basis.finest(); j >= basis.coarsest(); --j) {
    const std::size_t half = std::size_t{1} << j;
    approx.assign(half, 0.0);
    std::span<double> det(flat.data() + half, half);
    detail_dwt::analysis_step(cur, approx, det, basis);
    cur = approx;
  }
  std::copy(cur.begin(), cur.end(), flat.data());
  return {std::move(flat), basis.coarsest(), basis.finest()};
}

inline Eigen::VectorXd idwt(const CoeffArray& coeffs, const Basis& basis) {
  detail::require(coeffs.coarsest() == basis.coarsest() && coeffs.finest() == basis.finest(),
                  "idwt: coefficient layout does not match the basis");
  const auto& flat = coeffs.flat();
  std::vector<double> cur(flat.data(), flat.data() + basis.scaling_count());
  std::vector<double> next;
  for (int j = basis.coarsest(); j <= basis.finest(); ++j) {
    const std::size_t half = std::size_t{1} << j;
    next.assign(2 * half, 0.0);
    std::span<const double> det(flat.data() + half, half);
    detail_dwt::synthesis_step(cur, det, next, basis);
    cur.swap(next);
  }
  return Eigen::Map<const Eigen::VectorXd>(cur.data(), static_cast<Eigen::Index>(cur.size()));
}

enum class BesovSpace { InfInf, OneOne };

/// B^0_{inf,inf}: sup of all |alpha|, |beta|. B^0_{1,1}: sum of all of them.
inline double besov_norm(const CoeffArray& coeffs, BesovSpace space) {
  const auto a = coeffs.flat().array().abs();
  return space == BesovSpace::InfInf ? a.maxCoeff() : a.sum();
}

struct BesovWeights {
  Eigen::VectorXd raw;  // t^phi_{J,k} = 2^-J, t^psi_{j,k} = (2^{2b}-1)/2^{2b(1-J)} 2^{-2jb}
  Weights normalized;
  double raw_mass;
  double tail_mass;  // raw mass of the levels j > J_max that the truncation drops
};

inline double besov_detail_weight(int level, int coarsest, double beta_exp) {
  const double c = (std::pow(2.0, 2.0 * beta_exp) - 1.0) / std::pow(2.0, 2.0 * beta_exp * (1.0 - coarsest));
  return c * std::pow(2.0, -2.0 * level * beta_exp);
}

inline BesovWeights besov_weights(int coarsest, int finest, double beta_exp) {
  if (!(beta_exp > 0.5)) {
    throw contract_error("besov_weights: beta must exceed 1/2 (the weight series diverges otherwise)");
  }
  detail::require(coarsest >= 0 && finest >= coarsest, "besov_weights: invalid levels");
  const Eigen::Index m = Eigen::Index{1} << (finest + 1);
  Eigen::VectorXd raw(m);
  const Eigen::Index scaling = Eigen::Index{1} << coarsest;
  raw.head(scaling).setConstant(std::pow(2.0, -coarsest));
  for (int j = coarsest; j <= finest; ++j) {
    raw.segment(Eigen::Index{1} << j, Eigen::Index{1} << j)
        .setConstant(besov_detail_weight(j, coarsest, beta_exp));
  }
  // sum_{j > J_max} 2^j w_j is geometric with ratio 2^{1-2b}
  const double ratio = std::pow(2.0, 1.0 - 2.0 * beta_exp);
  const double first = std::pow(2.0, finest + 1) * besov_detail_weight(finest + 1, coarsest, beta_exp);
  const double tail = first / (1.0 - ratio);
  Weights w(raw);
  return {raw, w, raw.sum(), tail};
}

/// Haar scaling function phi_{J,k} and wavelet psi_{j,k} on [0,1).
inline double haar_phi(int level, std::size_t k, double s) {
  const double scale = std::ldexp(1.0, level);
  const double u = s * scale - static_cast<double>(k);
  return (u >= 0.0 && u < 1.0) ? std::sqrt(scale) : 0.0;
}

inline double haar_psi(int level, std::size_t k, double s) {
  const double scale = std::ldexp(1.0, level);
  const double u = s * scale - static_cast<double>(k);
  if (u < 0.0 || u >= 1.0) return 0.0;
  return (u < 0.5 ? 1.0 : -1.0) * std::sqrt(scale);
}

/// Kernel t(s, t) of the weighting operator with raw weights, truncated at J_max.
inline double kernel_eval(double s, double t_pt, const Basis& basis, double beta_exp) {
  if (basis.family() != Family::Haar) {
    throw contract_error("kernel_eval: pointwise evaluation is only available for Haar");
  }
  detail::require(s >= 0.0 && s < 1.0 && t_pt >= 0.0 && t_pt < 1.0,
                  "kernel_eval: points must lie in [0,1)");
  const int big_j = basis.coarsest();
  double scaling = 0.0;
  for (std::size_t k = 0; k < basis.scaling_count(); ++k) {
    scaling += haar_phi(big_j, k, s) * haar_phi(big_j, k, t_pt);
  }
  double detail_sum = 0.0;
  for (int j = big_j; j <= basis.finest(); ++j) {
    double level_sum = 0.0;
    for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
      level_sum += haar_psi(j, k, s) * haar_psi(j, k, t_pt);
    }
    detail_sum += besov_detail_weight(j, big_j, beta_exp) * level_sum;
  }
  return std::pow(2.0, -big_j) * scaling + detail_sum;
}

inline constexpr double kTieBreak = 1e-6;

/// Eigenvalues of the Bessel-potential surrogate (I - Laplacian)^{-gamma}:
/// c0 2^{-2 gamma level(m)} (1 - m eps) for flat index m. The factor
/// (1 - m eps) separates indices sharing a level, so the output is strictly
/// decreasing and its order coincides with the flat coefficient layout.
inline Eigen::VectorXd bessel_eigen_profile(double gamma, const Basis& basis, double c0) {
  if (!(gamma > 0.0)) throw contract_error("bessel_eigen_profile: gamma must be positive");
  detail::require(c0 > 0.0, "bessel_eigen_profile: c0 must be positive");
  const auto m = static_cast<Eigen::Index>(basis.grid_size());
  detail::require(static_cast<double>(m) * kTieBreak < 1.0, "bessel_eigen_profile: grid too large");
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const int level = basis.level_of(static_cast<std::size_t>(i));
    out[i] = c0 * std::pow(2.0, -2.0 * gamma * level) * (1.0 - static_cast<double>(i) * kTieBreak);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace arb::wavelet
