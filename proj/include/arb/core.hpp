#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace arb {

/// Coefficient vector of a point of B in the coordinate functionals F_1..F_M.
using Element = Eigen::VectorXd;

/// M x M coefficient-space matrix; acts on Element vectors by y = A x.
using LinOp = Eigen::MatrixXd;

/// Raised when a caller breaks a precondition (dimensions, ranges, layouts).
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a model violates a structural assumption (stationarity,
/// distinct eigenvalues, numerical rank).
class model_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw contract_error(what);
}

inline void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw contract_error(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

inline void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw contract_error(std::string(what) + ": non-finite entry");
}

}  // namespace detail
}  // namespace arb
