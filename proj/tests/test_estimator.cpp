#include "arb/estimator.hpp"
#include "arb/process.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace arb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
ARBModel reference(Eigen::Index m = 8) {
  ModelSpec s;
  s.eigenvalues = geometric_profile(m, 0.5);
  s.rho = Eigen::VectorXd::Constant(m, 0.5);
  return ARBModel(Weights::uniform(m), s);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("empirical moments on small samples") {
  const Weights w(vec({0.5, 0.5}));
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0, 1;
  const auto mom = empirical_moments(Trajectory(rows, 0, 0), w);
  CHECK(max_abs(mom.covariance - Eigen::MatrixXd(vec({0.25, 0.25}).asDiagonal())) < 1e-15);
  Eigen::MatrixXd d(2, 2);
  d << 0, 0, 0.5, 0;
  CHECK(max_abs(mom.cross_covariance - d) < 1e-15);

  const Weights w3(vec({0.5, 0.3, 0.2}));
  const Eigen::VectorXd v = vec({1.0, -2.0, 0.5});
  Eigen::MatrixXd same(5, 3);
  for (int i = 0; i < 5; ++i) same.row(i) = v.transpose();
  const auto m1 = empirical_moments(Trajectory(same, 0, 0), w3);
  CHECK(max_abs(m1.covariance - v * v.transpose() * w3.diag()) < 1e-14);

  const auto m0 = empirical_moments(Trajectory(Eigen::MatrixXd::Zero(4, 3), 0, 0), w3);
  CHECK(m0.covariance.isZero(0.0));
  CHECK_THROWS_AS(empirical_moments(Trajectory(same, 0, 0), w), contract_error);
}

TEST_CASE("empirical covariance is self-adjoint and nonnegative") {
  std::mt19937_64 g(2);
  const Weights w(oracle::random_weights(6, g));
  ModelSpec s;
  s.eigenvalues = geometric_profile(6, 0.7);
  s.rho = Eigen::VectorXd::Constant(6, 0.3);
  Engine eng(4);
  s.basis = random_orthonormal_basis(w, eng);
  const ARBModel m(w, s);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mom = empirical_moments(simulate(m, 300, 10, seed), w);
    const Eigen::MatrixXd sym = symmetrized(mom.covariance, w);
    REQUIRE(max_abs(sym - sym.transpose()) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    REQUIRE(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("spectral decomposition examples") {
  const Weights w(vec({0.6, 0.4}));
  const Eigensystem e = spectral_decomposition(LinOp(vec({0.4, 0.1}).asDiagonal()), w);
  CHECK(max_abs(e.values - vec({0.4, 0.1})) < 1e-15);
  CHECK(max_abs(e.vectors - canonical_basis(w)) < 1e-14);
  CHECK(e.rank == 2);

  const Weights w3(vec({0.5, 0.3, 0.2}));
  const Eigen::VectorXd v = vec({1.0, -2.0, 0.5});
  const Eigensystem r1 = spectral_decomposition(LinOp(v * v.transpose() * w3.diag()), w3);
  CHECK_THAT(r1.values[0], WithinRel(std::pow(norm(v, w3, Space::Htilde), 2), 1e-13));
  CHECK(r1.values[1] == 0.0);
  CHECK(r1.values[2] == 0.0);
  CHECK(r1.rank == 1);

  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(spectral_decomposition(asym, w), contract_error);
}

TEST_CASE("spectral decomposition agrees with a generalized eigensolver") {
  std::mt19937_64 g(8);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index m = 3 + rep % 10;
    const Weights w(oracle::random_weights(m, g));
    const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(m, m, [&] { return std::normal_distribution<>()(g); });
    const LinOp a = x * x.transpose() * w.diag();
    const Eigensystem e = spectral_decomposition(a, w);
    const auto ref = oracle::generalized_eigen(a, w.t());
    REQUIRE(max_abs(e.values - ref.values) < 1e-10 * ref.values[0]);
    // Same eigenvectors up to sign, H~-orthonormal, sign convention applied.
    REQUIRE(gram_error(e.vectors, w) < 1e-10);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = std::abs(inner(e.vectors.col(j), ref.vectors.col(j), w));
      REQUIRE(std::abs(c - 1.0) < 1e-8);
      Eigen::Index arg;
      e.vectors.col(j).cwiseAbs().maxCoeff(&arg);
      REQUIRE(e.vectors(arg, j) > 0);
    }
    for (Eigen::Index j = 1; j < m; ++j) REQUIRE(e.values[j - 1] >= e.values[j]);
  }
}

TEST_CASE("theoretical covariance round-trips through the decomposition") {
  std::mt19937_64 g(5);
  const Weights w(oracle::random_weights(7, g));
  Engine eng(5);
  ModelSpec s;
  s.eigenvalues = geometric_profile(7, 0.6);
  s.rho = Eigen::VectorXd::Constant(7, 0.2);
  s.basis = random_orthonormal_basis(w, eng);
  const ARBModel m(w, s);
  const Eigensystem e = align(spectral_decomposition(m.covariance(), w), m.spectral(), w);
  CHECK(max_abs(e.values - m.spectral().values()) < 1e-10);
  CHECK(max_abs(e.vectors - *e.aligned) < 1e-10);
}

TEST_CASE("sign alignment") {
  const Weights w(vec({0.5, 0.5}));
  const Element truth = vec({std::sqrt(2.0), 0.0});
  CHECK(sign_align(vec({1.0, 0.1}), truth, w) == truth);
  CHECK(sign_align(vec({-1.0, 0.1}), truth, w) == -truth);
  CHECK(sign_align(vec({0.0, 1.0}), truth, w) == truth);
}

TEST_CASE("truncation rules") {
  Eigensystem full;
  full.values = Eigen::VectorXd::LinSpaced(8, 1.0, 0.1);
  full.vectors = Eigen::MatrixXd::Identity(8, 8);
  full.rank = 8;
  CHECK(select_truncation(full, 4096, TruncationRule::log(0.5)) == 4);
  CHECK(select_truncation(full, 4096, TruncationRule::log(0.5, 4.0)) == 8);
  CHECK(select_truncation(full, 2, TruncationRule::log(0.5)) == 1);
  CHECK(select_truncation(full, 64, TruncationRule::power(0.5)) == 8);
  CHECK(select_truncation(full, 10, TruncationRule::power(0.5)) == 3);
  CHECK(select_truncation(full, 100, TruncationRule::fixed(5)) == 5);

  const Eigensystem clip = spectral_decomposition(LinOp(vec({0.5, 0.25, 1e-17}).asDiagonal()), Weights::uniform(3));
  CHECK(clip.values[2] == 0.0);
  CHECK(select_truncation(clip, 1 << 20, TruncationRule::log(5.0)) == 2);

  const Eigensystem zero = spectral_decomposition(LinOp::Zero(3, 3), Weights::uniform(3));
  CHECK_THROWS_AS(select_truncation(zero, 100, TruncationRule::log(0.5)), model_error);
}

TEST_CASE("estimator on exact moments") {
  const ARBModel m = reference();
  const Weights& w = m.weights();
  const EmpiricalMoments exact{m.covariance(), m.cross_covariance(), 1000};
  const RhoEstimate full = estimate_rho(exact, w, 8);
  CHECK(max_abs(full.matrix - Eigen::MatrixXd::Identity(8, 8) * 0.5) < 1e-10);

  const RhoEstimate one = estimate_rho(exact, w, 1);
  const Element phi1 = m.spectral().vector(0);
  const LinOp expected = 0.5 * phi1 * phi1.transpose() * w.diag();
  CHECK(max_abs(one.matrix - expected) < 1e-12);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(one.matrix);
  CHECK(lu.rank() == 1);

  const Eigensystem clip = spectral_decomposition(LinOp(vec({0.5, 0.25, 1e-17}).asDiagonal()), Weights::uniform(3));
  CHECK_THROWS_AS(component_estimator(LinOp::Zero(3, 3), clip, 3, Weights::uniform(3)), model_error);
}

TEST_CASE("estimator rank never exceeds k") {
  const ARBModel m = reference();
  const Trajectory tr = simulate(m, 500, 20, 3);
  for (Eigen::Index k = 1; k <= 8; ++k) {
    const auto est = estimate_rho(tr, m.weights(), TruncationRule::fixed(k));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(est.matrix);
    lu.setThreshold(1e-10);
    REQUIRE(lu.rank() <= k);
  }
}

TEST_CASE("prediction is linear") {
  const ARBModel m = reference();
  const auto est = estimate_rho(EmpiricalMoments{m.covariance(), m.cross_covariance(), 10}, m.weights(), 8);
  const Element e1 = Element::Unit(8, 0);
  CHECK(max_abs(predict(est, e1) - 0.5 * e1) < 1e-12);
  CHECK(predict(est, Element::Zero(8)).isZero(0.0));

  const auto noisy = estimate_rho(simulate(m, 300, 20, 1), m.weights(), TruncationRule::log(0.5, 2.0));
  std::mt19937_64 g(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Element x = oracle::random_vector(8, g), y = oracle::random_vector(8, g);
    const double a = 1.7, b = -0.3;
    REQUIRE(max_abs(predict(noisy, a * x + b * y) - (a * predict(noisy, x) + b * predict(noisy, y))) < 1e-12);
  }
  CHECK_THROWS_AS(predict(noisy, Element::Zero(3)), contract_error);
}

TEST_CASE("projections") {
  const ARBModel m = reference();
  const Weights& w = m.weights();
  const auto mom = empirical_moments(simulate(m, 400, 20, 9), w);
  const Eigensystem e = align(spectral_decomposition(mom, w), m.spectral(), w);
  std::mt19937_64 g(4);
  for (int rep = 0; rep < 50; ++rep) {
    const Element x = oracle::random_vector(8, g);
    REQUIRE(max_abs(project(x, e, 8, Projection::Empirical, w) - x) < 1e-12);
    REQUIRE(project(x, e, 0, Projection::Empirical, w).isZero(0.0));
    for (Eigen::Index k = 1; k < 8; ++k) {
      for (auto v : {Projection::Empirical, Projection::Aligned}) {
        const Element p = project(x, e, k, v, w);
        REQUIRE(max_abs(project(p, e, k, v, w) - p) < 1e-12);
      }
    }
  }
  Eigensystem plain = spectral_decomposition(mom, w);
  CHECK_THROWS_AS(project(Element::Zero(8), plain, 2, Projection::Aligned, w), contract_error);
}

TEST_CASE("estimation error shrinks with n") {
  const ARBModel m = reference();
  std::vector<double> small, large;
  for (int r = 0; r < 30; ++r) {
    for (auto [n, out] : {std::pair<std::size_t, std::vector<double>*>{256, &small}, {4096, &large}}) {
      const auto est = estimate_rho(simulate(m, n, 20, derive_seed(99, n, r)), m.weights(), TruncationRule::log(0.5));
      out->push_back(op_norm_b(est.matrix - m.rho()));
    }
  }
  CHECK(oracle::median(large) < oracle::median(small));
}
