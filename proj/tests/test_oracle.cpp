#include "support.hpp"

#include "pflow/oracle.hpp"
#include "pflow/verify.hpp"

#include <cmath>

using namespace pflow;
using namespace pflow::test;

namespace {

// Plain Taylor series, no scaling.
Matrix taylor_exp(const Matrix& m, int terms) {
  Matrix sum = Matrix::Identity(m.rows(), m.cols());
  Matrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * m / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("matrix_exponential") {
  CHECK(matrix_exponential(Matrix::Zero(3, 3)) == Matrix::Identity(3, 3));

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.5;
  d(1, 1) = -0.7;
  const Matrix e = matrix_exponential(d);
  CHECK(e(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
  CHECK(e(0, 1) == 0.0);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Matrix m(4, 4);
    for (int j = 0; j < 4; ++j) m.col(j) = standard_normal(4, rng);
    m /= m.norm();
    CHECK(rel_err(matrix_exponential(m), taylor_exp(m, 20)) < 1e-12);
  }

  SUBCASE("rank-one closed form") {
    for (int t = 0; t < 20; ++t) {
      const Vector u = standard_normal(5, rng), v = standard_normal(5, rng);
      const Matrix M = u * v.transpose();
      const double beta = 0.5 * standard_normal(1, rng)(0);
      const double tr = M.trace();
      const Matrix closed = Matrix::Identity(5, 5) + M * (std::exp(beta * tr) - 1) / tr;
      CHECK(rel_err(matrix_exponential(beta * M), closed) < 1e-10);
    }
  }
}

TEST_CASE("adaptive_simpson") {
  auto f = [](double t) { return Vector::Constant(1, std::exp(t)); };
  CHECK(adaptive_simpson(f, 0, 1)(0) == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-10));
  CHECK(adaptive_simpson(f, 0.5, 0.5)(0) == 0.0);
  auto g = [](double t) { return vec({std::sin(t), t * t}); };
  const Vector r = adaptive_simpson(g, 0, M_PI);
  CHECK(r(0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r(1) == doctest::Approx(M_PI * M_PI * M_PI / 3).epsilon(1e-10));
  auto singular = [](double t) { return Vector::Constant(1, 1.0 / std::sqrt(std::abs(t))); };
  CHECK_THROWS_AS(adaptive_simpson(singular, 0, 1, {1e-14, 1e-14, 12}), QuadratureError);
}

TEST_CASE("integrate_flow_numeric") {
  const DriftFn zero = [](double, const Vector& x) { return Vector::Zero(x.size()); };
  CHECK(integrate_flow_numeric(zero, vec({3, 4}), 0, 1, 10, Integrator::rk4) == vec({3, 4}));
  CHECK(integrate_flow_numeric(zero, vec({3, 4}), 0, 1, 10, Integrator::euler) == vec({3, 4}));

  const auto c = scalar(1, 1, 1, 2, 0);
  const auto drift = frozen_drift(c);
  const Vector x0 = vec({1.0});
  const Vector one = integrate_flow_numeric(drift, x0, 0.2, 0.7, 1, Integrator::euler);
  CHECK(one(0) == doctest::Approx(x0(0) + drift(0.2, x0)(0) * 0.5).epsilon(1e-15));

  const Vector rk = integrate_flow_numeric(drift, x0, 0, 1, 10000, Integrator::rk4);
  CHECK(rk(0) == doctest::Approx(1.70711).epsilon(1e-5));

  SUBCASE("frozen drift matches A x + b") {
    Rng rng(9);
    const auto inst = random_flow_instance(4, 2, rng);
    const auto f = frozen_drift(inst.P, inst.H, inst.R, inst.z, inst.xbar);
    const Vector x = standard_normal(4, rng);
    for (double l : {0.0, 0.5, 1.0}) {
      const Vector expected = drift_matrix_A(inst.P, inst.H, inst.R, l) * x +
                              drift_vector_b(inst.P, inst.H, inst.R, inst.z, inst.xbar, l);
      CHECK(rel_err(f(l, x), expected) < 1e-12);
    }
  }
}

TEST_CASE("quadrature_inhomogeneous") {
  const auto c = scalar(1, 1, 1, 2, 0);
  for (int i = 0; i < 5; ++i) CHECK(quadrature_inhomogeneous(c, i, 0.4, 0.4).norm() == 0.0);
  CHECK(quadrature_inhomogeneous(c, 0, 1, 0)(0) == doctest::Approx(1.72386).epsilon(1e-5));
  CHECK(quadrature_inhomogeneous(c, 2, 1, 0)(0) == doctest::Approx(-0.82843).epsilon(1e-5));
  CHECK(quadrature_inhomogeneous(c, 4, 1, 0)(0) == doctest::Approx(0.10458).epsilon(1e-4));
  const auto c2 = scalar(1, 1, 1, 0, 1);
  CHECK(quadrature_inhomogeneous(c2, 1, 1, 0)(0) == doctest::Approx(-0.29289).epsilon(1e-5));
  CHECK(quadrature_inhomogeneous(c2, 3, 1, 0)(0) == doctest::Approx(0.08579).epsilon(1e-4));
  CHECK_THROWS_AS(quadrature_inhomogeneous(c, 7, 1, 0), Error);

  SUBCASE("the five terms integrate the whole drift") {
    Vector sum = Vector::Zero(1);
    for (int i = 0; i < 5; ++i) sum += quadrature_inhomogeneous(c, i, 1, 0);
    CHECK(sum(0) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("kalman_posterior") {
  const Matrix one = Matrix::Identity(1, 1);
  const auto k = kalman_posterior(one, one, one, vec({2.0}), vec({0.0}));
  CHECK(k.mean(0) == doctest::Approx(1.0));
  CHECK(k.covariance(0, 0) == doctest::Approx(0.5));

  Matrix H(1, 2);
  H << 1, 2;
  const Vector xbar = vec({0.5, -1});
  const auto same = kalman_posterior(Matrix::Identity(2, 2), H, one, H * xbar, xbar);
  CHECK((same.mean - xbar).norm() < 1e-15);

  const auto vague = kalman_posterior(Matrix::Identity(2, 2), H, one * 1e12, vec({100.0}), xbar);
  const Vector shift = H.transpose() * (101.5 / (1e12 + 5.0));
  CHECK(rel_err(vague.mean - xbar, shift) < 1e-6);
  CHECK(rel_err(vague.covariance, Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("commutator_norm") {
  const Matrix one = Matrix::Identity(1, 1);
  CHECK(commutator_norm(one * 2, one * 3, one, 0.2, 0.9) == 0.0);

  Rng rng(41);
  const auto inst = random_flow_instance(5, 2, rng);
  CHECK(commutator_norm(inst.P, inst.H, inst.R, 0.4, 0.4) == 0.0);
  const double scale = drift_matrix_A(inst.P, inst.H, inst.R, 0.3).norm() *
                       drift_matrix_A(inst.P, inst.H, inst.R, 0.9).norm();
  CHECK(commutator_norm(inst.P, inst.H, inst.R, 0.3, 0.9) <= 1e-12 * (1 + scale));
}

TEST_CASE("verification suite on small instance counts") {
  Rng rng(1);
  CHECK(check_commutativity(10, rng).max_error <= 1e-10);
  CHECK(check_transition(10, rng).max_error <= 1e-8);
  CHECK(check_psi(10, rng).max_error <= 1e-6);
  CHECK(check_rk4(10, rng).max_error <= 1e-6);
  CHECK(check_kalman(10, rng).max_error <= 1e-8);
  CHECK(check_semigroup(10, rng).max_error <= 1e-10);
  CHECK(check_euler(10, rng).max_error < 1.0);
}
