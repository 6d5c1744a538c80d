#include "pflow/model.hpp"

#include <cmath>
#include <limits>

namespace pflow {

void SystemModel::set_noise(Matrix q, Matrix r) {
  Q_sqrt = noise_sqrt(q);
  R_sqrt = noise_sqrt(r);
  Q = std::move(q);
  R = std::move(r);
}

SystemModel ungm_model() {
  SystemModel m;
  m.name = "ungm";
  m.n_x = 1;
  m.n_z = 1;
  m.transition = [](const Vector& x, int k) {
    const double v = x[0];
    return Vector::Constant(1, v / 2.0 + 25.0 * v / (1.0 + v * v) + 8.0 * std::cos(1.2 * k));
  };
  m.transition_jacobian = [](const Vector& x, int) {
    const double v = x[0];
    const double d = 1.0 + v * v;
    return Matrix::Constant(1, 1, 0.5 + 25.0 * (1.0 - v * v) / (d * d));
  };
  m.measurement = [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] / 20.0); };
  m.measurement_jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, x[0] / 10.0); };
  m.set_noise(Matrix::Constant(1, 1, 10.0), Matrix::Constant(1, 1, 0.1));
  return m;
}

namespace {

Matrix uniform_matrix(int n, Rng& rng) {
  Matrix t(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) t(i, j) = uniform_open(rng);
  return t;
}

double condition_number(const Matrix& t) {
  Eigen::JacobiSVD<Matrix> svd(t);
  const auto& s = svd.singularValues();
  if (s[s.size() - 1] <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

}  // namespace

SystemModel random_coupled_model(int dim, Rng& rng) {
  if (dim < 1) throw Error("random_coupled_model: dim must be positive");
  constexpr int kMaxDraws = 100;
  constexpr double kMaxCondition = 1e6;

  Vector eig(dim);
  for (int i = 0; i < dim; ++i) eig[i] = -uniform_open(rng);

  Matrix tf;
  bool conditioned = false;
  for (int draw = 0; draw < kMaxDraws && !conditioned; ++draw) {
    tf = uniform_matrix(dim, rng);
    conditioned = condition_number(tf) < kMaxCondition;
  }
  if (!conditioned) throw Error("random_coupled_model: no well-conditioned T_F in 100 draws");

  // F = T U T^{-1}  <=>  F^T = T^{-T} (T U)^T
  const Matrix tu = tf * eig.asDiagonal();
  const Matrix F = tf.transpose().partialPivLu().solve(tu.transpose()).transpose();

  const Matrix tq = uniform_matrix(dim, rng);
  Matrix Q = symmetrize(tq * tq.transpose());
  if (Eigen::LLT<Matrix>(Q).info() != Eigen::Success) Q += 1e-9 * Matrix::Identity(dim, dim);

  SystemModel m;
  m.name = "coupled";
  m.n_x = dim;
  m.n_z = 1;
  m.transition = [F](const Vector& x, int) -> Vector { return F * x; };
  m.transition_jacobian = [F](const Vector&, int) -> Matrix { return F; };
  m.measurement = [](const Vector& x) { return Vector::Constant(1, x.squaredNorm()); };
  m.measurement_jacobian = [](const Vector& x) -> Matrix { return 2.0 * x.transpose(); };
  m.set_noise(std::move(Q), Matrix::Constant(1, 1, 5.0));
  return m;
}

Trajectory simulate(const SystemModel& model, const Vector& x0, int steps, Rng& rng) {
  if (x0.size() != model.n_x) throw Error("simulate: x0 has wrong dimension");
  Trajectory traj;
  traj.states.reserve(steps);
  traj.measurements.reserve(steps);
  Vector x = x0;
  for (int k = 1; k <= steps; ++k) {
    x = model.transition(x, k) + model.Q_sqrt * standard_normal(model.n_x, rng);
    Vector z = model.measurement(x) + model.R_sqrt * standard_normal(model.n_z, rng);
    traj.states.push_back(x);
    traj.measurements.push_back(std::move(z));
  }
  return traj;
}

namespace {

double max_deviation(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double jacobian_check(const SystemModel& model, const Vector& x, int k) {
  const auto n = model.n_x;
  Matrix fd_g(n, n);
  Matrix fd_h(model.n_z, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double width = xp[i] - xm[i];
    fd_g.col(i) = (model.transition(xp, k) - model.transition(xm, k)) / width;
    fd_h.col(i) = (model.measurement(xp) - model.measurement(xm)) / width;
  }
  return std::max(max_deviation(model.transition_jacobian(x, k), fd_g),
                  max_deviation(model.measurement_jacobian(x), fd_h));
}

}  // namespace pflow
