#include "pflow/verify.hpp"

#include "pflow/filters.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace pflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double log_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

int uniform_int(int lo, int hi, Rng& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double relative(const Matrix& a, const Matrix& ref) {
  const double scale = ref.norm();
  const double diff = (a - ref).norm();
  return scale > 0.0 ? diff / scale : diff;
}

// A random sub-interval of [0, 1]: the whole range, a generic pair, or a
// short one that lands in the series branch.
std::pair<double, double> random_interval(int kind, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind % 3) {
    case 0:
      return {0.0, 1.0};
    case 1: {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      if (b - a < 1e-3) b = std::min(1.0, a + 1e-3);
      return {a, b};
    }
    default: {
      const double a = 0.9 * u(rng);
      return {a, a + log_uniform(1e-4, 5e-2, rng)};
    }
  }
}

Matrix quadrature_of_A(const FlowInstance& inst, double lambda, double lambda0) {
  const auto n = inst.P.rows();
  auto f = [&](double tau) {
    const Matrix a = drift_matrix_A(inst.P, inst.H, inst.R, tau);
    return Vector(Eigen::Map<const Vector>(a.data(), a.size()));
  };
  const Vector flat = adaptive_simpson(f, lambda0, lambda, {1e-14, 1e-13, 50});
  return Eigen::Map<const Matrix>(flat.data(), n, n);
}

}  // namespace

Matrix random_spd(int n, Rng& rng) {
  Matrix b(n, n);
  for (int j = 0; j < n; ++j) b.col(j) = standard_normal(n, rng);
  return symmetrize(b * b.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n));
}

FlowInstance random_flow_instance(int n_x, int n_z, Rng& rng) {
  FlowInstance inst;
  inst.P = random_spd(n_x, rng);
  inst.H.resize(n_z, n_x);
  for (int i = 0; i < n_z; ++i) inst.H.row(i) = standard_normal(n_x, rng).transpose();
  if (n_z == 1) {
    const double r = log_uniform(0.1, 10.0, rng);
    const double ratio = log_uniform(1e-2, 1e2, rng);
    const double p = (inst.H * inst.P * inst.H.transpose())(0, 0);
    inst.H *= std::sqrt(ratio * r / p);
    inst.R = Matrix::Constant(1, 1, r);
  } else {
    inst.R = random_spd(n_z, rng);
  }
  const Matrix S = inst.H * inst.P * inst.H.transpose() + inst.R;
  inst.z = S.llt().matrixL() * standard_normal(n_z, rng);
  inst.xbar = standard_normal(n_x, rng);
  return inst;
}

FlowCoefficients scalar_coefficients(const FlowInstance& inst) {
  if (inst.H.rows() != 1) throw Error("scalar_coefficients: n_z must be 1");
  return build_coefficients(inst.P, inst.H.row(0), inst.R(0, 0), inst.z(0), inst.xbar);
}

CheckResult check_commutativity(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"commutativity", instances};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(uniform_int(1, 20, rng), uniform_int(1, 5, rng), rng);
    std::vector<Matrix> a;
    for (int i = 0; i <= 10; ++i) a.push_back(drift_matrix_A(inst.P, inst.H, inst.R, 0.1 * i));
    for (int i = 0; i <= 10; ++i) {
      for (int j = i + 1; j <= 10; ++j) {
        const double scale = a[i].norm() * a[j].norm();
        const double c = (a[i] * a[j] - a[j] * a[i]).norm();
        res.max_error = std::max(res.max_error, scale > 0.0 ? c / scale : c);
      }
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_transition(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"transition", instances};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(uniform_int(1, 20, rng), 1, rng);
    const auto c = scalar_coefficients(inst);
    const auto [l0, l1] = random_interval(t, rng);
    const Matrix oracle = matrix_exponential(quadrature_of_A(inst, l1, l0));
    res.max_error = std::max(res.max_error, relative(transition_matrix(c, l1, l0), oracle));
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_psi(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"psi", instances};
  const QuadratureSpec spec{1e-14, 1e-12, 50};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(uniform_int(1, 10, rng), 1, rng);
    const auto c = scalar_coefficients(inst);
    const auto [l0, l1] = random_interval(t, rng);
    for (int i = 0; i < 5; ++i) {
      const Vector oracle = quadrature_inhomogeneous(c, i, l1, l0, spec);
      res.max_error = std::max(res.max_error, relative(psi_term(c, i, l1, l0), oracle));
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_rk4(int instances, Rng& rng, int rk4_steps) {
  const auto start = Clock::now();
  CheckResult res{"rk4", instances};
  constexpr int kDims[] = {1, 2, 5, 10, 50};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(kDims[t % 5], 1, rng);
    const auto c = scalar_coefficients(inst);
    const auto [l0, l1] = random_interval(t / 5, rng);
    const Vector x0 = inst.xbar + inst.P.llt().matrixL() * standard_normal(c.dim(), rng);
    const Vector oracle =
        integrate_flow_numeric(frozen_drift(c), x0, l0, l1, rk4_steps, Integrator::rk4);
    res.max_error = std::max(res.max_error, relative(apply_flow(c, x0, l1, l0), oracle));
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_kalman(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"kalman", instances};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(uniform_int(1, 20, rng), 1, rng);
    const auto c = scalar_coefficients(inst);
    const auto post = kalman_posterior(inst.P, inst.H, inst.R, inst.z, inst.xbar);
    const auto map = analytic_flow_map(c, 1.0, 0.0);
    const Matrix phi = map.transition();
    res.max_error = std::max(res.max_error, relative(map.apply(inst.xbar), post.mean));
    res.max_error =
        std::max(res.max_error, relative(phi * inst.P * phi.transpose(), post.covariance));
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_semigroup(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"semigroup", instances};
  for (int t = 0; t < instances; ++t) {
    const int n = uniform_int(1, 10, rng);
    const auto inst = random_flow_instance(n, 1, rng);
    const Matrix H = inst.H;

    SystemModel model;
    model.name = "linear";
    model.n_x = n;
    model.n_z = 1;
    model.transition = [](const Vector& x, int) { return x; };
    model.transition_jacobian = [n](const Vector&, int) { return Matrix::Identity(n, n); };
    model.measurement = [H](const Vector& x) { return Vector(H * x); };
    model.measurement_jacobian = [H](const Vector&) { return H; };
    model.set_noise(Matrix::Zero(n, n), inst.R);

    ParticleEnsemble ens;
    ens.particles.resize(n, 20);
    const Matrix L = inst.P.llt().matrixL();
    for (int j = 0; j < 20; ++j) ens.particles.col(j) = inst.xbar + L * standard_normal(n, rng);

    FilterConfig one;
    one.variant = Variant::aedh;
    const auto ref = aedh_update(ens, inst.P, model, inst.z, one);
    for (int steps : {2, 10, 100}) {
      FilterConfig cfg;
      cfg.variant = Variant::naedh;
      cfg.lambda_steps = steps;
      const auto got = naedh_update(ens, inst.P, model, inst.z, cfg);
      for (int j = 0; j < 20; ++j) {
        const double scale = std::max(1.0, ref.particles.col(j).norm());
        const double diff = (got.particles.col(j) - ref.particles.col(j)).norm() / scale;
        res.max_error = std::max(res.max_error, diff);
      }
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

CheckResult check_euler(int instances, Rng& rng) {
  const auto start = Clock::now();
  CheckResult res{"euler", instances};
  for (int t = 0; t < instances; ++t) {
    const auto inst = random_flow_instance(uniform_int(1, 10, rng), 1, rng);
    const auto c = scalar_coefficients(inst);
    const Vector x0 = inst.xbar + inst.P.llt().matrixL() * standard_normal(c.dim(), rng);
    const Vector exact = apply_flow(c, x0, 1.0, 0.0);
    const auto drift = frozen_drift(c);
    double err[3];
    int k = 0;
    for (int steps : {10, 100, 1000})
      err[k++] =
          (integrate_flow_numeric(drift, x0, 0.0, 1.0, steps, Integrator::euler) - exact).norm();
    const double worst = std::max(err[1] / err[0], err[2] / err[1]);
    res.max_error = std::max(res.max_error, std::isfinite(worst) ? worst : 1.0);
  }
  res.seconds = seconds_since(start);
  return res;
}

}  // namespace pflow
