#include "pflow/oracle.hpp"

#include <cmath>

namespace pflow {

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error("matrix_exponential: matrix must be square");
  const auto n = m.rows();
  const double norm = n == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm)) throw Error("matrix_exponential: non-finite input");

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = m / std::ldexp(1.0, squarings);

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.norm() <= 1e-18 * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

namespace {

struct SimpsonNode {
  double a, b;
  Vector fa, fm, fb, whole;
};

Vector simpson(double a, double b, const Vector& fa, const Vector& fm, const Vector& fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

Vector simpson_recurse(const std::function<Vector(double)>& f, const SimpsonNode& node,
                       double tol, int depth, const QuadratureSpec& spec) {
  const double m = 0.5 * (node.a + node.b);
  const double lm = 0.5 * (node.a + m);
  const double rm = 0.5 * (m + node.b);
  const Vector flm = f(lm);
  const Vector frm = f(rm);
  const Vector left = simpson(node.a, m, node.fa, flm, node.fm);
  const Vector right = simpson(m, node.b, node.fm, frm, node.fb);
  const Vector delta = left + right - node.whole;
  // A few forced levels guard against an accidental match on the first split.
  if (depth >= 4 && delta.norm() <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= spec.max_depth)
    throw QuadratureError("adaptive_simpson: subdivision limit exceeded");
  return simpson_recurse(f, {node.a, m, node.fa, flm, node.fm, left}, 0.5 * tol, depth + 1, spec) +
         simpson_recurse(f, {m, node.b, node.fm, frm, node.fb, right}, 0.5 * tol, depth + 1, spec);
}

}  // namespace

Vector adaptive_simpson(const std::function<Vector(double)>& f, double a, double b,
                        const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0 && spec.rel_tol > 0.0))
    throw Error("adaptive_simpson: tolerances must be positive");
  const Vector fa = f(a);
  if (a == b) return Vector::Zero(fa.size());
  const Vector fm = f(0.5 * (a + b));
  const Vector fb = f(b);
  const Vector whole = simpson(a, b, fa, fm, fb);
  const double tol = std::max(spec.abs_tol, spec.rel_tol * whole.norm());
  return simpson_recurse(f, {a, b, fa, fm, fb, whole}, tol, 0, spec);
}

DriftFn frozen_drift(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                     const Vector& xbar) {
  const Matrix PHt = P * H.transpose();
  const Matrix HPHt = H * PHt;
  const Vector v = PHt * R.ldlt().solve(z);
  return [PHt, HPHt, R, H, v, xbar](double lambda, const Vector& x) -> Vector {
    const Eigen::LDLT<Matrix> inner((lambda * HPHt + R).eval());
    auto apply_a = [&](const Vector& y) -> Vector { return -0.5 * PHt * inner.solve(H * y); };
    const Vector u = v + lambda * apply_a(v) + apply_a(xbar);
    const Vector b = u + 2.0 * lambda * apply_a(u);
    return apply_a(x) + b;
  };
}

DriftFn frozen_drift(const FlowCoefficients& c) {
  return frozen_drift(c.P, c.H, Matrix::Constant(1, 1, c.r), Vector::Constant(1, c.z), c.xbar);
}

Vector integrate_flow_numeric(const DriftFn& drift, const Vector& x0, double lambda0,
                              double lambda1, int steps, Integrator method) {
  if (steps < 1) throw Error("integrate_flow_numeric: steps must be >= 1");
  const double h = (lambda1 - lambda0) / steps;
  Vector x = x0;
  for (int i = 0; i < steps; ++i) {
    const double t = lambda0 + i * h;
    if (method == Integrator::euler) {
      x += h * drift(t, x);
    } else {
      const Vector k1 = drift(t, x);
      const Vector k2 = drift(t + 0.5 * h, x + 0.5 * h * k1);
      const Vector k3 = drift(t + 0.5 * h, x + 0.5 * h * k2);
      const Vector k4 = drift(t + h, x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return x;
}

Matrix drift_integral(const FlowCoefficients& c, double lambda, double lambda0) {
  return -0.5 * (c.M / c.p) * std::log(k_eval(c, lambda) / k_eval(c, lambda0));
}

Vector quadrature_inhomogeneous(const FlowCoefficients& c, int index, double lambda,
                                double lambda0, const QuadratureSpec& spec) {
  if (index < 0 || index > 4) throw Error("quadrature_inhomogeneous: index must be in 0..4");
  const auto n = c.dim();
  if (lambda == lambda0) return Vector::Zero(n);

  const Matrix R = Matrix::Constant(1, 1, c.r);
  const Matrix H = c.H;
  const Vector w = c.P * c.H.transpose() * (c.z / c.r);
  const Matrix M = c.P * c.H.transpose() * c.H;
  const double p = (c.H * c.P * c.H.transpose())(0, 0);
  const double k_lambda = lambda * p + c.r;

  auto integrand = [&](double tau) -> Vector {
    const Matrix A = drift_matrix_A(c.P, H, R, tau);
    Vector b;
    switch (index) {
      case 0: b = w; break;
      case 1: b = A * c.xbar; break;
      case 2: b = 3.0 * tau * (A * w); break;
      case 3: b = 2.0 * tau * (A * (A * c.xbar)); break;
      default: b = 2.0 * tau * tau * (A * (A * w)); break;
    }
    const double ratio = std::sqrt((tau * p + c.r) / k_lambda);
    return b + M * b * ((ratio - 1.0) / p);
  };
  return adaptive_simpson(integrand, lambda0, lambda, spec);
}

GaussianBelief kalman_posterior(const Matrix& P, const Matrix& H, const Matrix& R,
                                const Vector& z, const Vector& xbar) {
  const Matrix PHt = P * H.transpose();
  const Matrix S = H * PHt + R;
  const Matrix K = S.ldlt().solve(PHt.transpose()).transpose();
  GaussianBelief post;
  post.mean = xbar + K * (z - H * xbar);
  const auto n = P.rows();
  post.covariance = symmetrize((Matrix::Identity(n, n) - K * H) * P);
  return post;
}

double commutator_norm(const Matrix& P, const Matrix& H, const Matrix& R, double lambda,
                       double tau) {
  const Matrix a = drift_matrix_A(P, H, R, lambda);
  const Matrix b = drift_matrix_A(P, H, R, tau);
  return (a * b - b * a).norm();
}

}  // namespace pflow
