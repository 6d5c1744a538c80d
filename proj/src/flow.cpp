#include "pflow/flow.hpp"

#include <cmath>

namespace pflow {

namespace {

void check_interval(double lambda, double lambda0) {
  if (!(lambda0 >= 0.0 && lambda0 <= lambda && lambda <= 1.0))
    throw Error("flow interval must satisfy 0 <= lambda0 <= lambda <= 1");
}

// int_0^1 u^j (1 + eps u)^{-alpha} du by the binomial series; eps < 1.
double binomial_moment(int j, double alpha, double eps) {
  double coef = 1.0;  // binom(-alpha, n) eps^n
  double sum = 1.0 / (j + 1);
  for (int n = 1; n < 80; ++n) {
    coef *= (-alpha - (n - 1)) / n * eps;
    const double term = coef / (j + n + 1);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

namespace detail {

FlowScalars flow_scalars_closed(double p, double r, double lambda, double lambda0) {
  const double k0 = lambda0 * p + r;
  const double k1 = lambda * p + r;
  const double eps = p * (lambda - lambda0) / k0;
  const double sm1 = std::expm1(-0.5 * std::log1p(eps));
  const double s = 1.0 + sm1;
  auto q = [&](double t) { return p * p * t * t - 4.0 * p * r * t - 8.0 * r * r; };

  FlowScalars out;
  out.phi = sm1 / p;
  out.psi[0] = 2.0 / 3.0 * (k1 - k0 * s) / p;
  out.psi[1] = sm1 / p;
  out.psi[2] = ((2.0 * r - p * lambda) - s * (2.0 * r - p * lambda0)) / p;
  out.psi[3] = ((p * lambda + 2.0 * r) / k1 - s * (p * lambda0 + 2.0 * r) / k0) / p;
  out.psi[4] = (q(lambda) / k1 - s * q(lambda0) / k0) / (3.0 * p);
  return out;
}

FlowScalars flow_scalars_series(double p, double r, double lambda, double lambda0) {
  const double k0 = lambda0 * p + r;
  const double d = lambda - lambda0;
  const double eps = p * d / k0;
  const double s = 1.0 / std::sqrt(1.0 + eps);

  const double j0_neg = binomial_moment(0, -0.5, eps);
  const double j0_half = binomial_moment(0, 0.5, eps);
  const double j1_half = binomial_moment(1, 0.5, eps);
  const double j0_3h = binomial_moment(0, 1.5, eps);
  const double j1_3h = binomial_moment(1, 1.5, eps);
  const double j2_3h = binomial_moment(2, 1.5, eps);

  FlowScalars out;
  out.psi[0] = d * s * j0_neg;
  out.psi[1] = -0.5 * d * s / k0 * j0_half;
  out.psi[2] = -1.5 * p * d * s / k0 * (lambda0 * j0_half + d * j1_half);
  out.psi[3] = 0.5 * p * d * s / (k0 * k0) * (lambda0 * j0_3h + d * j1_3h);
  out.psi[4] = 0.5 * p * p * d * s / (k0 * k0) *
               (lambda0 * lambda0 * j0_3h + 2.0 * lambda0 * d * j1_3h + d * d * j2_3h);
  out.phi = out.psi[1];
  return out;
}

FlowScalars flow_scalars(double p, double r, double lambda, double lambda0) {
  if (lambda == lambda0) return {};
  const double eps = p * (lambda - lambda0) / (lambda0 * p + r);
  return eps < kSeriesSwitch ? flow_scalars_series(p, r, lambda, lambda0)
                             : flow_scalars_closed(p, r, lambda, lambda0);
}

}  // namespace detail

FlowCoefficients build_coefficients_unchecked(const Matrix& P, const RowVector& H, double R,
                                              double z, const Vector& xbar) {
  if (!(R > 0.0)) throw Error("flow coefficients: R must be positive");
  if (P.rows() != P.cols() || H.size() != P.rows() || xbar.size() != P.rows())
    throw Error("flow coefficients: dimension mismatch");

  FlowCoefficients c;
  c.P = P;
  c.H = H;
  c.r = R;
  c.z = z;
  c.xbar = xbar;
  c.PHt = P * H.transpose();
  c.p = H.dot(c.PHt);
  c.M = c.PHt * H;
  c.w = c.PHt * (z / R);
  c.degenerate = H.size() == 0 || H.cwiseAbs().maxCoeff() < kDegenerateH;
  if (!c.degenerate && !(c.p > 0.0)) throw Error("flow coefficients: H P H^T is not positive");
  return c;
}

FlowCoefficients build_coefficients(const Matrix& P, const RowVector& H, double R, double z,
                                    const Vector& xbar) {
  if (!is_spd(P)) throw Error("flow coefficients: P is not symmetric positive definite");
  return build_coefficients_unchecked(P, H, R, z, xbar);
}

double k_eval(const FlowCoefficients& c, double lambda) { return lambda * c.p + c.r; }

namespace {

Eigen::LDLT<Matrix> factor_inner(const Matrix& S, const Matrix& R, double lambda) {
  Eigen::LDLT<Matrix> ldlt(lambda * S + R);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw Error("drift_matrix_A: lambda H P H^T + R is not invertible");
  return ldlt;
}

}  // namespace

Matrix drift_matrix_A(const Matrix& P, const Matrix& H, const Matrix& R, double lambda) {
  const Matrix PHt = P * H.transpose();
  return -0.5 * PHt * factor_inner(H * PHt, R, lambda).solve(H);
}

// b is evaluated in measurement space,
//   b = P H^T (lambda S + R)^{-1} R u,
//   u = 1/2 (R^{-1} z + (lambda S + R)^{-1} (z - H xbar)),  S = H P H^T,
// which equals the product form but does not cancel when S >> R.
Drift drift_coefficients(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                         const Vector& xbar, double lambda) {
  const Matrix PHt = P * H.transpose();
  const auto inner = factor_inner(H * PHt, R, lambda);
  const Vector u = 0.5 * (R.ldlt().solve(z) + inner.solve(z - H * xbar));
  Drift d;
  d.A = -0.5 * PHt * inner.solve(H);
  d.b = PHt * inner.solve(R * u);
  return d;
}

Vector drift_vector_b(const Matrix& P, const Matrix& H, const Matrix& R, const Vector& z,
                      const Vector& xbar, double lambda) {
  return drift_coefficients(P, H, R, z, xbar, lambda).b;
}

double beta_factor(const FlowCoefficients& c, double lambda, double lambda0) {
  check_interval(lambda, lambda0);
  const double k0 = k_eval(c, lambda0);
  const double eps = c.p * (lambda - lambda0) / k0;
  if (eps == 0.0) return -(lambda - lambda0) / (2.0 * k0);
  return -std::log1p(eps) / (2.0 * c.p);
}

Matrix transition_matrix(const FlowCoefficients& c, double lambda, double lambda0) {
  return analytic_flow_map(c, lambda, lambda0).transition();
}

Vector psi_term(const FlowCoefficients& c, int index, double lambda, double lambda0) {
  if (index < 0 || index > 4) throw Error("psi_term: index must be in 0..4");
  check_interval(lambda, lambda0);
  if (c.degenerate) return Vector::Zero(c.dim());
  const auto s = detail::flow_scalars(c.p, c.r, lambda, lambda0);
  if (index % 2 == 0) return s.psi[index] * c.w;
  return (s.psi[index] * c.H.dot(c.xbar)) * c.PHt;
}

Vector inhomogeneous_sum(const FlowCoefficients& c, double lambda, double lambda0) {
  return analytic_flow_map(c, lambda, lambda0).offset;
}

AffineFlowMap analytic_flow_map(const FlowCoefficients& c, double lambda, double lambda0) {
  check_interval(lambda, lambda0);
  const auto n = c.dim();
  AffineFlowMap map;
  map.H = c.H;
  if (c.degenerate) {
    map.direction = Vector::Zero(n);
    map.offset = Vector::Zero(n);
    return map;
  }
  if (lambda == lambda0) {
    map.direction = Vector::Zero(n);
    map.offset = Vector::Zero(n);
    return map;
  }
  // The five Psi terms collected into one closed form,
  //   d = P H^T (g (z - H xbar) - phi H xbar),
  //   g = lambda/k(lambda) - s lambda0/k(lambda0) = r (lambda - lambda0)/(k0 k1) - p phi lambda0/k0.
  // Summing the terms one by one loses about p/r digits to cancellation.
  const double k0 = k_eval(c, lambda0);
  const double k1 = k_eval(c, lambda);
  const double eps = c.p * (lambda - lambda0) / k0;
  const double phi = std::expm1(-0.5 * std::log1p(eps)) / c.p;
  const double g = c.r * (lambda - lambda0) / (k0 * k1) - c.p * phi * lambda0 / k0;
  const double hx = c.H.dot(c.xbar);
  map.direction = phi * c.PHt;
  map.offset = (g * (c.z - hx) - phi * hx) * c.PHt;
  return map;
}

Vector apply_flow(const FlowCoefficients& c, const Vector& x, double lambda, double lambda0) {
  return analytic_flow_map(c, lambda, lambda0).apply(x);
}

Matrix AffineFlowMap::transition() const {
  const auto n = direction.size();
  return Matrix::Identity(n, n) + direction * H;
}

Vector AffineFlowMap::apply(const Vector& x) const { return x + direction * H.dot(x) + offset; }

void AffineFlowMap::apply_in_place(Matrix& particles) const {
  const RowVector hx = H * particles;
  particles.noalias() += direction * hx;
  particles.colwise() += offset;
}

}  // namespace pflow
