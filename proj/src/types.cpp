#include "pflow/types.hpp"

namespace pflow {

Vector standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  return u;
}

Matrix noise_sqrt(const Matrix& cov) {
  if (cov.rows() != cov.cols()) throw Error("covariance must be square");
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("covariance is not positive definite");
  return llt.matrixL();
}

bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.isApprox(m.transpose(), 1e-9)) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace pflow
