#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Random stream used everywhere a sample is drawn. One stream per
/// concurrent activity; never shared.
using Rng = std::mt19937_64;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws a standard-normal vector of length n.
Vector standard_normal(Eigen::Index n, Rng& rng);

/// Uniform variate on the open interval (0, 1).
double uniform_open(Rng& rng);

/// Forces exact symmetry: (M + M^T) / 2.
inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Lower Cholesky factor of a covariance. A zero matrix yields a zero
/// factor (noise-free test models); anything else must be SPD.
Matrix noise_sqrt(const Matrix& cov);

/// True when LLT succeeds on `m`.
bool is_spd(const Matrix& m);

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace pflow
