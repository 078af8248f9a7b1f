#pragma once

// Dense complex linear algebra and deterministic random streams shared by all
// modules. Matrices are Eigen dynamic types; every higher-level operation
// validates dimension conformance and throws DimensionError instead of
// relying on Eigen's debug asserts.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace ris {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Deterministic random stream: (seed, stream) fully determines the sequence,
// bit-identically across platforms. The engine is std::mt19937_64 (pinned by
// the standard); uniform and normal variates are derived from raw 64-bit
// words here because the std distribution algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  // Uniform on (lo, hi]; used for angles on (-pi, pi].
  double uniform_angle(double lo, double hi);
  // Standard normal via Box-Muller (pairs; second value cached).
  double normal();
  // CN(0, 1): real and imaginary parts are N(0, 1/2).
  std::complex<double> complex_gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; combines ids into a stream index so that harness
// trials keyed by (salt, k, n, trial) never share a stream.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t substream(std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0, std::uint64_t d = 0);

// rows x cols matrix of i.i.d. CN(0,1) entries, filled row-major.
// Throws DimensionError if rows or cols < 1.
CMat gaussian_complex(Rng& rng, int rows, int cols);

// Thin SVD with the convention a = u * diag(singular_values) * v,
// i.e. v has orthonormal *rows* (it is the adjoint of the usual V factor).
struct SvdResult {
  CMat u;
  RVec singular_values;  // sorted descending
  CMat v;
};
SvdResult svd(const CMat& a);

// Number of singular values exceeding tol * max(singular_values).
// Zero matrices have rank 0 for any tol > 0.
int numeric_rank(const RVec& singular_values, double tol = 1e-10);

}  // namespace ris
