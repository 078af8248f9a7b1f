#include "ris/numerics.hpp"

#include <cmath>

namespace ris {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                        std::uint64_t d) {
  std::uint64_t h = mix64(a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64(mix64(seed) ^ stream)) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  // Top 53 bits -> [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_angle(double lo, double hi) {
  // hi - uniform()*(hi - lo) lies in (lo, hi].
  return hi - uniform() * (hi - lo);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] keeps the log finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::complex<double> Rng::complex_gaussian() {
  const double s = M_SQRT1_2;
  double re = normal();
  double im = normal();
  return {s * re, s * im};
}

CMat gaussian_complex(Rng& rng, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("gaussian_complex: rows and cols must be >= 1");
  }
  CMat out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) = rng.complex_gaussian();
    }
  }
  return out;
}

SvdResult svd(const CMat& a) {
  Eigen::JacobiSVD<CMat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult r;
  r.u = dec.matrixU();
  r.singular_values = dec.singularValues();
  r.v = dec.matrixV().adjoint();
  return r;
}

int numeric_rank(const RVec& singular_values, double tol) {
  if (singular_values.size() == 0) return 0;
  double smax = singular_values.maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values[i] > tol * smax) ++rank;
  }
  return rank;
}

}  // namespace ris
