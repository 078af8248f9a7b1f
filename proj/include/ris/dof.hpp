#pragma once

// Degree-of-freedom bookkeeping: closed-form counts for joint and phase-only
// signaling, the achievable (DoF_x, DoF_phase) region as an exact 2-D
// polytope, scalar-channel rate approximations, and the predicted element
// count where feasibility transitions. All counts are exact half-integers.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ris {

// Exact rational with denominator 2, stored as twice the value.
struct Half {
  std::int64_t twice = 0;

  constexpr Half() = default;
  constexpr explicit Half(std::int64_t t) : twice(t) {}
  static constexpr Half whole(std::int64_t v) { return Half(2 * v); }

  double value() const { return 0.5 * static_cast<double>(twice); }
  std::string str() const;  // "4" or "3.5"

  friend constexpr bool operator==(Half a, Half b) { return a.twice == b.twice; }
  friend constexpr bool operator!=(Half a, Half b) { return a.twice != b.twice; }
  friend constexpr bool operator<(Half a, Half b) { return a.twice < b.twice; }
  friend constexpr bool operator<=(Half a, Half b) { return a.twice <= b.twice; }
  friend constexpr bool operator>(Half a, Half b) { return a.twice > b.twice; }
  friend constexpr bool operator>=(Half a, Half b) { return a.twice >= b.twice; }
  friend constexpr Half operator+(Half a, Half b) { return Half(a.twice + b.twice); }
  friend constexpr Half operator-(Half a, Half b) { return Half(a.twice - b.twice); }
};
constexpr Half min(Half a, Half b) { return a < b ? a : b; }

struct DofSpec {
  int m = 1;  // transmit antennas
  int n = 1;  // reflecting elements
  int k = 1;  // receive antennas
  int r = 0;  // direct-path rank, 0 <= r <= min(m, k)

  DofSpec() = default;
  DofSpec(int m, int n, int k, int r = 0);  // validates ranges
};

// Which min-term caps the joint count.
enum class DofLimiter { kInput, kRis, kReceiver };

// Joint signaling DoF: min(m + n/2 - 1/2, n, k) without a direct path,
// min(m + n/2, n + r, k) with one.
Half dof_joint(const DofSpec& spec);
DofLimiter dof_joint_limiter(const DofSpec& spec);

// Phase-only signaling DoF: min(n/2, k).
Half dof_phase_only(const DofSpec& spec);

struct HalfPlane {
  int a = 0;  // coefficient of DoF_x
  int b = 0;  // coefficient of DoF_phase
  Half c;     // a*x + b*y <= c
};

enum class RegionShape { kSimplex, kRectangle, kPentagon, kQuadrilateral };
const char* to_string(RegionShape s);

// Convex region of simultaneously achievable (DoF_x, DoF_phase) pairs:
// three substantive constraints plus the nonnegative orthant. Vertices are
// exact, deduplicated, counterclockwise, starting at the lexicographically
// smallest (always (0, 0)); collinear edge points are dropped.
struct DofRegion {
  std::vector<HalfPlane> constraints;
  std::vector<std::pair<Half, Half>> vertices;

  RegionShape shape() const;
};

DofRegion dof_region(const DofSpec& spec);

nlohmann::json region_to_json(const DofRegion& region);
// CSV lines "x,y" with header, matching the vertex order.
std::string region_vertices_csv(const DofRegion& region);

enum class RateKind { kNoncoherentMagnitude, kConstantEnvelope };

// High-SNR scalar-channel rate approximations in bits per use:
// noncoherent magnitude signaling 0.5*log2(snr) - 0.69, constant-envelope
// phase signaling 0.5*log2(snr * mag^2) + 1.1. Throws for snr <= 0 or, in
// the constant-envelope case, mag <= 0.
double siso_rate_approx(RateKind kind, double snr, double x_magnitude = 1.0);

// Predicted element count where joint feasibility for k targets flips:
// 2k - 2m + 1 without a direct path, 2k - 2m with one. Requires k >= m.
int expected_transition(int m, int k, bool direct);

}  // namespace ris
