#pragma once

// Joint transmit-signal / phase-shift solver. The outer loop is an augmented
// Lagrangian method handling the transmit power constraint ||x||^2 <= 1; each
// subproblem is solved by Riemannian conjugate gradients on C^m x (unit
// circles)^n with Hestenes-Stiefel directions and backtracking line search.

#include "ris/channel.hpp"
#include "ris/manifold.hpp"
#include "ris/numerics.hpp"

#include <iosfwd>
#include <vector>

namespace ris {

struct AlmParams {
  double eps0 = 1e-3;        // initial subproblem gradient tolerance
  double eps_min = 1e-6;     // final gradient tolerance
  double theta_eps = 0.79432823472428149;  // 1000^(-1/30): eps0 -> eps_min in 30 steps
  double rho0 = 1.0;         // initial penalty weight
  double theta_rho = 10.0;   // penalty growth factor
  double theta_sigma = 0.8;  // required violation decay to keep rho fixed
  double lambda0 = 1.0;      // initial multiplier
  double lambda_max = 1e4;   // multiplier clip ceiling
  double d_min = 1e-6;       // squared-distance stop threshold on (x, phi)
  double armijo_c = 1e-4;
  double step_shrink = 0.5;
  double alpha_init = 1.0;
  int max_backtracks = 50;
  int max_inner_iters = 2000;
  int max_outer_iters = 60;

  // Throws std::invalid_argument when a field is outside its legal range.
  void validate() const;
};

enum class StopReason { kConverged, kMaxOuterIters, kMaxInnerIters };
const char* to_string(StopReason r);

// Joint solver output. `residual` is the *data* misfit
// ||target - sqrt(p)(H diag(phi) G + F) x||, not the Lagrangian value.
struct SlpSolution {
  CVec x;
  PhaseVector phases;
  double residual = 0.0;
  bool feasible = false;
  int outer_iters = 0;
  int inner_iters = 0;
  StopReason stop_reason = StopReason::kMaxOuterIters;
  bool stalled = false;
};

inline constexpr double kDefaultFeasibilityDelta = 1e-3;

// Outer-loop state, one snapshot per augmented Lagrangian iteration.
struct SolverState {
  CVec x;
  PhaseVector phases;
  double lambda = 0.0;
  double rho = 0.0;
  double eps = 0.0;
  double sigma_viol = 0.0;
  int outer_iter = 0;
  int inner_iters = 0;
};

// ||target - sqrt(p)(H diag(phi) G + F) x||^2.
double objective(const RisChannel& ch, const CVec& target, const CVec& x,
                 const PhaseVector& phases);

// f + (rho/2) * max(0, lambda/rho + ||x||^2 - 1)^2.
double augmented_lagrangian(double f, const CVec& x, double lambda,
                            double rho);

// Gradient of the augmented Lagrangian in x (real gradient in complex form):
// -2 sqrt(p) A^H (target - sqrt(p) A x) + 2 max(0, lambda + rho(||x||^2-1)) x
// with A = H diag(phi) G + F.
CVec grad_x(const RisChannel& ch, const CVec& target, const CVec& x,
            const PhaseVector& phases, double lambda, double rho);

// Ambient (unprojected) gradient of the data term in phi:
// -2 sqrt(p) (H diag(G x))^H (target - sqrt(p)(F x + H diag(G x) phi)).
CVec grad_phi_euclidean(const RisChannel& ch, const CVec& target,
                        const CVec& x, const PhaseVector& phases);

// Clamp to [lo, hi]; throws std::invalid_argument if lo > hi.
double clip(double x, double lo, double hi);

struct RcgResult {
  CVec x;
  PhaseVector phases;
  double grad_norm = 0.0;
  int iters = 0;
  bool stalled = false;  // line search exhausted max_backtracks
};

// One accepted line-search step per entry; tests use this to audit the
// sufficient-decrease guarantee.
struct RcgTraceEntry {
  double l_before = 0.0;
  double l_after = 0.0;
  double alpha = 0.0;
  double grad_norm = 0.0;
};

// Minimizes the augmented Lagrangian at fixed (lambda, rho) until the joint
// gradient norm drops below eps or max_inner_iters steps were taken. Returns
// the first iterate meeting the tolerance (a stationary start returns with
// iters == 0). With optimize_x = false, x stays fixed, the power penalty is
// dropped (it is constant) and only the phases move.
RcgResult rcg_solve(const RisChannel& ch, const CVec& target, const CVec& x0,
                    const PhaseVector& phases0, double lambda, double rho,
                    double eps, const AlmParams& params, bool optimize_x = true,
                    std::vector<RcgTraceEntry>* trace = nullptr);

// Full augmented Lagrangian loop. Writes one JSON object per outer iteration
// to `diagnostics` when given, with keys k, residual, x_norm2, lambda, rho,
// eps, inner_iters. The returned x always satisfies ||x||^2 <= 1 + 1e-6: in
// the rare case the converged iterate is slightly outside, it is rescaled to
// unit norm and the residual recomputed.
SlpSolution alm_solve(const RisChannel& ch, const CVec& target, const CVec& x0,
                      const PhaseVector& phases0, const AlmParams& params,
                      std::ostream* diagnostics = nullptr);

}  // namespace ris
