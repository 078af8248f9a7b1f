#include "ris/optimizer.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace ris {

namespace {

double real_dot(const CVec& a, const CVec& b) {
  return a.size() == 0 ? 0.0 : a.dot(b).real();
}

// Shared evaluation state for one (lambda, rho) subproblem.
struct Engine {
  const RisChannel& ch;
  const CVec& target;
  double sp;  // sqrt(p)
  bool opt_x;
  double lambda;
  double rho;

  Engine(const RisChannel& c, const CVec& t, bool ox, double l, double r)
      : ch(c), target(t), sp(std::sqrt(c.p)), opt_x(ox), lambda(l), rho(r) {}

  double penalty(double x_norm2) const {
    if (!opt_x) return 0.0;  // constant when x is fixed
    double v = lambda / rho + x_norm2 - 1.0;
    double m = v > 0.0 ? v : 0.0;
    return 0.5 * rho * m * m;
  }

  double f_value(const CVec& x, const CVec& phi) const {
    CVec u = ch.g * x;
    u.array() *= phi.array();
    CVec r = target - sp * (ch.h * u + ch.f * x);
    return r.squaredNorm();
  }

  double l_value(const CVec& x, const CVec& phi) const {
    return f_value(x, phi) + penalty(x.squaredNorm());
  }

  // L plus gradients; gphi comes back projected onto the tangent space.
  void eval(const CVec& x, const CVec& phi, double& l_out, CVec& gx,
            CVec& gphi) const {
    CVec u = ch.g * x;                                 // G x
    CVec mixed = u.cwiseProduct(phi);                  // diag(phi) G x
    CVec r = target - sp * (ch.h * mixed + ch.f * x);  // misfit
    CVec w = ch.h.adjoint() * r;
    gphi = (-2.0 * sp) * u.conjugate().cwiseProduct(w);
    gphi = project_tangent_core(phi, gphi);
    double x_norm2 = x.squaredNorm();
    if (opt_x) {
      gx = (-2.0 * sp) *
           (ch.g.adjoint() * phi.conjugate().cwiseProduct(w) +
            ch.f.adjoint() * r);
      double v = lambda + rho * (x_norm2 - 1.0);
      if (v > 0.0) gx += (2.0 * v) * x;
    } else {
      gx = CVec::Zero(x.size());
    }
    l_out = r.squaredNorm() + penalty(x_norm2);
  }
};

RcgResult rcg_core(const Engine& eng, const CVec& x0, const CVec& phi0,
                   double eps, const AlmParams& p,
                   std::vector<RcgTraceEntry>* trace) {
  const Eigen::Index n = phi0.size();
  CVec x = x0;
  CVec phi = phi0;
  double l_cur;
  CVec gx, gphi;
  eng.eval(x, phi, l_cur, gx, gphi);
  double gn2 = gx.squaredNorm() + gphi.squaredNorm();
  CVec dx = -gx;
  CVec dphi = -gphi;
  int iters = 0;
  bool stalled = false;
  while (std::sqrt(gn2) >= eps && iters < p.max_inner_iters) {
    // Reset to steepest descent unless d is a sufficient-descent direction.
    double gd = real_dot(gx, dx) + real_dot(gphi, dphi);
    if (!(gd <= -p.armijo_c * gn2)) {
      dx = -gx;
      dphi = -gphi;
    }
    double alpha = p.alpha_init;
    bool accepted = false;
    CVec x_new = x, phi_new = phi;
    double l_new = l_cur;
    for (int t = 0; t <= p.max_backtracks; ++t) {
      if (eng.opt_x) x_new = x + alpha * dx;
      if (n > 0) phi_new = retract_core(phi + alpha * dphi);
      l_new = eng.l_value(x_new, phi_new);
      if (l_new <= l_cur - p.armijo_c * alpha * gn2) {
        accepted = true;
        break;
      }
      alpha *= p.step_shrink;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    if (trace) trace->push_back({l_cur, l_new, alpha, std::sqrt(gn2)});
    double l_chk;
    CVec gx_new, gphi_new;
    eng.eval(x_new, phi_new, l_chk, gx_new, gphi_new);
    // Hestenes-Stiefel with the previous gradient and direction transported
    // to the new tangent space; degenerate curvature restarts the direction.
    CVec t_gphi = n > 0 ? project_tangent_core(phi_new, gphi) : gphi;
    CVec t_dphi = n > 0 ? project_tangent_core(phi_new, dphi) : dphi;
    CVec yx = gx_new - gx;
    CVec yphi = gphi_new - t_gphi;
    double num = real_dot(gx_new, yx) + real_dot(gphi_new, yphi);
    double den = real_dot(dx, yx) + real_dot(t_dphi, yphi);
    double beta = std::abs(den) < 1e-14 ? 0.0 : num / den;
    dx = -gx_new + beta * dx;
    dphi = -gphi_new + beta * t_dphi;
    x.swap(x_new);
    phi.swap(phi_new);
    gx.swap(gx_new);
    gphi.swap(gphi_new);
    l_cur = l_new;
    gn2 = gx.squaredNorm() + gphi.squaredNorm();
    ++iters;
  }
  RcgResult out;
  out.x = std::move(x);
  out.phases = PhaseVector::from_unit(phi);
  out.grad_norm = std::sqrt(gn2);
  out.iters = iters;
  out.stalled = stalled;
  return out;
}

void check_problem_dims(const RisChannel& ch, const CVec& target, const CVec& x,
                        int n_phases, const char* who) {
  if (target.size() != ch.k()) {
    throw DimensionError(std::string(who) + ": target length must equal k");
  }
  if (x.size() != ch.m()) {
    throw DimensionError(std::string(who) + ": x length must equal m");
  }
  if (n_phases != ch.n()) {
    throw DimensionError(std::string(who) + ": phase count must equal n");
  }
}

}  // namespace

void AlmParams::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (!(eps_min > 0.0) || !(eps0 >= eps_min)) fail("AlmParams: need eps0 >= eps_min > 0");
  if (!(theta_eps > 0.0 && theta_eps < 1.0)) fail("AlmParams: theta_eps must lie in (0,1)");
  if (!(rho0 > 0.0)) fail("AlmParams: rho0 must be > 0");
  if (!(theta_rho > 1.0)) fail("AlmParams: theta_rho must be > 1");
  if (!(theta_sigma > 0.0 && theta_sigma < 1.0)) fail("AlmParams: theta_sigma must lie in (0,1)");
  if (!(lambda_max > 0.0) || lambda0 < 0.0 || lambda0 > lambda_max) {
    fail("AlmParams: need 0 <= lambda0 <= lambda_max");
  }
  if (!(d_min > 0.0)) fail("AlmParams: d_min must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("AlmParams: armijo_c must lie in (0,1)");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) fail("AlmParams: step_shrink must lie in (0,1)");
  if (!(alpha_init > 0.0)) fail("AlmParams: alpha_init must be > 0");
  if (max_backtracks < 0) fail("AlmParams: max_backtracks must be >= 0");
  if (max_inner_iters < 1) fail("AlmParams: max_inner_iters must be >= 1");
  if (max_outer_iters < 1) fail("AlmParams: max_outer_iters must be >= 1");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxOuterIters: return "max_outer_iters";
    case StopReason::kMaxInnerIters: return "max_inner_iters";
  }
  return "unknown";
}

double objective(const RisChannel& ch, const CVec& target, const CVec& x,
                 const PhaseVector& phases) {
  check_problem_dims(ch, target, x, phases.size(), "objective");
  return Engine(ch, target, true, 0.0, 1.0).f_value(x, phases.values());
}

double augmented_lagrangian(double f, const CVec& x, double lambda,
                            double rho) {
  double v = lambda / rho + x.squaredNorm() - 1.0;
  double m = v > 0.0 ? v : 0.0;
  return f + 0.5 * rho * m * m;
}

CVec grad_x(const RisChannel& ch, const CVec& target, const CVec& x,
            const PhaseVector& phases, double lambda, double rho) {
  check_problem_dims(ch, target, x, phases.size(), "grad_x");
  if (lambda < 0.0 || !(rho > 0.0)) {
    throw std::invalid_argument("grad_x: need lambda >= 0 and rho > 0");
  }
  const double sp = std::sqrt(ch.p);
  CVec u = ch.g * x;
  CVec mixed = u.cwiseProduct(phases.values());
  CVec r = target - sp * (ch.h * mixed + ch.f * x);
  CVec w = ch.h.adjoint() * r;
  CVec g = (-2.0 * sp) *
           (ch.g.adjoint() * phases.values().conjugate().cwiseProduct(w) +
            ch.f.adjoint() * r);
  double v = lambda + rho * (x.squaredNorm() - 1.0);
  if (v > 0.0) g += (2.0 * v) * x;
  return g;
}

CVec grad_phi_euclidean(const RisChannel& ch, const CVec& target, const CVec& x,
                        const PhaseVector& phases) {
  check_problem_dims(ch, target, x, phases.size(), "grad_phi_euclidean");
  const double sp = std::sqrt(ch.p);
  CVec u = ch.g * x;
  CVec mixed = u.cwiseProduct(phases.values());
  CVec r = target - sp * (ch.h * mixed + ch.f * x);
  return (-2.0 * sp) * u.conjugate().cwiseProduct(ch.h.adjoint() * r);
}

double clip(double x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clip: lo > hi");
  return x < lo ? lo : (x > hi ? hi : x);
}

RcgResult rcg_solve(const RisChannel& ch, const CVec& target, const CVec& x0,
                    const PhaseVector& phases0, double lambda, double rho,
                    double eps, const AlmParams& params, bool optimize_x,
                    std::vector<RcgTraceEntry>* trace) {
  params.validate();
  check_problem_dims(ch, target, x0, phases0.size(), "rcg_solve");
  if (lambda < 0.0 || !(rho > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("rcg_solve: need lambda >= 0, rho > 0, eps > 0");
  }
  Engine eng(ch, target, optimize_x, lambda, rho);
  return rcg_core(eng, x0, phases0.values(), eps, params, trace);
}

SlpSolution alm_solve(const RisChannel& ch, const CVec& target, const CVec& x0,
                      const PhaseVector& phases0, const AlmParams& params,
                      std::ostream* diagnostics) {
  params.validate();
  check_problem_dims(ch, target, x0, phases0.size(), "alm_solve");
  SolverState st;
  st.x = x0;
  st.phases = phases0;
  st.lambda = params.lambda0;
  st.rho = params.rho0;
  st.eps = params.eps0;
  st.sigma_viol = 0.0;
  CVec phi = phases0.values();
  int total_inner = 0;
  int outers = 0;
  StopReason reason = StopReason::kMaxOuterIters;
  bool stalled = false;
  for (int k = 0; k < params.max_outer_iters; ++k) {
    Engine eng(ch, target, true, st.lambda, st.rho);
    RcgResult inner = rcg_core(eng, st.x, phi, st.eps, params, nullptr);
    ++outers;
    total_inner += inner.iters;
    stalled = inner.stalled;
    double dist = (inner.x - st.x).squaredNorm() +
                  (inner.phases.values() - phi).squaredNorm();
    st.x = inner.x;
    st.phases = inner.phases;
    phi = inner.phases.values();
    st.outer_iter = k;
    st.inner_iters = inner.iters;
    double x_norm2 = st.x.squaredNorm();
    if (diagnostics) {
      nlohmann::json line = {{"k", k},
                             {"residual", std::sqrt(eng.f_value(st.x, phi))},
                             {"x_norm2", x_norm2},
                             {"lambda", st.lambda},
                             {"rho", st.rho},
                             {"eps", st.eps},
                             {"inner_iters", inner.iters}};
      *diagnostics << line.dump() << '\n';
    }
    if (dist < params.d_min && st.eps <= params.eps_min) {
      reason = StopReason::kConverged;
      break;
    }
    // Dual and schedule updates; sigma uses the pre-update multiplier.
    double viol = x_norm2 - 1.0;
    double lambda_old = st.lambda;
    st.lambda = clip(lambda_old + st.rho * viol, 0.0, params.lambda_max);
    double sigma_new = std::max(viol, -lambda_old / st.rho);
    st.eps = std::max(params.eps_min, params.theta_eps * st.eps);
    if (k > 0 && std::abs(sigma_new) > params.theta_sigma * std::abs(st.sigma_viol)) {
      st.rho *= params.theta_rho;
    }
    st.sigma_viol = sigma_new;
  }
  double x_norm2 = st.x.squaredNorm();
  if (x_norm2 > 1.0) st.x /= std::sqrt(x_norm2);
  SlpSolution sol;
  sol.x = st.x;
  sol.phases = st.phases;
  sol.residual = std::sqrt(objective(ch, target, sol.x, sol.phases));
  sol.feasible = sol.residual < kDefaultFeasibilityDelta;
  sol.outer_iters = outers;
  sol.inner_iters = total_inner;
  sol.stop_reason = reason;
  sol.stalled = stalled;
  return sol;
}

}  // namespace ris
