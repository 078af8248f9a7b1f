#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ris/optimizer.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

using namespace ris;

namespace {

PhaseVector random_phases(Rng& rng, int n) {
  RVec angles(n);
  for (int i = 0; i < n; ++i) angles[i] = rng.uniform_angle(-M_PI, M_PI);
  return PhaseVector(angles);
}

CVec random_x(Rng& rng, int m, double norm) {
  CVec x = gaussian_complex(rng, m, 1);
  return x * (norm / x.norm());
}

// Ambient objective with phi as a free complex vector (no unit-modulus
// constraint); the oracle for grad_phi_euclidean.
double ambient_objective(const RisChannel& ch, const CVec& target,
                         const CVec& x, const CVec& phi) {
  CVec y = std::sqrt(ch.p) * (ch.h * phi.cwiseProduct(ch.g * x) + ch.f * x);
  return (target - y).squaredNorm();
}

CVec fd_grad_x(const RisChannel& ch, const CVec& target, const CVec& x,
               const PhaseVector& phases, double lambda, double rho,
               double h) {
  CVec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double parts[2];
    for (int c = 0; c < 2; ++c) {
      CVec xp = x, xm = x;
      std::complex<double> step = c == 0 ? std::complex<double>(h, 0.0)
                                         : std::complex<double>(0.0, h);
      xp[i] += step;
      xm[i] -= step;
      double fp = augmented_lagrangian(objective(ch, target, xp, phases), xp,
                                       lambda, rho);
      double fm = augmented_lagrangian(objective(ch, target, xm, phases), xm,
                                       lambda, rho);
      parts[c] = (fp - fm) / (2.0 * h);
    }
    g[i] = {parts[0], parts[1]};
  }
  return g;
}

CVec fd_grad_phi(const RisChannel& ch, const CVec& target, const CVec& x,
                 const PhaseVector& phases, double h) {
  CVec phi = phases.values();
  CVec g(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    double parts[2];
    for (int c = 0; c < 2; ++c) {
      CVec pp = phi, pm = phi;
      std::complex<double> step = c == 0 ? std::complex<double>(h, 0.0)
                                         : std::complex<double>(0.0, h);
      pp[i] += step;
      pm[i] -= step;
      parts[c] = (ambient_objective(ch, target, x, pp) -
                  ambient_objective(ch, target, x, pm)) /
                 (2.0 * h);
    }
    g[i] = {parts[0], parts[1]};
  }
  return g;
}

}  // namespace

TEST_CASE("objective values") {
  Rng rng(1);
  RisChannel ch = sample_channel(rng, 2, 5, 4, true, 2.0);
  CVec x = random_x(rng, 2, 0.8);
  PhaseVector ph = random_phases(rng, 5);

  CVec target = apply(ch, ph, x);
  CHECK(objective(ch, target, x, ph) == doctest::Approx(0.0).epsilon(1e-15));

  RisChannel blocked(ch.h, ch.g, CMat::Zero(4, 2), ch.p, ch.sigma2);
  CVec y = gaussian_complex(rng, 4, 1);
  CHECK(objective(blocked, y, CVec::Zero(2), ph) ==
        doctest::Approx(y.squaredNorm()).epsilon(1e-14));

  RisChannel siso(CMat::Ones(1, 1), CMat::Ones(1, 1), CMat::Zero(1, 1), 1.0, 1.0);
  RVec pi_angle(1);
  pi_angle << M_PI;
  CHECK(objective(siso, CVec::Ones(1), CVec::Ones(1), PhaseVector(pi_angle)) ==
        doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(objective(ch, gaussian_complex(rng, 3, 1), x, ph),
                  DimensionError);
}

TEST_CASE("augmented lagrangian penalty branch") {
  Rng rng(2);
  CVec unit = random_x(rng, 3, 1.0);
  CHECK(augmented_lagrangian(2.5, unit, 0.0, 4.0) ==
        doctest::Approx(2.5).epsilon(1e-14));

  CVec x15 = random_x(rng, 3, std::sqrt(1.5));
  CHECK(augmented_lagrangian(1.0, x15, 1.0, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-12));

  CHECK(augmented_lagrangian(0.7, CVec::Zero(3), 0.0, 10.0) ==
        doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("gradients match finite differences") {
  Rng rng(3);
  const double h = 1e-5;
  for (int inst = 0; inst < 10; ++inst) {
    int m = 1 + static_cast<int>(rng.uniform() * 4);
    int n = 1 + static_cast<int>(rng.uniform() * 8);
    int k = 1 + static_cast<int>(rng.uniform() * 6);
    RisChannel ch = sample_channel(rng, m, n, k, inst % 2 == 0, 2.0);
    CVec target = gaussian_complex(rng, k, 1);
    for (int pt = 0; pt < 10; ++pt) {
      bool active = pt % 2 == 1;
      CVec x = random_x(rng, m, active ? 1.3 : 0.5);
      PhaseVector ph = random_phases(rng, n);
      double lambda = active ? 0.5 : 0.0;
      double rho = pt % 3 == 0 ? 1.0 : 10.0;

      CVec gx = grad_x(ch, target, x, ph, lambda, rho);
      CVec gx_fd = fd_grad_x(ch, target, x, ph, lambda, rho, h);
      CHECK((gx - gx_fd).norm() <= 1e-6 * std::max(1.0, gx.norm()));

      CVec gp = grad_phi_euclidean(ch, target, x, ph);
      CVec gp_fd = fd_grad_phi(ch, target, x, ph, h);
      CHECK((gp - gp_fd).norm() <= 1e-6 * std::max(1.0, gp.norm()));
    }
  }
}

TEST_CASE("gradient special points") {
  Rng rng(4);
  RisChannel ch = sample_channel(rng, 2, 6, 4, true, 1.5);
  CVec x = random_x(rng, 2, 0.7);
  PhaseVector ph = random_phases(rng, 6);
  CVec target = apply(ch, ph, x);

  // Constructed global minimum, inactive penalty.
  CHECK(grad_x(ch, target, x, ph, 0.0, 1.0).norm() < 1e-8);
  CHECK(grad_phi_euclidean(ch, target, x, ph).norm() < 1e-8);

  // Penalty-only gradient: dead channel, ||x||^2 = 2.
  RisChannel dark(ch.h, ch.g, ch.f, 0.0, 1.0);
  CVec x2 = random_x(rng, 2, std::sqrt(2.0));
  CVec g = grad_x(dark, CVec::Zero(4), x2, ph, 0.0, 1.0);
  CHECK((g - 2.0 * x2).norm() < 1e-10);

  // Effective channel vanishes at x = 0 with no direct path.
  RisChannel blocked(ch.h, ch.g, CMat::Zero(4, 2), 1.0, 1.0);
  CHECK(grad_phi_euclidean(blocked, target, CVec::Zero(2), ph).norm() == 0.0);

  // Riemannian gradient is the tangent projection of the ambient one.
  CVec amb = grad_phi_euclidean(ch, target, random_x(rng, 2, 0.9), ph);
  CVec rg = project_tangent(ph, amb).z;
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs((rg[i] * std::conj(ph[i])).real()) < 1e-10);
  }
}

TEST_CASE("clip") {
  CHECK(clip(5.0, 0.0, 3.0) == 3.0);
  CHECK(clip(-1.0, 0.0, 3.0) == 0.0);
  CHECK(clip(2.0, 0.0, 3.0) == 2.0);
  CHECK_THROWS_AS(clip(1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("params validation") {
  AlmParams good;
  CHECK_NOTHROW(good.validate());

  AlmParams p = good;
  p.theta_eps = 1.26;  // the increasing-schedule misprint must be rejected
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.eps_min = 1e-2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.theta_rho = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.theta_sigma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.lambda0 = 2e4;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.rho0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = good;
  p.d_min = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("rcg: stationary start returns immediately") {
  Rng rng(5);
  RisChannel ch = sample_channel(rng, 2, 6, 4, false, 1.0);
  CVec x = random_x(rng, 2, 0.6);
  PhaseVector ph = random_phases(rng, 6);
  CVec target = apply(ch, ph, x);

  AlmParams params;
  RcgResult r = rcg_solve(ch, target, x, ph, 0.0, 1.0, 1e-6, params);
  CHECK(r.iters == 0);
  CHECK(r.grad_norm < 1e-6);
  CHECK((r.x - x).norm() == 0.0);
  CHECK((r.phases.values() - ph.values()).norm() == 0.0);
}

TEST_CASE("rcg converges on a constructed feasible instance") {
  Rng rng(6);
  RisChannel ch = sample_channel(rng, 2, 8, 4, false, 1.0);
  CVec target = apply(ch, random_phases(rng, 8), random_x(rng, 2, 0.9));

  AlmParams params;
  std::vector<RcgTraceEntry> trace;
  RcgResult r = rcg_solve(ch, target, random_x(rng, 2, 0.5),
                          random_phases(rng, 8), 0.0, 1.0, 1e-6, params, true,
                          &trace);
  CHECK(r.grad_norm < 1e-6);
  CHECK(r.iters > 0);
  CHECK_FALSE(r.stalled);

  // Armijo audit: every accepted step has sufficient decrease, and the
  // Lagrangian is monotone along the trace.
  REQUIRE(!trace.empty());
  for (const RcgTraceEntry& e : trace) {
    CHECK(e.l_after <=
          e.l_before - params.armijo_c * e.alpha * e.grad_norm * e.grad_norm +
              1e-12);
  }
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i].l_before <= trace[i - 1].l_after + 1e-12);
  }

  // Returned phases stay on the manifold.
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(std::abs(r.phases[i]) - 1.0) < 1e-12);
  }
}

TEST_CASE("rcg with no reflecting elements solves least squares") {
  Rng rng(7);
  const int k = 4, m = 2;
  CMat f = gaussian_complex(rng, k, m);
  RisChannel ch(CMat(k, 0), CMat(0, m), f, 2.0, 1.0);
  CVec y = 0.3 * gaussian_complex(rng, k, 1);

  // Normal-equations oracle for min ||y - sqrt(p) f x||^2.
  CVec x_ls = (f.adjoint() * f).ldlt().solve(f.adjoint() * y) / std::sqrt(ch.p);
  REQUIRE(x_ls.norm() < 0.9);  // penalty stays inactive

  AlmParams params;
  PhaseVector none;
  RcgResult r = rcg_solve(ch, y, CVec::Zero(m), none, 0.0, 1.0, 1e-10, params);
  CHECK((r.x - x_ls).norm() < 1e-8);
}

TEST_CASE("alm: zero target collapses to zero signal") {
  Rng rng(8);
  RisChannel ch = sample_channel(rng, 2, 4, 4, false, 1.0);
  AlmParams params;
  SlpSolution sol = alm_solve(ch, CVec::Zero(4), random_x(rng, 2, 0.8),
                              random_phases(rng, 4), params);
  CHECK(sol.residual < 1e-4);
  CHECK(sol.feasible);
  CHECK(sol.x.norm() < 1e-2);
}

TEST_CASE("alm: constructed feasible instances mostly solve; power bounded") {
  Rng rng(9);
  AlmParams params;
  int feasible = 0;
  for (int t = 0; t < 10; ++t) {
    RisChannel ch = sample_channel(rng, 2, 8, 4, false, 1.0);
    CVec target = apply(ch, random_phases(rng, 8), random_x(rng, 2, 0.9));
    SlpSolution sol = alm_solve(ch, target, random_x(rng, 2, 0.5),
                                random_phases(rng, 8), params);
    CHECK(sol.x.squaredNorm() <= 1.0 + 1e-6);
    if (sol.residual < 1e-3) ++feasible;
  }
  CHECK(feasible >= 6);
}

TEST_CASE("alm: unit-modulus targets with too few elements stay infeasible") {
  Rng rng(10);
  RisChannel ch = sample_channel(rng, 2, 4, 4, false, 1.0);
  CVec target(4);
  for (int i = 0; i < 4; ++i) target[i] = std::polar(1.0, 0.7 * i);
  AlmParams params;
  SlpSolution sol = alm_solve(ch, target, random_x(rng, 2, 0.5),
                              random_phases(rng, 4), params);
  CHECK(sol.residual >= 1e-3);
  CHECK_FALSE(sol.feasible);
}

TEST_CASE("alm diagnostics: dual clip, schedules, determinism") {
  Rng rng(11);
  RisChannel ch = sample_channel(rng, 2, 4, 4, false, 1.0);
  CVec target(4);
  for (int i = 0; i < 4; ++i) target[i] = std::polar(1.0, 1.1 * i + 0.3);
  CVec x0 = random_x(rng, 2, 0.5);
  PhaseVector ph0 = random_phases(rng, 4);
  AlmParams params;

  std::ostringstream diag;
  SlpSolution sol = alm_solve(ch, target, x0, ph0, params, &diag);

  std::istringstream lines(diag.str());
  std::string line;
  int k_expect = 0;
  double prev_eps = params.eps0, prev_rho = 0.0;
  while (std::getline(lines, line)) {
    nlohmann::json rec = nlohmann::json::parse(line);
    CHECK(rec["k"] == k_expect++);
    CHECK(rec["lambda"].get<double>() >= 0.0);
    CHECK(rec["lambda"].get<double>() <= params.lambda_max);
    double eps = rec["eps"].get<double>();
    CHECK(eps <= prev_eps + 1e-15);
    CHECK(eps >= params.eps_min);
    prev_eps = eps;
    double rho = rec["rho"].get<double>();
    CHECK(rho >= prev_rho);
    prev_rho = rho;
    CHECK(rec["residual"].get<double>() >= 0.0);
    CHECK(rec.contains("x_norm2"));
    CHECK(rec.contains("inner_iters"));
  }
  CHECK(k_expect == sol.outer_iters);
  CHECK(sol.x.squaredNorm() <= 1.0 + 1e-6);

  SlpSolution again = alm_solve(ch, target, x0, ph0, params);
  CHECK((again.x - sol.x).norm() == 0.0);
  CHECK((again.phases.values() - sol.phases.values()).norm() == 0.0);
  CHECK(again.residual == sol.residual);
  CHECK(again.inner_iters == sol.inner_iters);
}
