#include "ris/precoding.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ris {

namespace {

using nlohmann::json;

json cvec_to_json(const CVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back({v[i].real(), v[i].imag()});
  }
  return out;
}

CVec cvec_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) {
    throw std::invalid_argument("expected array of [re,im] pairs for '" + name + "'");
  }
  CVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (!e.is_array() || e.size() != 2) {
      throw std::invalid_argument("entry " + std::to_string(i) + " of '" + name +
                                  "' is not an [re,im] pair");
    }
    v[i] = {e[0].get<double>(), e[1].get<double>()};
  }
  return v;
}

RVec rvec_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) {
    throw std::invalid_argument("expected array of angles for '" + name + "'");
  }
  RVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

CVec draw_start_x(Rng& rng, int m) {
  CVec x(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int i = 0; i < m; ++i) x[i] = scale * rng.complex_gaussian();
  double norm = x.norm();
  if (norm > 1.0) x /= norm;
  return x;
}

PhaseVector draw_start_phases(Rng& rng, int n) {
  RVec angles(n);
  for (int i = 0; i < n; ++i) angles[i] = rng.uniform_angle(-M_PI, M_PI);
  return PhaseVector(angles);
}

SlpSolution solve_one_joint(const SlpProblem& pb, const AlmParams& params,
                            Rng& rng, std::ostream* diagnostics) {
  CVec x0 = draw_start_x(rng, pb.channel.m());
  PhaseVector phases0 = draw_start_phases(rng, pb.channel.n());
  return alm_solve(pb.channel, pb.target, x0, phases0, params, diagnostics);
}

SlpSolution solve_one_phase_only(const SlpProblem& pb, const AlmParams& params,
                                 Rng& rng) {
  const RisChannel& ch = pb.channel;
  const int n = ch.n(), k = ch.k();
  // Reduced problem: || (target - sqrt(p) F x) - sqrt(p) H diag(G x) phi ||^2
  // over phi alone, expressed as a channel with a single fixed unit input.
  CVec target_bar = pb.target - std::sqrt(ch.p) * (ch.f * pb.x_fixed);
  RisChannel reduced(effective_channel(ch, pb.x_fixed), CMat::Ones(n, 1),
                     CMat::Zero(k, 1), ch.p, ch.sigma2);
  CVec unit_x = CVec::Ones(1);
  PhaseVector phases0 = draw_start_phases(rng, n);
  RcgResult r = rcg_solve(reduced, target_bar, unit_x, phases0, 0.0, 1.0,
                          params.eps_min, params, /*optimize_x=*/false);
  SlpSolution sol;
  sol.x = pb.x_fixed;
  sol.phases = r.phases;
  sol.residual = std::sqrt(objective(ch, pb.target, sol.x, sol.phases));
  sol.feasible = sol.residual < kDefaultFeasibilityDelta;
  sol.outer_iters = 1;
  sol.inner_iters = r.iters;
  sol.stop_reason = r.grad_norm < params.eps_min ? StopReason::kConverged
                                                 : StopReason::kMaxInnerIters;
  sol.stalled = r.stalled;
  return sol;
}

}  // namespace

void SlpProblem::validate() const {
  if (target.size() != channel.k()) {
    throw DimensionError("SlpProblem: target length must equal k");
  }
  if (mode == SlpMode::kPhaseOnly) {
    if (x_fixed.size() != channel.m()) {
      throw DimensionError("SlpProblem: phase-only mode needs x_fixed of length m");
    }
    if (x_fixed.squaredNorm() > 1.0 + 1e-9) {
      throw std::invalid_argument("SlpProblem: ||x_fixed||^2 must be <= 1");
    }
    CVec gx = channel.g * x_fixed;
    for (Eigen::Index i = 0; i < gx.size(); ++i) {
      if (std::abs(gx[i]) == 0.0) {
        throw std::invalid_argument(
            "SlpProblem: G * x_fixed has a zero entry; that phase would be unobservable");
      }
    }
  }
}

Constellation::Constellation(std::vector<Candidate> candidates)
    : candidates_(std::move(candidates)) {
  if (candidates_.empty()) {
    throw std::invalid_argument("Constellation: candidate list is empty");
  }
  const Eigen::Index m = candidates_.front().x.size();
  const int n = candidates_.front().phases.size();
  for (const Candidate& c : candidates_) {
    if (c.x.size() != m || c.phases.size() != n) {
      throw DimensionError("Constellation: candidates have mixed dimensions");
    }
    if (c.x.squaredNorm() > 1.0 + 1e-12) {
      throw std::invalid_argument("Constellation: candidate with ||x||^2 > 1");
    }
  }
}

Constellation Constellation::product(const std::vector<CVec>& x_alphabet,
                                     const std::vector<PhaseVector>& phase_alphabet,
                                     std::size_t max_size) {
  if (x_alphabet.empty() || phase_alphabet.empty()) {
    throw std::invalid_argument("Constellation::product: empty alphabet");
  }
  if (x_alphabet.size() > max_size / phase_alphabet.size()) {
    throw std::length_error("Constellation::product: candidate count exceeds cap");
  }
  std::vector<Candidate> cands;
  cands.reserve(x_alphabet.size() * phase_alphabet.size());
  for (const CVec& x : x_alphabet) {
    for (const PhaseVector& ph : phase_alphabet) {
      cands.push_back({x, ph});
    }
  }
  return Constellation(std::move(cands));
}

SlpSolution solve(const SlpProblem& problem, const AlmParams& params,
                  int restarts, Rng& rng, std::ostream* diagnostics) {
  params.validate();
  problem.validate();
  if (restarts < 1) {
    throw std::invalid_argument("solve: restarts must be >= 1");
  }
  SlpSolution best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    SlpSolution sol =
        problem.mode == SlpMode::kJoint
            ? solve_one_joint(problem, params, rng, diagnostics)
            : solve_one_phase_only(problem, params, rng);
    if (!have || sol.residual < best.residual) {
      best = std::move(sol);
      have = true;
    }
  }
  return best;
}

bool is_feasible(const SlpSolution& sol, double delta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("is_feasible: delta must be > 0");
  }
  return sol.residual < delta;
}

MlDecodeResult ml_decode(const RisChannel& ch, const CVec& y,
                         const Constellation& candidates,
                         std::size_t max_size) {
  if (y.size() != ch.k()) {
    throw DimensionError("ml_decode: y length must equal k");
  }
  if (candidates.m() != ch.m() || candidates.n() != ch.n()) {
    throw DimensionError("ml_decode: candidate dimensions do not match channel");
  }
  if (candidates.size() > max_size) {
    throw std::length_error("ml_decode: candidate count exceeds cap");
  }
  std::vector<double> metrics(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    metrics[i] = (y - apply(ch, c.phases, c.x)).squaredNorm();
    if (metrics[i] < best) best = metrics[i];
  }
  // Exact ties surface as metrics within rounding of each other; take the
  // first candidate in the tie band, flag when the band holds more than one.
  const double band = best + 1e-12 * (1.0 + best);
  std::size_t first = candidates.size();
  int in_band = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (metrics[i] <= band) {
      if (first == candidates.size()) first = i;
      ++in_band;
    }
  }
  MlDecodeResult out;
  out.index = first;
  out.x = candidates[first].x;
  out.phases = candidates[first].phases;
  out.metric = metrics[first];
  out.tie = in_band > 1;
  return out;
}

json problem_to_json(const SlpProblem& problem) {
  json j = channel_to_json(problem.channel);
  j["target"] = cvec_to_json(problem.target);
  j["mode"] = problem.mode == SlpMode::kJoint ? "joint" : "phase-only";
  if (problem.mode == SlpMode::kPhaseOnly) {
    j["x_fixed"] = cvec_to_json(problem.x_fixed);
  }
  return j;
}

SlpProblem problem_from_json(const json& j) {
  SlpProblem pb;
  pb.channel = channel_from_json(j);
  if (!j.contains("target")) {
    throw std::invalid_argument("problem_from_json: missing 'target'");
  }
  pb.target = cvec_from_json(j["target"], "target");
  std::string mode = j.value("mode", "joint");
  if (mode == "joint") {
    pb.mode = SlpMode::kJoint;
  } else if (mode == "phase-only") {
    pb.mode = SlpMode::kPhaseOnly;
    if (!j.contains("x_fixed")) {
      throw std::invalid_argument("problem_from_json: phase-only mode needs 'x_fixed'");
    }
    pb.x_fixed = cvec_from_json(j["x_fixed"], "x_fixed");
  } else {
    throw std::invalid_argument("problem_from_json: mode must be 'joint' or 'phase-only'");
  }
  pb.validate();
  return pb;
}

json solution_to_json(const SlpSolution& sol) {
  json j;
  j["x"] = cvec_to_json(sol.x);
  j["phi"] = cvec_to_json(sol.phases.values());
  json angles = json::array();
  for (Eigen::Index i = 0; i < sol.phases.angles().size(); ++i) {
    angles.push_back(sol.phases.angles()[i]);
  }
  j["theta"] = angles;
  j["residual"] = sol.residual;
  j["feasible"] = sol.feasible;
  j["outer_iters"] = sol.outer_iters;
  j["inner_iters"] = sol.inner_iters;
  j["stop_reason"] = to_string(sol.stop_reason);
  j["stalled"] = sol.stalled;
  return j;
}

Constellation constellation_from_json(const json& j) {
  if (j.contains("pairs")) {
    std::vector<Constellation::Candidate> cands;
    for (const json& e : j["pairs"]) {
      Constellation::Candidate c;
      c.x = cvec_from_json(e.at("x"), "pairs[].x");
      c.phases = PhaseVector(rvec_from_json(e.at("theta"), "pairs[].theta"));
      cands.push_back(std::move(c));
    }
    return Constellation(std::move(cands));
  }
  if (j.contains("x_candidates") && j.contains("phase_candidates")) {
    std::vector<CVec> xs;
    for (const json& e : j["x_candidates"]) {
      xs.push_back(cvec_from_json(e, "x_candidates[]"));
    }
    std::vector<PhaseVector> phases;
    for (const json& e : j["phase_candidates"]) {
      phases.push_back(PhaseVector(rvec_from_json(e, "phase_candidates[]")));
    }
    return Constellation::product(xs, phases);
  }
  throw std::invalid_argument(
      "constellation_from_json: need 'pairs' or 'x_candidates'+'phase_candidates'");
}

}  // namespace ris
