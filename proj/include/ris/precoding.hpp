#pragma once

// Symbol-level precoding problems: pick a transmit vector and phase
// configuration whose noiseless receive vector hits a target point. Joint
// mode optimizes both; phase-only mode holds a stored deterministic x and
// steers only the phases. Decoding searches a finite candidate list
// exhaustively.

#include "ris/channel.hpp"
#include "ris/numerics.hpp"
#include "ris/optimizer.hpp"

#include <json.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace ris {

enum class SlpMode { kJoint, kPhaseOnly };

struct SlpProblem {
  RisChannel channel;
  CVec target;                    // length k
  SlpMode mode = SlpMode::kJoint;
  CVec x_fixed;                   // phase-only mode: length m, ||x||^2 <= 1

  // Throws on size mismatches; phase-only additionally requires x_fixed with
  // ||x_fixed||^2 <= 1 + 1e-9 and no exactly-zero entry of G * x_fixed
  // (a zero entry would make that phase unobservable).
  void validate() const;
};

inline constexpr std::size_t kMaxConstellationSize = std::size_t{1} << 20;

// Finite list of (x, phases) candidate pairs with homogeneous dimensions and
// every ||x||^2 <= 1 (validated to 1e-12 slack).
class Constellation {
 public:
  struct Candidate {
    CVec x;
    PhaseVector phases;
  };

  explicit Constellation(std::vector<Candidate> candidates);
  // Cartesian product of per-symbol alphabets; throws std::length_error when
  // the product would exceed max_size.
  static Constellation product(const std::vector<CVec>& x_alphabet,
                               const std::vector<PhaseVector>& phase_alphabet,
                               std::size_t max_size = kMaxConstellationSize);

  std::size_t size() const { return candidates_.size(); }
  const Candidate& operator[](std::size_t i) const { return candidates_[i]; }
  int m() const { return static_cast<int>(candidates_.front().x.size()); }
  int n() const { return candidates_.front().phases.size(); }

 private:
  std::vector<Candidate> candidates_;
};

// Best-of-`restarts` solve. Joint mode draws each start as x ~ CN(0, I/m)
// (rescaled to the unit sphere when outside) and angles uniform on (-pi, pi];
// phase-only mode draws angles only and runs a single conjugate-gradient
// descent per start (the power term is constant). Lowest residual wins, ties
// keep the earliest restart; the stalled flag survives on the winner.
// `diagnostics` (joint mode only) receives one JSONL block per restart; the
// outer-iteration counter restarting at 0 marks block boundaries.
SlpSolution solve(const SlpProblem& problem, const AlmParams& params,
                  int restarts, Rng& rng, std::ostream* diagnostics = nullptr);

// Strict residual test against delta (> 0).
bool is_feasible(const SlpSolution& sol,
                 double delta = kDefaultFeasibilityDelta);

struct MlDecodeResult {
  std::size_t index = 0;
  CVec x;
  PhaseVector phases;
  double metric = 0.0;
  bool tie = false;
};

// Exhaustive argmin of ||y - sqrt(p)(H diag(phi) G + F) x||^2 over the
// candidate list. Equal-metric ties (within 1e-12 relative, which is how
// exact ties surface in floating point) resolve to the lowest index and set
// the tie flag. Throws std::length_error when the list exceeds max_size.
MlDecodeResult ml_decode(const RisChannel& ch, const CVec& y,
                         const Constellation& candidates,
                         std::size_t max_size = kMaxConstellationSize);

nlohmann::json problem_to_json(const SlpProblem& problem);
SlpProblem problem_from_json(const nlohmann::json& j);
nlohmann::json solution_to_json(const SlpSolution& sol);
Constellation constellation_from_json(const nlohmann::json& j);

}  // namespace ris
