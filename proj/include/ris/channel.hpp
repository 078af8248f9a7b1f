#pragma once

// Reflecting-surface MIMO channel: K receive antennas, M transmit antennas,
// N reflecting elements with unit-modulus coefficients. The noiseless model
// is y = sqrt(p) * (H diag(phi) G + F) x; F is the direct transmit-receive
// path and may be all-zero.

#include "ris/numerics.hpp"

#include <json.hpp>

#include <string>

namespace ris {

// Unit-modulus coefficient vector phi_i = exp(j theta_i). Both the angles and
// the complex values are kept; every entry satisfies ||phi_i| - 1| < 1e-12.
class PhaseVector {
 public:
  PhaseVector() = default;
  explicit PhaseVector(const RVec& angles);

  // Wraps an already unit-modulus complex vector (e.g. a retraction output).
  // Throws std::invalid_argument if any modulus deviates from 1 by >= 1e-12.
  static PhaseVector from_unit(const CVec& phi);

  int size() const { return static_cast<int>(phi_.size()); }
  const RVec& angles() const { return angles_; }
  const CVec& values() const { return phi_; }
  std::complex<double> operator[](int i) const { return phi_[i]; }

 private:
  RVec angles_;
  CVec phi_;
};

struct RisChannel {
  CMat h;  // K x N
  CMat g;  // N x M
  CMat f;  // K x M, zero when there is no direct path
  double p = 1.0;
  double sigma2 = 1.0;

  RisChannel() = default;
  // Validates conformance (h.cols == g.rows, f is K x M) and p, sigma2 >= 0.
  RisChannel(CMat h, CMat g, CMat f, double p, double sigma2);

  int m() const { return static_cast<int>(g.cols()); }
  int n() const { return static_cast<int>(h.cols()); }
  int k() const { return static_cast<int>(h.rows()); }
  bool has_direct_path() const;
};

// Noiseless receive vector sqrt(p) * (H diag(phi) G + F) x, plus noise if
// given. Throws DimensionError on any size mismatch.
CVec apply(const RisChannel& ch, const PhaseVector& phases, const CVec& x);
CVec apply(const RisChannel& ch, const PhaseVector& phases, const CVec& x,
           const CVec& noise);

// K x N matrix H diag(G x): the map from phase values to the reflected part
// of the receive vector for a fixed transmit signal.
CMat effective_channel(const RisChannel& ch, const CVec& x);

// Rewrites a channel with direct path F of numeric rank r as an equivalent
// direct-path-free channel with n + r elements, where the appended r phases
// must be held at angle 0: H' = [H, U_r S_r], G' = [G; V_r], F' = 0.
struct AbsorbedChannel {
  RisChannel channel;
  int fixed_tail = 0;  // number of trailing phases pinned to angle 0
};
AbsorbedChannel absorb_direct_path(const RisChannel& ch, double rank_tol = 1e-10);

// i.i.d. CN(0,1) entries for H, G and (when direct is set) F, drawn from the
// stream in the order H, G, F.
RisChannel sample_channel(Rng& rng, int m, int n, int k, bool direct, double p,
                          double sigma2 = 1.0);

nlohmann::json channel_to_json(const RisChannel& ch);
RisChannel channel_from_json(const nlohmann::json& j);

}  // namespace ris
