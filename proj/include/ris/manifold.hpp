#pragma once

// Geometry of the product of N unit circles in C^N: tangent projection,
// entrywise-normalization retraction, transport by projection, Euclidean
// metric. The solver works on raw complex vectors through the *_core
// functions; the typed wrappers add base-point bookkeeping and validation.

#include "ris/channel.hpp"
#include "ris/numerics.hpp"

namespace ris {

class DegenerateRetractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tangent vector at a base point: Re(z_i * conj(phi_i)) = 0 entrywise.
struct TangentVec {
  PhaseVector base;
  CVec z;
};

// z minus its radial component at phi: z_i - Re(z_i conj(phi_i)) phi_i.
// phi must be unit-modulus; no validation here (hot path).
CVec project_tangent_core(const CVec& phi, const CVec& z);

// Entrywise v_i / |v_i|. Throws DegenerateRetractionError when any
// |v_i| < 1e-14.
CVec retract_core(const CVec& v);

// Sum of Re(a_i conj(b_i)); the product-manifold Riemannian metric.
double inner_core(const CVec& a, const CVec& b);

TangentVec project_tangent(const PhaseVector& phi, const CVec& z);

PhaseVector retract(const CVec& v);

// Moves a tangent vector at `from` into the tangent space at `to` by
// projection (not an isometry; norms can shrink).
TangentVec transport(const PhaseVector& from, const PhaseVector& to,
                     const TangentVec& d);

// Metric on a common tangent space; throws std::invalid_argument when the
// base points differ (compared exactly).
double inner(const TangentVec& a, const TangentVec& b);

}  // namespace ris
