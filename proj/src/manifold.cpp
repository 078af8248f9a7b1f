#include "ris/manifold.hpp"

#include <cmath>

namespace ris {

CVec project_tangent_core(const CVec& phi, const CVec& z) {
  CVec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double radial = (z[i] * std::conj(phi[i])).real();
    out[i] = z[i] - radial * phi[i];
  }
  return out;
}

CVec retract_core(const CVec& v) {
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double mag = std::abs(v[i]);
    if (mag < 1e-14) {
      throw DegenerateRetractionError(
          "retract: entry too close to the origin to normalize");
    }
    out[i] = v[i] / mag;
  }
  return out;
}

double inner_core(const CVec& a, const CVec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    s += (a[i] * std::conj(b[i])).real();
  }
  return s;
}

TangentVec project_tangent(const PhaseVector& phi, const CVec& z) {
  if (z.size() != phi.size()) {
    throw DimensionError("project_tangent: length mismatch");
  }
  return TangentVec{phi, project_tangent_core(phi.values(), z)};
}

PhaseVector retract(const CVec& v) {
  return PhaseVector::from_unit(retract_core(v));
}

TangentVec transport(const PhaseVector& from, const PhaseVector& to,
                     const TangentVec& d) {
  if (from.size() != to.size() || d.z.size() != to.size()) {
    throw DimensionError("transport: length mismatch");
  }
  return TangentVec{to, project_tangent_core(to.values(), d.z)};
}

double inner(const TangentVec& a, const TangentVec& b) {
  if (a.z.size() != b.z.size()) {
    throw DimensionError("inner: length mismatch");
  }
  if (a.base.values() != b.base.values()) {
    throw std::invalid_argument("inner: tangent vectors at different base points");
  }
  return inner_core(a.z, b.z);
}

}  // namespace ris
