#include "ris/channel.hpp"

#include <cmath>
#include <utility>

namespace ris {

namespace {

using nlohmann::json;

json complex_matrix_to_json(const CMat& a) {
  // Row-major flat list of [re, im] pairs.
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.push_back({a(i, j).real(), a(i, j).imag()});
    }
  }
  return out;
}

CMat complex_matrix_from_json(const json& j, int rows, int cols,
                              const std::string& name) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionError("channel_from_json: field '" + name + "' must hold " +
                         std::to_string(rows * cols) + " [re,im] pairs");
  }
  CMat a(rows, cols);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c, ++idx) {
      const json& e = j[idx];
      if (!e.is_array() || e.size() != 2) {
        throw std::invalid_argument("channel_from_json: entry " +
                                    std::to_string(idx) + " of '" + name +
                                    "' is not an [re,im] pair");
      }
      a(i, c) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return a;
}

}  // namespace

PhaseVector::PhaseVector(const RVec& angles) : angles_(angles) {
  phi_.resize(angles.size());
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    phi_[i] = std::polar(1.0, angles[i]);
  }
}

PhaseVector PhaseVector::from_unit(const CVec& phi) {
  PhaseVector out;
  out.phi_ = phi;
  out.angles_.resize(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    if (std::abs(std::abs(phi[i]) - 1.0) >= 1e-12) {
      throw std::invalid_argument(
          "PhaseVector::from_unit: entry modulus deviates from 1");
    }
    out.angles_[i] = std::arg(phi[i]);
  }
  return out;
}

RisChannel::RisChannel(CMat h_, CMat g_, CMat f_, double p_, double sigma2_)
    : h(std::move(h_)), g(std::move(g_)), f(std::move(f_)), p(p_), sigma2(sigma2_) {
  if (h.cols() != g.rows()) {
    throw DimensionError("RisChannel: H is K x N and G must be N x M");
  }
  if (f.rows() != h.rows() || f.cols() != g.cols()) {
    throw DimensionError("RisChannel: F must be K x M");
  }
  if (p < 0.0 || sigma2 < 0.0) {
    throw std::invalid_argument("RisChannel: p and sigma2 must be >= 0");
  }
}

bool RisChannel::has_direct_path() const {
  return f.size() > 0 && f.cwiseAbs().maxCoeff() > 0.0;
}

CVec apply(const RisChannel& ch, const PhaseVector& phases, const CVec& x) {
  if (phases.size() != ch.n()) {
    throw DimensionError("apply: phase vector length must equal n");
  }
  if (x.size() != ch.m()) {
    throw DimensionError("apply: x length must equal m");
  }
  const double sp = std::sqrt(ch.p);
  CVec reflected = ch.g * x;                       // N
  reflected.array() *= phases.values().array();    // diag(phi) G x
  return sp * (ch.h * reflected + ch.f * x);
}

CVec apply(const RisChannel& ch, const PhaseVector& phases, const CVec& x,
           const CVec& noise) {
  if (noise.size() != ch.k()) {
    throw DimensionError("apply: noise length must equal k");
  }
  return apply(ch, phases, x) + noise;
}

CMat effective_channel(const RisChannel& ch, const CVec& x) {
  if (x.size() != ch.m()) {
    throw DimensionError("effective_channel: x length must equal m");
  }
  CVec gx = ch.g * x;
  return ch.h * gx.asDiagonal();
}

AbsorbedChannel absorb_direct_path(const RisChannel& ch, double rank_tol) {
  AbsorbedChannel out;
  if (!ch.has_direct_path()) {
    out.channel = ch;
    out.fixed_tail = 0;
    return out;
  }
  SvdResult dec = svd(ch.f);
  int r = numeric_rank(dec.singular_values, rank_tol);
  const int k = ch.k(), n = ch.n(), m = ch.m();
  CMat h2(k, n + r);
  h2.leftCols(n) = ch.h;
  h2.rightCols(r) =
      dec.u.leftCols(r) * dec.singular_values.head(r).asDiagonal();
  CMat g2(n + r, m);
  g2.topRows(n) = ch.g;
  g2.bottomRows(r) = dec.v.topRows(r);
  out.channel = RisChannel(std::move(h2), std::move(g2), CMat::Zero(k, m),
                           ch.p, ch.sigma2);
  out.fixed_tail = r;
  return out;
}

RisChannel sample_channel(Rng& rng, int m, int n, int k, bool direct, double p,
                          double sigma2) {
  if (m < 1 || n < 1 || k < 1) {
    throw DimensionError("sample_channel: m, n, k must be >= 1");
  }
  CMat h = gaussian_complex(rng, k, n);
  CMat g = gaussian_complex(rng, n, m);
  CMat f = direct ? gaussian_complex(rng, k, m) : CMat::Zero(k, m);
  return RisChannel(std::move(h), std::move(g), std::move(f), p, sigma2);
}

json channel_to_json(const RisChannel& ch) {
  json j;
  j["m"] = ch.m();
  j["n"] = ch.n();
  j["k"] = ch.k();
  j["h"] = complex_matrix_to_json(ch.h);
  j["g"] = complex_matrix_to_json(ch.g);
  j["f"] = complex_matrix_to_json(ch.f);
  j["p"] = ch.p;
  j["sigma2"] = ch.sigma2;
  return j;
}

RisChannel channel_from_json(const json& j) {
  for (const char* key : {"m", "n", "k", "h", "g"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("channel_from_json: missing '") +
                                  key + "'");
    }
  }
  int m = j["m"].get<int>();
  int n = j["n"].get<int>();
  int k = j["k"].get<int>();
  if (m < 1 || n < 1 || k < 1) {
    throw DimensionError("channel_from_json: m, n, k must be >= 1");
  }
  CMat h = complex_matrix_from_json(j["h"], k, n, "h");
  CMat g = complex_matrix_from_json(j["g"], n, m, "g");
  CMat f = j.contains("f") ? complex_matrix_from_json(j["f"], k, m, "f")
                           : CMat::Zero(k, m);
  double p = j.value("p", 1.0);
  double sigma2 = j.value("sigma2", 1.0);
  return RisChannel(std::move(h), std::move(g), std::move(f), p, sigma2);
}

}  // namespace ris
