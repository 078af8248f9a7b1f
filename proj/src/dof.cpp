#include "ris/dof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ris {

namespace {

using Point = std::pair<Half, Half>;

std::int64_t cross(const Point& o, const Point& a, const Point& b) {
  // Twice-value coordinates keep this exact in int64.
  std::int64_t ax = a.first.twice - o.first.twice;
  std::int64_t ay = a.second.twice - o.second.twice;
  std::int64_t bx = b.first.twice - o.first.twice;
  std::int64_t by = b.second.twice - o.second.twice;
  return ax * by - ay * bx;
}

// Andrew's monotone chain, strict turns only (collinear points dropped).
// Returns counterclockwise order starting at the lexicographic minimum.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // last point repeats the first
  return hull;
}

}  // namespace

std::string Half::str() const {
  if (twice < 0) return "-" + Half(-twice).str();
  std::string s = std::to_string(twice / 2);
  if (twice % 2 != 0) s += ".5";
  return s;
}

DofSpec::DofSpec(int m_, int n_, int k_, int r_) : m(m_), n(n_), k(k_), r(r_) {
  if (m < 1 || n < 1 || k < 1) {
    throw std::invalid_argument("DofSpec: m, n, k must be >= 1");
  }
  if (r < 0 || r > std::min(m, k)) {
    throw std::invalid_argument("DofSpec: need 0 <= r <= min(m, k)");
  }
}

Half dof_joint(const DofSpec& s) {
  if (s.r == 0) {
    // min(m + n/2 - 1/2, n, k)
    return min(min(Half(2 * s.m + s.n - 1), Half::whole(s.n)), Half::whole(s.k));
  }
  // min(m + n/2, n + r, k)
  return min(min(Half(2 * s.m + s.n), Half::whole(s.n + s.r)), Half::whole(s.k));
}

DofLimiter dof_joint_limiter(const DofSpec& s) {
  Half v = dof_joint(s);
  if (Half::whole(s.k) == v) return DofLimiter::kReceiver;
  Half ris = s.r == 0 ? Half::whole(s.n) : Half::whole(s.n + s.r);
  if (ris == v) return DofLimiter::kRis;
  return DofLimiter::kInput;
}

Half dof_phase_only(const DofSpec& s) {
  return min(Half(s.n), Half::whole(s.k));
}

const char* to_string(RegionShape s) {
  switch (s) {
    case RegionShape::kSimplex: return "simplex";
    case RegionShape::kRectangle: return "rectangle";
    case RegionShape::kPentagon: return "pentagon";
    case RegionShape::kQuadrilateral: return "quadrilateral";
  }
  return "unknown";
}

RegionShape DofRegion::shape() const {
  const auto& v = vertices;
  if (v.size() == 3) return RegionShape::kSimplex;
  if (v.size() == 5) return RegionShape::kPentagon;
  Half cx = constraints[0].c, cy = constraints[1].c;
  if (v.size() == 4 && v[1] == Point{cx, Half(0)} && v[2] == Point{cx, cy} &&
      v[3] == Point{Half(0), cy}) {
    return RegionShape::kRectangle;
  }
  return RegionShape::kQuadrilateral;
}

DofRegion dof_region(const DofSpec& s) {
  Half cx = s.r == 0 ? Half::whole(std::min({s.m, s.n, s.k}))
                     : Half::whole(std::min({s.m, s.n + s.r, s.k}));
  Half cy = dof_phase_only(s);
  Half cs = dof_joint(s);
  DofRegion region;
  region.constraints = {{1, 0, cx}, {0, 1, cy}, {1, 1, cs}};
  const Half zero(0);
  std::vector<Point> candidates;
  for (Half x : {zero, cx}) {
    for (Half y : {zero, cy}) candidates.push_back({x, y});
    candidates.push_back({x, cs - x});  // x-line meets the sum line
  }
  for (Half y : {zero, cy}) candidates.push_back({cs - y, y});
  auto ok = [&](const Point& p) {
    return p.first >= zero && p.first <= cx && p.second >= zero &&
           p.second <= cy && p.first + p.second <= cs;
  };
  std::vector<Point> feasible;
  for (const Point& p : candidates) {
    if (ok(p)) feasible.push_back(p);
  }
  region.vertices = convex_hull(std::move(feasible));
  return region;
}

nlohmann::json region_to_json(const DofRegion& region) {
  nlohmann::json j;
  j["constraints"] = nlohmann::json::array();
  for (const HalfPlane& hp : region.constraints) {
    j["constraints"].push_back(
        {{"a", hp.a}, {"b", hp.b}, {"c", hp.c.value()}});
  }
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : region.vertices) {
    j["vertices"].push_back({v.first.value(), v.second.value()});
  }
  return j;
}

std::string region_vertices_csv(const DofRegion& region) {
  std::string out = "x,y\n";
  for (const auto& v : region.vertices) {
    out += v.first.str() + "," + v.second.str() + "\n";
  }
  return out;
}

double siso_rate_approx(RateKind kind, double snr, double x_magnitude) {
  if (!(snr > 0.0)) {
    throw std::invalid_argument("siso_rate_approx: snr must be > 0");
  }
  if (kind == RateKind::kNoncoherentMagnitude) {
    return 0.5 * std::log2(snr) - 0.69;
  }
  if (!(x_magnitude > 0.0)) {
    throw std::invalid_argument("siso_rate_approx: x_magnitude must be > 0");
  }
  return 0.5 * std::log2(snr * x_magnitude * x_magnitude) + 1.1;
}

int expected_transition(int m, int k, bool direct) {
  if (m < 1) throw std::invalid_argument("expected_transition: m must be >= 1");
  if (k < m) throw std::invalid_argument("expected_transition: need k >= m");
  return direct ? 2 * k - 2 * m : 2 * k - 2 * m + 1;
}

}  // namespace ris
