#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/monomial.hpp"
#include "rforge/poly.hpp"

namespace rforge {

using LatticePoint = Monomial;

/// V-representation of a lattice polytope. The point set generates the hull;
/// it may contain non-vertices.
class Polytope {
 public:
  Polytope(std::size_t dim, std::vector<LatticePoint> points) : dim_(dim), points_(std::move(points)) {
    require(!points_.empty(), "polytope needs at least one point");
    for (const auto& p : points_) require(p.size() == dim_, "polytope point dimension mismatch");
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<LatticePoint>& points() const noexcept { return points_; }

  int lower(std::size_t k) const {
    int v = points_.front()[k];
    for (const auto& p : points_) v = std::min(v, p[k]);
    return v;
  }
  int upper(std::size_t k) const {
    int v = points_.front()[k];
    for (const auto& p : points_) v = std::max(v, p[k]);
    return v;
  }

 private:
  std::size_t dim_;
  std::vector<LatticePoint> points_;
};

namespace detail {

/// Phase-I simplex deciding whether some w >= 0 with sum(w) = 1 and V w = x
/// exists. Returns the minimal total infeasibility.
inline double convex_combination_infeasibility(const std::vector<const LatticePoint*>& verts,
                                               const std::vector<double>& x) {
  const std::size_t n = x.size(), k = verts.size(), rows = n + 1, cols = k + rows;
  std::vector<std::vector<double>> tab(rows, std::vector<double>(cols + 1, 0.0));
  for (std::size_t q = 0; q < rows; ++q) {
    const double rhs = q < n ? x[q] : 1.0;
    const double sign = rhs < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < k; ++j) tab[q][j] = sign * (q < n ? (*verts[j])[q] : 1.0);
    tab[q][k + q] = 1.0;
    tab[q][cols] = sign * rhs;
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t q = 0; q < rows; ++q) basis[q] = k + q;
  std::vector<double> cost(cols + 1, 0.0);
  for (std::size_t j = 0; j <= cols; ++j) {
    double s = 0.0;
    for (std::size_t q = 0; q < rows; ++q) s += tab[q][j];
    cost[j] = (j >= k && j < cols) ? 0.0 : -s;
  }
  constexpr double piv_tol = 1e-12;
  for (std::size_t iter = 0; iter < 50 * cols + 100; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j)
      if (cost[j] < -1e-12) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < rows; ++q) {
      if (tab[q][enter] <= piv_tol) continue;
      const double ratio = tab[q][cols] / tab[q][enter];
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave < rows && basis[q] < basis[leave])) {
        best = ratio;
        leave = q;
      }
    }
    if (leave == rows) break;  // unbounded cannot happen for phase I; bail out defensively
    const double p = tab[leave][enter];
    for (auto& v : tab[leave]) v /= p;
    for (std::size_t q = 0; q < rows; ++q) {
      if (q == leave || tab[q][enter] == 0.0) continue;
      const double f = tab[q][enter];
      for (std::size_t j = 0; j <= cols; ++j) tab[q][j] -= f * tab[leave][j];
    }
    const double f = cost[enter];
    for (std::size_t j = 0; j <= cols; ++j) cost[j] -= f * tab[leave][j];
    basis[leave] = enter;
  }
  return -cost[cols];
}

}  // namespace detail

inline constexpr double kContainsTolerance = 1e-9;

/// x in conv(P), decided by LP feasibility of a convex combination. Closed:
/// points within the tolerance of the boundary count as inside.
inline bool contains(const Polytope& P, const std::vector<double>& x) {
  require(x.size() == P.dim(), "point dimension differs from polytope dimension");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < P.lower(k) - kContainsTolerance || x[k] > P.upper(k) + kContainsTolerance) return false;
  std::vector<const LatticePoint*> verts;
  for (const auto& p : P.points()) verts.push_back(&p);
  return detail::convex_combination_infeasibility(verts, x) <= kContainsTolerance;
}

/// Drops points that lie in the hull of the remaining points.
inline Polytope prune_to_vertices(const Polytope& P) {
  std::vector<LatticePoint> pts = P.points();
  for (std::size_t idx = pts.size(); idx-- > 0 && pts.size() > 1;) {
    std::vector<const LatticePoint*> others;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != idx) others.push_back(&pts[j]);
    std::vector<double> x(pts[idx].exponents().begin(), pts[idx].exponents().end());
    if (detail::convex_combination_infeasibility(others, x) <= kContainsTolerance) pts.erase(pts.begin() + idx);
  }
  return Polytope(P.dim(), std::move(pts));
}

template <class Poly>
Polytope newton_polytope(const Poly& p) {
  auto s = supp(p);
  const std::size_t n = s.front().size();
  return Polytope(n, std::move(s));
}

inline Polytope unit_simplex(std::size_t n) {
  std::vector<LatticePoint> pts{Monomial(n)};
  for (std::size_t k = 0; k < n; ++k) pts.push_back(Monomial::unit(n, k));
  return Polytope(n, std::move(pts));
}

inline Polytope minkowski_sum(const Polytope& P, const Polytope& Q, bool prune = true) {
  require(P.dim() == Q.dim(), "minkowski_sum: dimension mismatch");
  std::vector<LatticePoint> pts;
  pts.reserve(P.points().size() * Q.points().size());
  for (const auto& a : P.points())
    for (const auto& b : Q.points()) pts.push_back(a + b);
  Polytope sum(P.dim(), std::move(pts));
  return prune ? prune_to_vertices(sum) : sum;
}

/// Displacement vector with entries in {-eps, 0, +eps}.
struct Displacement {
  std::vector<double> delta;
  double epsilon = 0.0;

  static Displacement zero(std::size_t n, double eps = 0.0) { return {std::vector<double>(n, 0.0), eps}; }
  friend bool operator==(const Displacement&, const Displacement&) = default;

  void validate() const {
    for (double d : delta)
      require(d == 0.0 || d == epsilon || d == -epsilon, "displacement entries must be in {-eps, 0, eps}");
  }
};

/// The displacement grid {-eps,0,eps}^n in a fixed order (zero first). Above
/// `max_full_dim` dimensions a seeded sample of 3^max_full_dim vectors is drawn.
inline std::vector<Displacement> displacement_grid(std::size_t n, double eps, std::uint64_t seed,
                                                   std::size_t max_full_dim = 8) {
  const double vals[3] = {0.0, -eps, eps};
  std::vector<Displacement> out;
  if (n <= max_full_dim) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < n; ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      Displacement d{std::vector<double>(n), eps};
      std::size_t c = code;
      for (std::size_t k = 0; k < n; ++k, c /= 3) d.delta[k] = vals[c % 3];
      out.push_back(std::move(d));
    }
    return out;
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < max_full_dim; ++k) total *= 3;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  out.push_back(Displacement::zero(n, eps));
  while (out.size() < total) {
    Displacement d{std::vector<double>(n), eps};
    for (auto& v : d.delta) v = vals[pick(rng)];
    out.push_back(std::move(d));
  }
  return out;
}

inline constexpr double kDefaultLatticeCap = 1e7;

/// Z^n intersected with (P + delta).
inline std::vector<LatticePoint> lattice_points(const Polytope& P, const Displacement& d,
                                                double cap = kDefaultLatticeCap) {
  const std::size_t n = P.dim();
  require(d.delta.size() == n, "displacement dimension differs from polytope dimension");
  std::vector<int> lo(n), hi(n);
  double volume = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    lo[k] = static_cast<int>(std::ceil(P.lower(k) + d.delta[k] - kContainsTolerance));
    hi[k] = static_cast<int>(std::floor(P.upper(k) + d.delta[k] + kContainsTolerance));
    if (hi[k] < lo[k]) return {};
    volume *= static_cast<double>(hi[k] - lo[k] + 1);
  }
  if (volume > cap) fail(ErrorKind::InvalidArgument, "polytope too large");
  std::vector<LatticePoint> out;
  std::vector<int> z = lo;
  std::vector<double> shifted(n);
  while (true) {
    for (std::size_t k = 0; k < n; ++k) shifted[k] = z[k] - d.delta[k];
    if (contains(P, shifted)) out.emplace_back(z);
    std::size_t k = 0;
    while (k < n && z[k] == hi[k]) z[k] = lo[k], ++k;
    if (k == n) break;
    ++z[k];
  }
  sort_grevlex(out);
  return out;
}

}  // namespace rforge
