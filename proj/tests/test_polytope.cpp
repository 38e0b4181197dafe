#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "rforge/oracles.hpp"
#include "rforge/polytope.hpp"

using namespace rforge;

namespace {

using P2 = std::pair<long long, long long>;

// Exact point-in-convex-polygon for a rational point (px/q, py/q): every
// hull edge (counter-clockwise) must see the point on its left or on it.
bool in_polygon_rational(const std::vector<P2>& hull, long long px, long long py, long long q) {
  if (hull.size() == 1) return hull[0].first * q == px && hull[0].second * q == py;
  if (hull.size() == 2) {
    const auto [ax, ay] = hull[0];
    const auto [bx, by] = hull[1];
    const long long cross = (bx - ax) * (py - ay * q) - (by - ay) * (px - ax * q);
    if (cross != 0) return false;
    const long long dot = (px - ax * q) * (bx - ax) + (py - ay * q) * (by - ay);
    const long long len = ((bx - ax) * (bx - ax) + (by - ay) * (by - ay)) * q;
    return dot >= 0 && dot <= len;
  }
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const auto [ax, ay] = hull[k];
    const auto [bx, by] = hull[(k + 1) % hull.size()];
    if ((bx - ax) * (py - ay * q) - (by - ay) * (px - ax * q) < 0) return false;
  }
  return true;
}

std::vector<P2> to_pairs(const std::vector<Monomial>& pts) {
  std::vector<P2> out;
  for (const auto& p : pts) out.emplace_back(p[0], p[1]);
  return out;
}

std::vector<Monomial> brute_lattice(const std::vector<P2>& hull_pts) {
  const auto hull = convex_hull_2d(hull_pts);
  long long lx = hull[0].first, hx = lx, ly = hull[0].second, hy = ly;
  for (auto [x, y] : hull) lx = std::min(lx, x), hx = std::max(hx, x), ly = std::min(ly, y), hy = std::max(hy, y);
  std::vector<Monomial> out;
  for (long long x = lx; x <= hx; ++x)
    for (long long y = ly; y <= hy; ++y)
      if (in_polygon_rational(hull, x, y, 1)) out.push_back({static_cast<int>(x), static_cast<int>(y)});
  return out;
}

std::vector<Monomial> sorted(std::vector<Monomial> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Monomial> vertices(const Polytope& P) { return sorted(prune_to_vertices(P).points()); }

const Polytope kS1Sum(2, {{0, 0}, {2, 0}, {3, 1}, {1, 3}, {0, 2}});

}  // namespace

TEST(NewtonPolytope, Examples) {
  const NumPolynomial f1(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -5.0}});
  const NumPolynomial f2(2, {{{1, 1}, 1.0}, {{0, 0}, -2.0}});
  EXPECT_EQ(vertices(newton_polytope(f1)), (std::vector<Monomial>{{0, 0}, {0, 2}, {2, 0}}));
  EXPECT_EQ(vertices(newton_polytope(f2)), (std::vector<Monomial>{{0, 0}, {1, 1}}));
  EXPECT_EQ(vertices(unit_simplex(2)), (std::vector<Monomial>{{0, 0}, {0, 1}, {1, 0}}));
}

TEST(MinkowskiSum, Examples) {
  const Polytope two = minkowski_sum(unit_simplex(2), unit_simplex(2));
  EXPECT_EQ(vertices(two), (std::vector<Monomial>{{0, 0}, {0, 2}, {2, 0}}));
  for (auto pt : {std::vector<double>{1, 1}, {0, 0}, {2, 0}, {0, 2}}) EXPECT_TRUE(contains(two, pt));

  const Polytope np1(2, {{2, 0}, {0, 2}, {0, 0}}), np2(2, {{1, 1}, {0, 0}});
  EXPECT_EQ(vertices(minkowski_sum(np1, np2)), vertices(kS1Sum));
  EXPECT_EQ(vertices(minkowski_sum(np1, Polytope(2, {{0, 0}}))), vertices(np1));
}

TEST(MinkowskiSum, CommutativeAndAssociative) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> c(-2, 3), k(1, 4);
  auto draw = [&] {
    std::vector<Monomial> pts;
    for (int i = k(rng); i > 0; --i) pts.push_back({c(rng), c(rng)});
    return Polytope(2, pts);
  };
  for (int trial = 0; trial < 30; ++trial) {
    const Polytope A = draw(), B = draw(), C = draw();
    EXPECT_EQ(vertices(minkowski_sum(A, B)), vertices(minkowski_sum(B, A)));
    EXPECT_EQ(vertices(minkowski_sum(minkowski_sum(A, B), C)), vertices(minkowski_sum(A, minkowski_sum(B, C))));
  }
}

TEST(Contains, Examples) {
  EXPECT_TRUE(contains(unit_simplex(2), {0.5, 0.5}));
  EXPECT_FALSE(contains(unit_simplex(2), {1.1, 0.0}));
  EXPECT_TRUE(contains(kS1Sum, {1.0, 1.0}));
}

TEST(Contains, AgreesWithRationalOracle) {
  const auto hull = convex_hull_2d(to_pairs(kS1Sum.points()));
  const long long q = 4;
  for (long long x = -4; x <= 16; ++x)
    for (long long y = -4; y <= 16; ++y)
      EXPECT_EQ(contains(kS1Sum, {x / 4.0, y / 4.0}), in_polygon_rational(hull, x, y, q)) << x << "/4, " << y << "/4";
}

TEST(LatticePoints, Examples) {
  const Polytope two = minkowski_sum(unit_simplex(2), unit_simplex(2));
  EXPECT_EQ(sorted(lattice_points(two, Displacement::zero(2))),
            sorted({{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {0, 2}}));
  EXPECT_EQ(lattice_points(unit_simplex(2), Displacement{{-0.45, -0.45}, 0.45}), (std::vector<Monomial>{{0, 0}}));
  const auto pts = lattice_points(kS1Sum, Displacement::zero(2));
  EXPECT_EQ(pts.size(), 11u);  // Pick: area 6, 8 boundary points
  EXPECT_EQ(sorted(pts), sorted(brute_lattice(to_pairs(kS1Sum.points()))));
}

TEST(LatticePoints, TooLargeIsAnError) {
  const Polytope big(2, {{0, 0}, {5000, 0}, {0, 5000}});
  EXPECT_THROW(lattice_points(big, Displacement::zero(2)), Error);
}

TEST(LatticePoints, PicksTheoremOnRandomPolygons) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> c(-4, 6), k(3, 4);
  int checked = 0;
  while (checked < 25) {
    std::vector<Monomial> pts;
    for (int i = k(rng); i > 0; --i) pts.push_back({c(rng), c(rng)});
    const auto hull = convex_hull_2d(to_pairs(pts));
    if (hull.size() < 3) continue;
    const long long twice_area = doubled_hull_area(hull);
    long long boundary = 0;
    for (std::size_t e = 0; e < hull.size(); ++e) {
      const auto [ax, ay] = hull[e];
      const auto [bx, by] = hull[(e + 1) % hull.size()];
      boundary += std::gcd(std::llabs(bx - ax), std::llabs(by - ay));
    }
    // Pick: A = I + B/2 - 1, so the total count is A + B/2 + 1.
    const long long total = (twice_area + boundary) / 2 + 1;
    const Polytope P(2, pts);
    EXPECT_EQ(static_cast<long long>(lattice_points(P, Displacement::zero(2)).size()), total);
    EXPECT_EQ(sorted(lattice_points(P, Displacement::zero(2))), sorted(brute_lattice(to_pairs(pts))));
    ++checked;
  }
}

TEST(LatticePoints, TranslationEquivariant) {
  const Monomial v{3, -2};
  const auto base = lattice_points(kS1Sum, Displacement::zero(2));
  const auto moved = lattice_points(minkowski_sum(kS1Sum, Polytope(2, {v})), Displacement::zero(2));
  std::vector<Monomial> shifted;
  for (const auto& p : base) shifted.push_back(p + v);
  EXPECT_EQ(sorted(moved), sorted(shifted));
}

TEST(LatticePoints, ThreeDimensionalSimplexCount) {
  // k-fold simplex in 3-D has C(k+3, 3) lattice points.
  Polytope P = unit_simplex(3);
  for (int k = 2; k <= 4; ++k) {
    P = minkowski_sum(P, unit_simplex(3));
    EXPECT_EQ(lattice_points(P, Displacement::zero(3)).size(), static_cast<std::size_t>((k + 1) * (k + 2) * (k + 3) / 6));
  }
}

TEST(DisplacementGrid, ZeroFirstAndFullSize) {
  const auto g = displacement_grid(2, 0.45, 0);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g[0].delta, (std::vector<double>{0.0, 0.0}));
  const auto big = displacement_grid(9, 0.45, 1);
  EXPECT_EQ(big.size(), 6561u);
  EXPECT_EQ(big, displacement_grid(9, 0.45, 1));
}
