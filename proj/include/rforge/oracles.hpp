#pragma once

// Independent root-count and root-location oracles: companion-matrix roots,
// Sylvester-resultant elimination for bivariate systems, 2-D mixed volume,
// and root-set matching.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/poly.hpp"

namespace rforge {

/// All complex roots of sum_k coeffs[k] t^k via the companion matrix.
inline std::vector<Complex> companion_roots(const std::vector<Complex>& coeffs) {
  require(coeffs.size() >= 2, "companion_roots: degree must be at least 1");
  const Complex lead = coeffs.back();
  if (std::abs(lead) <= 1e-12) fail(ErrorKind::InvalidArgument, "companion_roots: near-zero leading coefficient");
  const auto d = static_cast<Eigen::Index>(coeffs.size() - 1);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index k = 1; k < d; ++k) C(k, k - 1) = 1.0;
  for (Eigen::Index k = 0; k < d; ++k) C(k, d - 1) = -coeffs[static_cast<std::size_t>(k)] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "companion_roots: eigensolver failed");
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

/// Roots of a univariate NumPolynomial (n_vars must be 1).
template <class Scalar>
std::vector<Complex> companion_roots(const BasicNumPolynomial<Scalar>& p) {
  require(p.n_vars() == 1, "companion_roots: polynomial must be univariate");
  int deg = 0;
  for (const auto& t : p.terms()) {
    require(t.monomial[0] >= 0, "companion_roots: negative exponent");
    if (t.coef != Scalar(0)) deg = std::max(deg, t.monomial[0]);
  }
  std::vector<Complex> c(static_cast<std::size_t>(deg) + 1, Complex(0.0));
  for (const auto& t : p.terms())
    if (t.monomial[0] <= deg) c[static_cast<std::size_t>(t.monomial[0])] += Complex(t.coef);
  return companion_roots(c);
}

namespace detail {

/// Dense coefficient table c[i][j] of x^i y^j.
struct Bivariate {
  std::vector<std::vector<Complex>> c;
  int deg_x = 0, deg_y = 0;

  template <class Scalar>
  explicit Bivariate(const BasicNumPolynomial<Scalar>& p) {
    require(p.n_vars() == 2, "bivariate polynomial expected");
    for (const auto& t : p.terms())
      if (t.coef != Scalar(0)) {
        deg_x = std::max(deg_x, t.monomial[0]);
        deg_y = std::max(deg_y, t.monomial[1]);
      }
    c.assign(static_cast<std::size_t>(deg_x) + 1, std::vector<Complex>(static_cast<std::size_t>(deg_y) + 1, 0.0));
    for (const auto& t : p.terms())
      if (t.coef != Scalar(0)) c[static_cast<std::size_t>(t.monomial[0])][static_cast<std::size_t>(t.monomial[1])] += Complex(t.coef);
  }

  /// Coefficients in x after substituting y.
  std::vector<Complex> at_y(Complex y) const {
    std::vector<Complex> out(c.size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      Complex acc(0.0);
      for (std::size_t j = c[i].size(); j-- > 0;) acc = acc * y + c[i][j];
      out[i] = acc;
    }
    return out;
  }

  Complex eval(Complex x, Complex y) const {
    const auto cx = at_y(y);
    Complex acc(0.0);
    for (std::size_t i = cx.size(); i-- > 0;) acc = acc * x + cx[i];
    return acc;
  }

  Complex dx(Complex x, Complex y) const {
    const auto cx = at_y(y);
    Complex acc(0.0);
    for (std::size_t i = cx.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * cx[i];
    return acc;
  }

  Complex dy(Complex x, Complex y) const {
    Complex acc(0.0), xp(1.0);
    for (std::size_t i = 0; i < c.size(); ++i, xp *= x) {
      Complex inner(0.0);
      for (std::size_t j = c[i].size(); j-- > 1;) inner = inner * y + static_cast<double>(j) * c[i][j];
      acc += xp * inner;
    }
    return acc;
  }
};

/// det of the Sylvester matrix in x of two polynomials with coefficient vectors a, b (ascending).
inline Complex sylvester_det(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  const std::size_t da = a.size() - 1, db = b.size() - 1, n = da + db;
  if (n == 0) return 1.0;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < db; ++r)
    for (std::size_t k = 0; k <= da; ++k) S(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r + da - k)) = a[k];
  for (std::size_t r = 0; r < da; ++r)
    for (std::size_t k = 0; k <= db; ++k) S(static_cast<Eigen::Index>(db + r), static_cast<Eigen::Index>(r + db - k)) = b[k];
  return S.partialPivLu().determinant();
}

}  // namespace detail

/// Common roots of two bivariate polynomials by eliminating x with the
/// Sylvester resultant. The resultant (a polynomial in y) is recovered by
/// sampling on the unit circle and an inverse DFT; its roots are lifted to
/// x-roots of f(., y0), polished by Newton on (f, g) and kept when the
/// normalized residual is below 1e-8.
template <class Scalar>
std::vector<std::vector<Complex>> sylvester_roots(const BasicNumPolynomial<Scalar>& f, const BasicNumPolynomial<Scalar>& g) {
  const detail::Bivariate F(f), G(g);
  if (F.deg_x + G.deg_x == 0) fail(ErrorKind::NonGeneric, "non-generic instance: neither polynomial involves x");
  const int bound = F.deg_x * G.deg_y + G.deg_x * F.deg_y;
  const std::size_t N = static_cast<std::size_t>(bound) + 1;
  std::vector<Complex> samples(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Complex y = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N));
    samples[k] = detail::sylvester_det(F.at_y(y), G.at_y(y));
  }
  std::vector<Complex> res(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    Complex acc(0.0);
    for (std::size_t k = 0; k < N; ++k)
      acc += samples[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(N));
    res[j] = acc / static_cast<double>(N);
  }
  double big = 0.0;
  for (auto c : res) big = std::max(big, std::abs(c));
  if (big == 0.0) fail(ErrorKind::NonGeneric, "non-generic instance: resultant vanishes identically");
  while (res.size() > 1 && std::abs(res.back()) <= 1e-10 * big) res.pop_back();
  std::vector<Complex> ys;
  if (res.size() >= 2) ys = companion_roots(res);

  auto residual = [&](Complex x, Complex y) {
    auto mag = [&](const detail::Bivariate& P) {
      double s = 0.0;
      for (std::size_t i = 0; i < P.c.size(); ++i)
        for (std::size_t j = 0; j < P.c[i].size(); ++j)
          s += std::abs(P.c[i][j] * ipow(x, static_cast<int>(i)) * ipow(y, static_cast<int>(j)));
      return s;
    };
    return std::max(std::abs(F.eval(x, y)) / (1.0 + mag(F)), std::abs(G.eval(x, y)) / (1.0 + mag(G)));
  };

  std::vector<std::vector<Complex>> out;
  for (Complex y0 : ys) {
    std::vector<Complex> xs;
    auto cf = F.at_y(y0), cg = G.at_y(y0);
    auto trim = [](std::vector<Complex> c) {
      double m = 0.0;
      for (auto v : c) m = std::max(m, std::abs(v));
      while (c.size() > 1 && std::abs(c.back()) <= 1e-10 * m) c.pop_back();
      return c;
    };
    cf = trim(cf);
    cg = trim(cg);
    const auto& cx = cf.size() >= 2 ? cf : cg;
    if (cx.size() < 2) continue;
    xs = companion_roots(cx);
    for (Complex x : xs) {
      Complex xr = x, yr = y0;
      for (int it = 0; it < 20; ++it) {
        const Complex fv = F.eval(xr, yr), gv = G.eval(xr, yr);
        const Complex a = F.dx(xr, yr), b = F.dy(xr, yr), c = G.dx(xr, yr), d = G.dy(xr, yr);
        const Complex det = a * d - b * c;
        if (std::abs(det) == 0.0) break;
        const Complex sx = (d * fv - b * gv) / det, sy = (a * gv - c * fv) / det;
        xr -= sx;
        yr -= sy;
        if (std::abs(sx) + std::abs(sy) <= 1e-15 * (1.0 + std::abs(xr) + std::abs(yr))) break;
      }
      if (!(residual(xr, yr) < 1e-8)) continue;
      bool dup = false;
      for (const auto& r : out)
        if (std::abs(r[0] - xr) < 1e-6 && std::abs(r[1] - yr) < 1e-6) dup = true;
      if (!dup) out.push_back({xr, yr});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a[0].real() != b[0].real()) return a[0].real() < b[0].real();
    if (a[0].imag() != b[0].imag()) return a[0].imag() < b[0].imag();
    return a[1].real() < b[1].real();
  });
  return out;
}

/// Convex hull of 2-D integer points (counter-clockwise, no collinear points).
inline std::vector<std::pair<long long, long long>> convex_hull_2d(std::vector<std::pair<long long, long long>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<long long, long long>> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Twice the area of conv(pts), exact.
inline long long doubled_hull_area(const std::vector<std::pair<long long, long long>>& pts) {
  const auto h = convex_hull_2d(pts);
  if (h.size() < 3) return 0;
  long long s = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    s += a.first * b.second - b.first * a.second;
  }
  return s < 0 ? -s : s;
}

/// Mixed volume of two planar lattice polytopes:
/// MV(P, Q) = area(P + Q) - area(P) - area(Q).
inline long long bkk_2d(const std::vector<Monomial>& P, const std::vector<Monomial>& Q) {
  require(!P.empty() && !Q.empty(), "bkk_2d: empty support");
  std::vector<std::pair<long long, long long>> p, q, s;
  for (const auto& a : P) {
    require(a.size() == 2, "bkk_2d: supports must be bivariate");
    p.emplace_back(a[0], a[1]);
  }
  for (const auto& b : Q) {
    require(b.size() == 2, "bkk_2d: supports must be bivariate");
    q.emplace_back(b[0], b[1]);
  }
  for (const auto& a : p)
    for (const auto& b : q) s.emplace_back(a.first + b.first, a.second + b.second);
  const long long twice = doubled_hull_area(s) - doubled_hull_area(p) - doubled_hull_area(q);
  return twice / 2;
}

template <class Scalar>
long long bkk_2d(const BasicNumPolynomial<Scalar>& f, const BasicNumPolynomial<Scalar>& g) {
  return bkk_2d(supp(f), supp(g));
}

inline long long bkk_2d(const ParamPolynomial& f, const ParamPolynomial& g) { return bkk_2d(supp(f), supp(g)); }

inline double point_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

struct RootMatch {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double max_error = 0.0;
  std::size_t unmatched_a = 0, unmatched_b = 0;
};

/// Matches two root lists by per-coordinate max distance. Exact optimal
/// assignment (minimizing the worst matched distance, then the sum) when
/// both lists have at most 12 entries; otherwise greedy nearest neighbour
/// with a 1e-4 gate.
inline RootMatch match_roots(const std::vector<std::vector<Complex>>& a, const std::vector<std::vector<Complex>>& b) {
  RootMatch m;
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::vector<double>> d(na, std::vector<double>(nb));
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) d[i][j] = point_distance(a[i], b[j]);
  if (na <= 12 && nb <= 12) {
    // DP over subsets of the smaller side; the larger side is scanned in order.
    const bool swap = na > nb;
    const std::size_t small = swap ? nb : na, large = swap ? na : nb;
    auto dist = [&](std::size_t li, std::size_t si) { return swap ? d[li][si] : d[si][li]; };
    const std::size_t full = (std::size_t{1} << small);
    using Cost = std::pair<double, double>;
    const Cost inf{std::numeric_limits<double>::infinity(), 0.0};
    std::vector<std::vector<Cost>> dp(large + 1, std::vector<Cost>(full, inf));
    std::vector<std::vector<int>> choice(large + 1, std::vector<int>(full, -2));
    dp[0][0] = {0.0, 0.0};
    for (std::size_t li = 0; li < large; ++li)
      for (std::size_t mask = 0; mask < full; ++mask) {
        if (dp[li][mask].first == inf.first) continue;
        if (dp[li][mask] < dp[li + 1][mask]) {
          dp[li + 1][mask] = dp[li][mask];
          choice[li + 1][mask] = -1;
        }
        for (std::size_t si = 0; si < small; ++si) {
          if (mask & (std::size_t{1} << si)) continue;
          const std::size_t nm = mask | (std::size_t{1} << si);
          const double e = dist(li, si);
          const Cost c{std::max(dp[li][mask].first, e), dp[li][mask].second + e};
          if (c < dp[li + 1][nm]) {
            dp[li + 1][nm] = c;
            choice[li + 1][nm] = static_cast<int>(si);
          }
        }
      }
    std::size_t mask = full - 1;
    for (std::size_t li = large; li > 0; --li) {
      const int c = choice[li][mask];
      if (c >= 0) {
        const auto si = static_cast<std::size_t>(c);
        m.pairs.push_back(swap ? std::make_pair(li - 1, si) : std::make_pair(si, li - 1));
        mask &= ~(std::size_t{1} << si);
      }
    }
    std::reverse(m.pairs.begin(), m.pairs.end());
  } else {
    std::vector<char> used(nb, 0);
    for (std::size_t i = 0; i < na; ++i) {
      std::size_t best = nb;
      for (std::size_t j = 0; j < nb; ++j)
        if (!used[j] && d[i][j] < 1e-4 && (best == nb || d[i][j] < d[i][best])) best = j;
      if (best < nb) {
        used[best] = 1;
        m.pairs.emplace_back(i, best);
      }
    }
  }
  for (const auto& [i, j] : m.pairs) m.max_error = std::max(m.max_error, d[i][j]);
  m.unmatched_a = na - m.pairs.size();
  m.unmatched_b = nb - m.pairs.size();
  return m;
}

}  // namespace rforge
