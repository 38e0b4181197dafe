#pragma once

// Classical hidden-variable resultant as a comparison baseline: hide x_i in
// the coefficients, build a square M(x_i) = sum_k x_i^k M_k over a basis in
// the remaining variables, and solve det M(x_i) = 0 as a generalized
// eigenvalue problem after companion linearization.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/poly.hpp"
#include "rforge/polytope.hpp"
#include "rforge/seeding.hpp"
#include "rforge/template_gen.hpp"

namespace rforge {

struct GepTemplate {
  PolySystem system;
  std::size_t hidden_var = 0;
  std::vector<Monomial> basis;  // monomials in the other n-1 variables
  SymbolicMatrix matrix;        // lambda_power = exponent of the hidden variable
  int degree = 0;               // highest power of the hidden variable

  std::size_t size() const noexcept { return basis.size(); }
  std::size_t pencil_size() const noexcept { return basis.size() * static_cast<std::size_t>(degree); }
};

namespace detail {

inline Monomial drop_coordinate(const Monomial& a, std::size_t i) {
  std::vector<int> e;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (k != i) e.push_back(a[k]);
  return Monomial(std::move(e));
}

inline std::vector<Monomial> projected_support(const ParamPolynomial& p, std::size_t i) {
  std::vector<Monomial> out;
  for (const auto& a : supp(p)) out.push_back(drop_coordinate(a, i));
  sort_grevlex(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline SymbolicMatrix gep_matrix(const PolySystem& sys, std::size_t i, const std::vector<Monomial>& basis,
                                 const std::vector<std::vector<Monomial>>& mult) {
  SymbolicMatrix M;
  M.cols = basis;
  M.slot_count = sys.slot_count();
  std::unordered_map<Monomial, std::size_t, MonomialHash> idx;
  for (std::size_t c = 0; c < basis.size(); ++c) idx.emplace(basis[c], c);
  for (std::size_t j = 0; j < mult.size(); ++j)
    for (const auto& t : mult[j]) {
      std::vector<SymbolicEntry> row;
      for (const auto& term : sys.polys[j].terms()) {
        if (!term.coef.is_slot() && term.coef.constant == 0.0) continue;
        const std::size_t c = idx.at(t + drop_coordinate(term.monomial, i));
        auto it = std::find_if(row.begin(), row.end(), [&](const SymbolicEntry& e) { return e.col == c; });
        if (it == row.end()) {
          row.push_back({c, {}});
          it = row.end() - 1;
        }
        it->terms.push_back({term.monomial[i], term.coef});
      }
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
      M.rows.push_back({j, t});
      M.entries.push_back(std::move(row));
    }
  M.upper_rows = M.rows.size();
  return M;
}

}  // namespace detail

/// Searches hidden variable (unless fixed), polytope subset and displacement
/// for the smallest basis whose M(x_i) has full generic column rank, then
/// squares it by greedy seeded row removal.
inline GepTemplate generate_gep(const PolySystem& sys, const SearchConfig& cfg = {},
                                std::optional<std::size_t> hidden = std::nullopt) {
  sys.validate();
  cfg.validate();
  const std::size_t n = sys.n_vars, m = sys.polys.size();
  if (m < n) fail(ErrorKind::NoFavourableBasis, "no favourable basis found: system has fewer equations than unknowns (m < n)");
  require(!hidden || *hidden < n, "hidden variable index out of range");
  std::optional<GepTemplate> best;
  for (std::size_t i = hidden.value_or(0); i < (hidden ? *hidden + 1 : n); ++i) {
    std::vector<std::vector<Monomial>> supports;
    for (const auto& p : sys.polys) supports.push_back(detail::projected_support(p, i));
    std::vector<std::vector<Monomial>> bases;
    if (n == 1) {
      bases.push_back({Monomial(0)});
    } else {
      std::vector<Polytope> polys{unit_simplex(n - 1)};
      for (const auto& s : supports) polys.emplace_back(n - 1, s);
      const auto subsets = detail::ordered_subsets(polys.size(), cfg.max_subset_size.value_or(polys.size()));
      const auto deltas = displacement_grid(n - 1, cfg.epsilon, derive_seed(cfg.seed, {hash_tag("gep-delta")}));
      for (const auto& sub : subsets) {
        Polytope Q = polys[sub[0]];
        for (std::size_t k = 1; k < sub.size(); ++k) Q = minkowski_sum(Q, polys[sub[k]]);
        for (const auto& d : deltas) bases.push_back(lattice_points(Q, d, cfg.lattice_cap));
      }
    }
    for (auto& B : bases) {
      if (B.empty() || (best && B.size() >= best->basis.size())) continue;
      auto T = multiplier_sets(B, supports);
      std::size_t rows = 0, minT = ~std::size_t{0};
      for (const auto& t : T) rows += t.size(), minT = std::min(minT, t.size());
      if (minT == 0 || rows < B.size()) continue;
      SymbolicMatrix M = detail::gep_matrix(sys, i, B, T);
      if (generic_rank(M, cfg, "gep-rank") != B.size()) continue;
      int deg = 0;
      for (const auto& row : M.entries)
        for (const auto& e : row)
          for (const auto& t : e.terms) deg = std::max(deg, t.lambda_power);
      if (deg == 0) continue;
      best = GepTemplate{sys, i, B, std::move(M), deg};
    }
  }
  if (!best) fail(ErrorKind::NoFavourableBasis, "no favourable basis found for the hidden-variable baseline");

  GepTemplate& g = *best;
  std::vector<std::size_t> order(g.matrix.row_count());
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  std::mt19937_64 rng(derive_seed(cfg.seed, {hash_tag("gep-rows")}));
  seeded_shuffle(order, rng);
  std::vector<char> keep(order.size(), 1);
  std::size_t kept = order.size();
  auto submatrix = [&]() {
    SymbolicMatrix S = g.matrix;
    S.rows.clear();
    S.entries.clear();
    for (std::size_t r = 0; r < keep.size(); ++r)
      if (keep[r]) {
        S.rows.push_back(g.matrix.rows[r]);
        S.entries.push_back(g.matrix.entries[r]);
      }
    S.upper_rows = S.rows.size();
    return S;
  };
  for (std::size_t r : order) {
    if (kept == g.basis.size()) break;
    keep[r] = 0;
    if (generic_rank(submatrix(), cfg, "gep-rank") == g.basis.size()) {
      --kept;
    } else {
      keep[r] = 1;
    }
  }
  if (kept != g.basis.size()) fail(ErrorKind::CannotSquare, "cannot square hidden-variable matrix");
  g.matrix = submatrix();
  return std::move(g);
}

struct GepResult {
  std::vector<std::vector<Complex>> roots;  // residual below the filter
  std::vector<double> residuals;
  std::size_t eigenvalue_count = 0;         // pencil size
  std::size_t infinite = 0;                 // |beta| ~ 0
  std::size_t spurious = 0;                 // finite, residual above the filter

  std::size_t parasitic() const noexcept { return infinite + spurious; }
};

inline GepResult solve_gep(const GepTemplate& g, const std::vector<double>& coeffs, double residual_filter = 1e-6) {
  const auto polys = instantiate(g.system, coeffs);
  const auto N = static_cast<Eigen::Index>(g.size());
  const int d = g.degree;
  std::vector<Eigen::MatrixXd> Mk(static_cast<std::size_t>(d) + 1, Eigen::MatrixXd::Zero(N, N));
  for (std::size_t r = 0; r < g.matrix.row_count(); ++r)
    for (const auto& e : g.matrix.entries[r])
      for (const auto& t : e.terms)
        Mk[static_cast<std::size_t>(t.lambda_power)](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e.col)) +=
            t.coef.is_slot() ? coeffs[static_cast<std::size_t>(*t.coef.slot)] : t.coef.constant;

  const Eigen::Index S = N * d;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(S, S), B = Eigen::MatrixXd::Identity(S, S);
  for (int k = 0; k + 1 < d; ++k) A.block(k * N, (k + 1) * N, N, N) = Eigen::MatrixXd::Identity(N, N);
  for (int k = 0; k < d; ++k) A.block((d - 1) * N, k * N, N, N) = -Mk[static_cast<std::size_t>(k)];
  B.block((d - 1) * N, (d - 1) * N, N, N) = Mk[static_cast<std::size_t>(d)];

  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(A, B, true);
  if (ges.info() != Eigen::Success) fail(ErrorKind::Numerical, "generalized eigensolver did not converge");
  const Eigen::VectorXcd alphas = ges.alphas();
  const Eigen::VectorXd betas = ges.betas();
  const Eigen::MatrixXcd vecs = ges.eigenvectors();

  GepResult out;
  out.eigenvalue_count = static_cast<std::size_t>(S);
  const std::size_t n = g.system.n_vars;
  std::unordered_map<Monomial, std::size_t, MonomialHash> idx;
  for (std::size_t c = 0; c < g.basis.size(); ++c) idx.emplace(g.basis[c], c);
  for (Eigen::Index k = 0; k < S; ++k) {
    if (std::abs(betas(k)) <= 1e-12 * std::abs(alphas(k)) || betas(k) == 0.0) {
      ++out.infinite;
      continue;
    }
    const Complex lam = alphas(k) / betas(k);
    Eigen::Index blk = 0;
    for (Eigen::Index b = 1; b < d; ++b)
      if (vecs.col(k).segment(b * N, N).norm() > vecs.col(k).segment(blk * N, N).norm()) blk = b;
    const Eigen::VectorXcd v = vecs.col(k).segment(blk * N, N);
    std::vector<Complex> x(n, Complex(std::numeric_limits<double>::quiet_NaN()));
    x[g.hidden_var] = lam;
    bool ok = true;
    for (std::size_t j = 0, pj = 0; j < n; ++j) {
      if (j == g.hidden_var) continue;
      const Monomial e = Monomial::unit(n - 1, pj++);
      double bestden = 0.0;
      for (std::size_t c = 0; c < g.basis.size(); ++c) {
        auto it = idx.find(g.basis[c] + e);
        if (it == idx.end()) continue;
        const double den = std::abs(v(static_cast<Eigen::Index>(c)));
        if (den > bestden) {
          bestden = den;
          x[j] = v(static_cast<Eigen::Index>(it->second)) / v(static_cast<Eigen::Index>(c));
        }
      }
      if (bestden == 0.0) ok = false;
    }
    const double res = ok ? normalized_residual(polys, x) : std::numeric_limits<double>::infinity();
    if (!(res <= residual_filter)) {
      ++out.spurious;
      continue;
    }
    out.roots.push_back(std::move(x));
    out.residuals.push_back(res);
  }
  return out;
}

}  // namespace rforge
