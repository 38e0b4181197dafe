#pragma once

// Online stage: fill the template with numeric coefficients, eliminate the
// b2 block through a linear solve with A12-hat, solve the small eigenvalue
// problem and read the roots off the eigenpairs.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/poly.hpp"
#include "rforge/solver_template.hpp"

namespace rforge {

/// Dense numeric blocks of M = M0 + lambda M1. For the standard formulation
/// `lower_lambda`/`lower_c` hold A21/A22 (the lambda part is the structural
/// -I, 0); for the alternate one they hold B21/B22 (A21 = I, A22 = 0).
struct FilledBlocks {
  Formulation formulation = Formulation::Standard;
  Eigen::MatrixXd a11, a12, lower_lambda, lower_c;
};

/// Dense M0 and M1 (rows in template order, columns [b1; b2]).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fill_dense(const SolverTemplate& tpl,
                                                               const std::vector<double>& coeffs) {
  require(coeffs.size() == tpl.slot_count(), "coefficient vector length " + std::to_string(coeffs.size()) +
                                                 " differs from slot count " + std::to_string(tpl.slot_count()));
  for (double c : coeffs) require(std::isfinite(c), "non-finite coefficient");
  const auto r = static_cast<Eigen::Index>(tpl.rows.size());
  const auto n = static_cast<Eigen::Index>(tpl.basis_size());
  Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(r, n), m1 = Eigen::MatrixXd::Zero(r, n);
  for (const auto& p : tpl.placements) {
    const double v = p.slot ? coeffs[static_cast<std::size_t>(*p.slot)] * p.value : p.value;
    (p.lambda_power == 0 ? m0 : m1)(static_cast<Eigen::Index>(p.row), static_cast<Eigen::Index>(p.col)) += v;
  }
  return {std::move(m0), std::move(m1)};
}

inline FilledBlocks fill(const SolverTemplate& tpl, const std::vector<double>& coeffs) {
  auto [m0, m1] = fill_dense(tpl, coeffs);
  const auto L = static_cast<Eigen::Index>(tpl.eigen_size());
  const auto C = static_cast<Eigen::Index>(tpl.inversion_size());
  const auto U = static_cast<Eigen::Index>(tpl.rows.size()) - L;
  FilledBlocks b;
  b.formulation = tpl.formulation;
  b.a11 = m0.topLeftCorner(U, L);
  b.a12 = m0.topRightCorner(U, C);
  const Eigen::MatrixXd& lower = tpl.formulation == Formulation::Standard ? m0 : m1;
  b.lower_lambda = lower.bottomLeftCorner(L, L);
  b.lower_c = lower.bottomRightCorner(L, C);
  return b;
}

struct SchurResult {
  Eigen::MatrixXd X;
  Eigen::MatrixXd a12_solve_a11;  // A12-hat^{-1} A11, so b2 = -a12_solve_a11 * b1
  double condition = 1.0;         // estimated 1-norm condition number of A12-hat
};

/// X = lower_lambda - lower_c * A12-hat^{-1} A11 (standard: eigenvalues lambda;
/// alternate: eigenvalues -1/lambda). A12-hat is never inverted explicitly:
/// square blocks go through a partial-pivoting LU, tall ones (unsquared
/// audit templates) through a least-squares QR solve.
inline SchurResult schur_reduce(const FilledBlocks& b, double kappa_max = 1e12) {
  require(b.a12.rows() >= b.a12.cols(), "A12 must have at least as many rows as columns");
  SchurResult out;
  if (b.a12.cols() == 0) {
    out.X = b.lower_lambda;
    out.a12_solve_a11 = Eigen::MatrixXd::Zero(0, b.lower_lambda.cols());
    return out;
  }
  auto check = [&](double cond) {
    out.condition = std::isfinite(cond) ? cond : std::numeric_limits<double>::infinity();
    if (!(out.condition <= kappa_max))
      fail(ErrorKind::IllConditioned,
           "ill-conditioned A12-hat (condition estimate " + std::to_string(out.condition) + ")");
  };
  if (b.a12.rows() == b.a12.cols()) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b.a12);
    // rcond alone can miss an exactly zero pivot
    const double rc = lu.rcond();
    const bool zero_pivot = (lu.matrixLU().diagonal().array() == 0.0).any();
    check(rc > 0.0 && !zero_pivot ? 1.0 / rc : std::numeric_limits<double>::infinity());
    out.a12_solve_a11 = lu.solve(b.a11);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.a12);
    const auto& sv = svd.singularValues();
    check(sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity());
    out.a12_solve_a11 = b.a12.colPivHouseholderQr().solve(b.a11);
  }
  out.X = b.lower_lambda - b.lower_c * out.a12_solve_a11;
  return out;
}

struct Eigenpair {
  Complex lambda;  // hidden-variable value
  Complex raw;     // eigenvalue of X as computed (mu for the alternate form)
  Eigen::VectorXcd vector;
};

struct EigenResult {
  std::vector<Eigenpair> pairs;
  std::size_t dropped_infinite = 0;
};

inline constexpr double kInfiniteMuThreshold = 1e-12;

inline EigenResult eigensolve(const Eigen::MatrixXd& X, Formulation f = Formulation::Standard) {
  require(X.rows() == X.cols(), "eigensolve needs a square matrix");
  require(X.allFinite(), "eigensolve: non-finite matrix entry");
  EigenResult out;
  if (X.rows() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(X, true);
  if (es.info() != Eigen::Success)
    fail(ErrorKind::Numerical, "eigensolver did not converge on a " + std::to_string(X.rows()) + "x" +
                                   std::to_string(X.cols()) + " matrix");
  const Eigen::VectorXcd vals = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    Eigenpair p{vals(k), vals(k), vecs.col(k)};
    if (f == Formulation::Alternate) {
      if (std::abs(vals(k)) < kInfiniteMuThreshold) {
        ++out.dropped_infinite;
        continue;
      }
      p.lambda = -1.0 / vals(k);
    }
    out.pairs.push_back(std::move(p));
  }
  return out;
}

struct Root {
  std::vector<Complex> values;
  double residual = 0.0;
  bool is_real = false;
  bool complete = true;
  Complex eigenvalue;
};

struct SolutionSet {
  std::vector<Root> roots;
  double condition = 1.0;
  std::size_t eigenvalue_count = 0;
  std::size_t dropped_infinite = 0;
  Formulation formulation = Formulation::Standard;

  /// Complete roots whose normalized residual is below `tol`.
  std::vector<Root> valid_roots(double tol = 1e-6) const {
    std::vector<Root> out;
    for (const auto& r : roots)
      if (r.complete && r.residual < tol) out.push_back(r);
    return out;
  }
};

struct SolveOptions {
  double real_tolerance = 1e-8;  // |imag| <= tol * (1 + |real|)
  double denominator_tolerance = 1e-12;
};

inline bool is_real_value(Complex z, double tol) { return std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real())); }

/// Eigenvector scaled so that the entry for monomial 1 equals one, or the
/// largest-magnitude entry when 1 is absent from B_lambda or vanishes.
inline Eigen::VectorXcd normalized_eigenvector(const SolverTemplate& tpl, const Eigen::VectorXcd& v) {
  if (v.size() == 0) return v;
  Eigen::Index big = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (std::abs(v(k)) > std::abs(v(big))) big = k;
  Eigen::Index base = big;
  for (std::size_t k = 0; k < tpl.b_lambda.size(); ++k)
    if (tpl.b_lambda[k].is_one() && std::abs(v(static_cast<Eigen::Index>(k))) > 1e-12 * std::abs(v(big)))
      base = static_cast<Eigen::Index>(k);
  return v / v(base);
}

/// Full monomial vector [b1; b2] with b2 = -A12-hat^{-1} A11 b1.
inline Eigen::VectorXcd back_substitute(const SchurResult& s, const Eigen::VectorXcd& b1) {
  Eigen::VectorXcd full(b1.size() + s.a12_solve_a11.rows());
  full.head(b1.size()) = b1;
  full.tail(s.a12_solve_a11.rows()) = -(s.a12_solve_a11.cast<Complex>() * b1);
  return full;
}

inline SolutionSet extract_solutions(const SolverTemplate& tpl, const EigenResult& eig, const SchurResult& schur,
                                     const std::vector<NumPolynomial>& polys, const SolveOptions& opt = {}) {
  SolutionSet out;
  out.condition = schur.condition;
  out.eigenvalue_count = eig.pairs.size() + eig.dropped_infinite;
  out.dropped_infinite = eig.dropped_infinite;
  out.formulation = tpl.formulation;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& ep : eig.pairs) {
    const Eigen::VectorXcd b = tpl.back_substitution ? back_substitute(schur, ep.vector) : ep.vector;
    const double scale = b.cwiseAbs().maxCoeff();
    Root root;
    root.eigenvalue = ep.lambda;
    root.values.assign(tpl.n_vars(), Complex(nan, nan));
    for (const auto& rec : tpl.recovery) {
      if (rec.from_eigenvalue) {
        root.values[rec.var] = ep.lambda;
        continue;
      }
      const RecoveryPair* best = nullptr;
      for (const auto& pr : rec.pairs)
        if (!best || std::abs(b(static_cast<Eigen::Index>(pr.base))) > std::abs(b(static_cast<Eigen::Index>(best->base))))
          best = &pr;
      if (!best || !(std::abs(b(static_cast<Eigen::Index>(best->base))) >= opt.denominator_tolerance * scale)) {
        root.complete = false;
        continue;
      }
      root.values[rec.var] = b(static_cast<Eigen::Index>(best->shifted)) / b(static_cast<Eigen::Index>(best->base));
    }
    if (root.complete) {
      root.residual = normalized_residual(polys, root.values);
      if (!std::isfinite(root.residual)) root.residual = std::numeric_limits<double>::infinity();
      root.is_real = std::all_of(root.values.begin(), root.values.end(),
                                 [&](Complex z) { return is_real_value(z, opt.real_tolerance); });
    } else {
      root.residual = std::numeric_limits<double>::infinity();
    }
    out.roots.push_back(std::move(root));
  }
  std::stable_sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
    if (a.eigenvalue.real() != b.eigenvalue.real()) return a.eigenvalue.real() < b.eigenvalue.real();
    return a.eigenvalue.imag() < b.eigenvalue.imag();
  });
  return out;
}

inline SolutionSet solve(const SolverTemplate& tpl, const std::vector<double>& coeffs, const SolveOptions& opt = {}) {
  const auto polys = instantiate(tpl.system, coeffs);
  const FilledBlocks blocks = fill(tpl, coeffs);
  const SchurResult schur = schur_reduce(blocks, tpl.kappa_max);
  const EigenResult eig = eigensolve(schur.X, tpl.formulation);
  return extract_solutions(tpl, eig, schur, polys, opt);
}

/// Solves with `primary`; on an ill-conditioned A12-hat retries `fallback` when given.
inline SolutionSet solve(const SolverTemplate& primary, const SolverTemplate* fallback,
                         const std::vector<double>& coeffs, const SolveOptions& opt = {}) {
  try {
    return solve(primary, coeffs, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned || !fallback) throw;
    return solve(*fallback, coeffs, opt);
  }
}

}  // namespace rforge
