#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rforge/monomial.hpp"
#include "rforge/poly.hpp"
#include "rforge/template_gen.hpp"

namespace rforge {

/// Where a coefficient lands in M = M0 + lambda * M1. For slot entries
/// `value` is a scale applied to the slot; otherwise it is the constant.
struct Placement {
  std::size_t row = 0;
  std::size_t col = 0;
  int lambda_power = 0;
  std::optional<int> slot;
  double value = 1.0;
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// A pair of columns whose monomials differ by e_var; the ratio of the
/// corresponding eigenvector (or full b) entries is x_var at the root.
struct RecoveryPair {
  std::size_t base = 0;
  std::size_t shifted = 0;
  friend bool operator==(const RecoveryPair&, const RecoveryPair&) = default;
};

struct VariableRecovery {
  std::size_t var = 0;
  bool from_eigenvalue = false;
  std::vector<RecoveryPair> pairs;  // column indices into [b1; b2]
  friend bool operator==(const VariableRecovery&, const VariableRecovery&) = default;

  bool recoverable() const { return from_eigenvalue || !pairs.empty(); }
};

/// Frozen offline artifact consumed by the online solver.
struct SolverTemplate {
  PolySystem system;
  std::size_t hidden_var = 0;
  Formulation formulation = Formulation::Standard;
  std::vector<Monomial> b_lambda;
  std::vector<Monomial> b_c;
  std::vector<RowLabel> rows;  // upper block then lower block (|B_lambda| rows); square once finalized
  std::vector<Placement> placements;
  std::vector<VariableRecovery> recovery;
  bool back_substitution = false;  // some pair reaches into B_c
  double kappa_max = 1e12;

  std::size_t n_vars() const noexcept { return system.n_vars; }
  std::size_t m() const noexcept { return system.polys.size(); }
  std::size_t eigen_size() const noexcept { return b_lambda.size(); }
  std::size_t inversion_size() const noexcept { return b_c.size(); }
  std::size_t basis_size() const noexcept { return b_lambda.size() + b_c.size(); }
  std::size_t slot_count() const { return system.slot_count(); }
  bool is_square() const noexcept { return rows.size() == basis_size(); }

  std::vector<Monomial> columns() const {
    std::vector<Monomial> c = b_lambda;
    c.insert(c.end(), b_c.begin(), b_c.end());
    return c;
  }

  void validate() const {
    require(rows.size() >= basis_size(), "template needs at least |B_lambda| + |B_c| rows");
    for (const auto& p : placements) {
      require(p.row < rows.size() && p.col < basis_size(), "placement outside matrix");
      require(p.lambda_power == 0 || p.lambda_power == 1, "placement lambda power must be 0 or 1");
      if (p.slot) require(static_cast<std::size_t>(*p.slot) < slot_count(), "placement slot out of range");
    }
    require(recovery.size() == n_vars(), "recovery plan must list every variable");
    for (const auto& r : recovery)
      for (const auto& pr : r.pairs) require(pr.base < basis_size() && pr.shifted < basis_size(), "recovery pair out of range");
  }
};

/// Checks the lower block placement by placement. Standard: the lambda part
/// is exactly -I on B_lambda and 0 on B_c. Alternate: the constant part is
/// exactly I on B_lambda and 0 on B_c. The empty string means it holds.
inline std::string lower_block_violation(const SolverTemplate& t) {
  const std::size_t L = t.eigen_size();
  if (t.rows.size() < L) return "fewer rows than |B_lambda|";
  const std::size_t U = t.rows.size() - L;
  const int structural = t.formulation == Formulation::Standard ? 1 : 0;
  const double diag = t.formulation == Formulation::Standard ? -1.0 : 1.0;
  std::vector<int> seen(L, 0);
  for (const auto& p : t.placements) {
    if (p.row < U || p.lambda_power != structural) continue;
    const std::size_t k = p.row - U;
    if (p.slot || p.col != k || p.value != diag)
      return "unexpected entry at lower row " + std::to_string(k) + ", column " + std::to_string(p.col);
    ++seen[k];
  }
  for (std::size_t k = 0; k < L; ++k)
    if (seen[k] != 1) return "diagonal entry missing at lower row " + std::to_string(k);
  for (const auto& p : t.placements)
    if (p.row < U && p.lambda_power != 0) return "lambda appears in the upper block";
  return {};
}

inline std::string size_summary(const SolverTemplate& t) {
  return "inv " + std::to_string(t.inversion_size()) + "x" + std::to_string(t.inversion_size()) + ", eig " +
         std::to_string(t.eigen_size()) + "x" + std::to_string(t.eigen_size());
}

}  // namespace rforge
