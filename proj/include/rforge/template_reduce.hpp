#pragma once

// Column/row pruning of an accepted candidate, then squaring by removal of
// excess rows, and freezing into a SolverTemplate. Every accepted step keeps
// the eigenvalue-friendly block decomposition intact.

#include <algorithm>
#include <cstddef>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/seeding.hpp"
#include "rforge/solver_template.hpp"
#include "rforge/template_gen.hpp"

namespace rforge {

struct ReductionStep {
  enum class Kind { Columns, Row };
  Kind kind = Kind::Columns;
  std::vector<Monomial> cols;
  std::vector<RowLabel> rows;
  friend bool operator==(const ReductionStep&, const ReductionStep&) = default;
};

struct ReductionTrace {
  std::vector<ReductionStep> steps;

  std::vector<Monomial> removed_cols() const {
    std::vector<Monomial> out;
    for (const auto& s : steps) out.insert(out.end(), s.cols.begin(), s.cols.end());
    return out;
  }
  std::vector<RowLabel> removed_rows() const {
    std::vector<RowLabel> out;
    for (const auto& s : steps) out.insert(out.end(), s.rows.begin(), s.rows.end());
    return out;
  }
  bool empty() const noexcept { return steps.empty(); }
  void append(const ReductionTrace& o) { steps.insert(steps.end(), o.steps.begin(), o.steps.end()); }
  friend bool operator==(const ReductionTrace&, const ReductionTrace&) = default;
};

struct Reduced {
  CandidateBasis cand;
  SymbolicMatrix matrix;
  ReductionTrace trace;
};

namespace detail {

inline void erase_monomials(std::vector<Monomial>& v, const std::vector<Monomial>& gone) {
  std::unordered_set<Monomial, MonomialHash> g(gone.begin(), gone.end());
  v.erase(std::remove_if(v.begin(), v.end(), [&](const Monomial& x) { return g.count(x) > 0; }), v.end());
}

/// Applies a step to (B, T) and re-partitions in the candidate's formulation.
inline CandidateBasis apply_step(const CandidateBasis& cand, const ReductionStep& step) {
  CandidateBasis out = cand;
  erase_monomials(out.basis, step.cols);
  for (const auto& r : step.rows) {
    auto& T = out.multipliers.at(r.poly);
    T.erase(std::remove(T.begin(), T.end(), r.multiplier), T.end());
  }
  if (!out.basis.empty()) partition(out, cand.formulation);
  return out;
}

/// Column-removal conditions: every T_j non-empty; p - k >= |B| - l with full
/// generic rank; block structure and A12 full column rank still hold.
inline bool column_conditions_hold(const CandidateBasis& cand, const SymbolicMatrix& M, const SearchConfig& cfg) {
  if (cand.basis.empty() || cand.min_multiplier_count() == 0) return false;
  if (cand.total_rows() < cand.basis.size()) return false;
  if (generic_rank(M, cfg) != cand.basis.size()) return false;
  return has_block_structure(M, cand.formulation) && a12_fullrank(M, cfg);
}

}  // namespace detail

/// Algorithm-2 style basis reduction. Columns are visited in a seeded random
/// order; the scan restarts after every accepted removal and stops after a
/// full pass that removes nothing. A removal whose column set is still used
/// by some surviving row is skipped: the survivors would no longer be rows
/// t * f_j over the reduced basis.
inline Reduced reduce_columns(const CandidateBasis& start, const AugmentedSystem& aug, const SearchConfig& cfg) {
  Reduced out{start, build_matrix(start, aug), {}};
  std::mt19937_64 rng(derive_seed(cfg.seed, {hash_tag("reduce-columns")}));
  bool removed = true;
  while (removed) {
    removed = false;
    const SymbolicMatrix& M = out.matrix;
    std::vector<std::size_t> order(M.col_count());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    seeded_shuffle(order, rng);
    for (std::size_t c : order) {
      std::vector<char> row_hit(M.row_count(), 0), col_hit(M.col_count(), 0);
      for (std::size_t r = 0; r < M.row_count(); ++r)
        if (M.find(r, c)) row_hit[r] = 1;
      for (std::size_t r = 0; r < M.row_count(); ++r)
        if (row_hit[r])
          for (const auto& e : M.entries[r]) col_hit[e.col] = 1;
      bool closed = true;
      for (std::size_t r = 0; r < M.row_count() && closed; ++r)
        if (!row_hit[r])
          for (const auto& e : M.entries[r])
            if (col_hit[e.col]) {
              closed = false;
              break;
            }
      if (!closed) continue;
      ReductionStep step{ReductionStep::Kind::Columns, {}, {}};
      for (std::size_t k = 0; k < M.col_count(); ++k)
        if (col_hit[k]) step.cols.push_back(M.cols[k]);
      for (std::size_t r = 0; r < M.row_count(); ++r)
        if (row_hit[r]) step.rows.push_back(M.rows[r]);
      CandidateBasis next = detail::apply_step(out.cand, step);
      if (next.basis.empty() || next.min_multiplier_count() == 0) continue;
      SymbolicMatrix Mn = build_matrix(next, aug);
      if (!detail::column_conditions_hold(next, Mn, cfg)) continue;
      out.cand = std::move(next);
      out.matrix = std::move(Mn);
      out.trace.steps.push_back(std::move(step));
      removed = true;
      break;
    }
  }
  return out;
}

/// Algorithm-3 style squaring: drop untried multipliers, lower block
/// (T_{m+1}) first, until the matrix is square. A removal is kept iff every
/// T_j stays non-empty, M keeps full generic column rank, and the block
/// decomposition with full-rank A12 survives.
inline Reduced remove_excess_rows(const CandidateBasis& start, const AugmentedSystem& aug, const SearchConfig& cfg) {
  Reduced out{start, build_matrix(start, aug), {}};
  require(start.total_rows() >= start.basis.size(), "remove_excess_rows: fewer rows than columns");
  std::mt19937_64 rng(derive_seed(cfg.seed, {hash_tag("remove-rows")}));
  std::set<std::pair<std::size_t, Monomial>> tried;
  const std::size_t lower = aug.m();
  while (out.cand.total_rows() > out.cand.basis.size()) {
    std::vector<Monomial> pool;
    for (const auto& t : out.cand.multipliers[lower])
      if (!tried.count({lower, t})) pool.push_back(t);
    std::size_t block = lower;
    if (pool.empty()) {
      std::vector<std::size_t> blocks;
      for (std::size_t j = 0; j < lower; ++j)
        for (const auto& t : out.cand.multipliers[j])
          if (!tried.count({j, t})) {
            blocks.push_back(j);
            break;
          }
      if (blocks.empty())
        fail(ErrorKind::CannotSquare, "cannot square template: " + std::to_string(out.cand.total_rows()) + " rows, " +
                                          std::to_string(out.cand.basis.size()) + " columns, no removable row left");
      block = blocks[uniform_index(rng, blocks.size())];
      for (const auto& t : out.cand.multipliers[block])
        if (!tried.count({block, t})) pool.push_back(t);
    }
    const Monomial t = pool[uniform_index(rng, pool.size())];
    tried.insert({block, t});
    ReductionStep step{ReductionStep::Kind::Row, {}, {RowLabel{block, t}}};
    CandidateBasis next = detail::apply_step(out.cand, step);
    if (next.min_multiplier_count() == 0) continue;
    SymbolicMatrix Mn = build_matrix(next, aug);
    if (generic_rank(Mn, cfg) != next.basis.size()) continue;
    if (!has_block_structure(Mn, next.formulation) || !a12_fullrank(Mn, cfg)) continue;
    out.cand = std::move(next);
    out.matrix = std::move(Mn);
    out.trace.steps.push_back(std::move(step));
  }
  return out;
}

/// Re-applies a recorded trace without re-running any test.
inline CandidateBasis replay(const CandidateBasis& start, const ReductionTrace& trace) {
  CandidateBasis c = start;
  for (const auto& s : trace.steps) c = detail::apply_step(c, s);
  return c;
}

namespace detail {

inline std::vector<VariableRecovery> recovery_plan(const std::vector<Monomial>& cols, std::size_t lambda_cols,
                                                   std::size_t n, std::size_t hidden, bool& back_substitution) {
  std::unordered_map<Monomial, std::size_t, MonomialHash> idx;
  for (std::size_t c = 0; c < cols.size(); ++c) idx.emplace(cols[c], c);
  std::vector<VariableRecovery> plan;
  back_substitution = false;
  for (std::size_t v = 0; v < n; ++v) {
    VariableRecovery r{v, v == hidden, {}};
    if (!r.from_eigenvalue) {
      const Monomial e = Monomial::unit(n, v);
      for (std::size_t c = 0; c < lambda_cols; ++c) {
        auto it = idx.find(cols[c] + e);
        if (it != idx.end() && it->second < lambda_cols) r.pairs.push_back({c, it->second});
      }
      if (r.pairs.empty()) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          auto it = idx.find(cols[c] + e);
          if (it != idx.end()) r.pairs.push_back({c, it->second});
        }
        if (!r.pairs.empty()) back_substitution = true;
      }
    }
    plan.push_back(std::move(r));
  }
  return plan;
}

}  // namespace detail

/// Freezes a square, structurally valid candidate into a SolverTemplate.
inline SolverTemplate finalize(const CandidateBasis& cand, const SymbolicMatrix& M, const AugmentedSystem& aug,
                               const SearchConfig& cfg, double kappa_max = 1e12) {
  if (M.row_count() != M.col_count())
    fail(ErrorKind::Internal, "finalize: matrix is " + std::to_string(M.row_count()) + "x" +
                                  std::to_string(M.col_count()) + ", not square");
  if (!has_block_structure(M, cand.formulation)) fail(ErrorKind::Internal, "finalize: block structure violated");
  if (cand.min_multiplier_count() == 0) fail(ErrorKind::Internal, "finalize: empty multiplier set");
  if (generic_rank(M, cfg) != M.col_count()) fail(ErrorKind::Internal, "finalize: matrix not of full generic rank");
  if (!a12_fullrank(M, cfg)) fail(ErrorKind::Internal, "finalize: A12 not of full column rank");

  SolverTemplate t;
  t.system = aug.base;
  t.hidden_var = aug.hidden_var;
  t.formulation = cand.formulation;
  t.b_lambda = cand.b_lambda;
  t.b_c = cand.b_c;
  t.rows = M.rows;
  t.kappa_max = kappa_max;
  for (std::size_t r = 0; r < M.row_count(); ++r)
    for (const auto& e : M.entries[r])
      for (const auto& term : e.terms)
        t.placements.push_back({r, e.col, term.lambda_power, term.coef.slot,
                                term.coef.is_slot() ? 1.0 : term.coef.constant});
  t.recovery = detail::recovery_plan(M.cols, M.lambda_cols, aug.n(), aug.hidden_var, t.back_substitution);
  t.validate();
  return t;
}

}  // namespace rforge
