#pragma once

// Basis search for the extra-equation resultant: augment the system with
// x_i - lambda, scan (hidden variable, polytope subset, displacement) for
// monomial bases whose coefficient matrix has full generic rank and a
// full-column-rank A12 block, and keep the smallest.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/modp.hpp"
#include "rforge/monomial.hpp"
#include "rforge/poly.hpp"
#include "rforge/polytope.hpp"
#include "rforge/seeding.hpp"

namespace rforge {

enum class Formulation { Standard, Alternate };
enum class FormulationPreference { Standard, Alternate, Auto };

inline const char* to_string(Formulation f) { return f == Formulation::Standard ? "standard" : "alternate"; }
inline const char* to_string(FormulationPreference f) {
  switch (f) {
    case FormulationPreference::Standard: return "standard";
    case FormulationPreference::Alternate: return "alternate";
    default: return "auto";
  }
}
inline Formulation formulation_from_string(const std::string& s) {
  if (s == "standard") return Formulation::Standard;
  if (s == "alternate") return Formulation::Alternate;
  fail(ErrorKind::Parse, "unknown formulation '" + s + "'");
}
inline FormulationPreference preference_from_string(const std::string& s) {
  if (s == "standard") return FormulationPreference::Standard;
  if (s == "alternate") return FormulationPreference::Alternate;
  if (s == "auto") return FormulationPreference::Auto;
  fail(ErrorKind::Parse, "unknown formulation preference '" + s + "'");
}

struct SearchConfig {
  double epsilon = 0.45;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_subset_size;
  int rank_trials = 3;
  std::uint64_t rank_prime = modp::kDefaultPrime;
  FormulationPreference formulation = FormulationPreference::Auto;
  std::size_t jobs = 1;
  double lattice_cap = kDefaultLatticeCap;

  void validate() const {
    require(epsilon > 0.0 && epsilon < 0.5, "epsilon must lie in (0, 0.5)");
    require(rank_trials >= 1, "rank_trials must be at least 1");
    require(rank_prime > 2, "rank_prime must be an odd prime");
  }
};

/// The input system plus the extra polynomial f_{m+1} = x_i - lambda. Lambda
/// is never a monomial variable: f_{m+1} has x-support {e_i, 0} and the
/// constant term carries the lambda marker.
struct AugmentedSystem {
  PolySystem base;
  std::size_t hidden_var = 0;

  std::size_t n() const noexcept { return base.n_vars; }
  std::size_t m() const noexcept { return base.polys.size(); }
  std::size_t poly_count() const noexcept { return m() + 1; }
  Monomial hidden_unit() const { return Monomial::unit(n(), hidden_var); }

  std::vector<Monomial> support(std::size_t j) const {
    if (j < m()) return supp(base.polys[j]);
    return {Monomial(n()), hidden_unit()};
  }
};

inline AugmentedSystem augment(const PolySystem& sys, std::size_t var) {
  require(var < sys.n_vars, "hidden variable index out of range");
  return {sys, var};
}

/// T_j = { t in Z^n : t + A_j is contained in B }.
inline std::vector<Monomial> multiplier_set(const std::vector<Monomial>& basis, const std::vector<Monomial>& support) {
  require(!basis.empty(), "multiplier_set: empty basis");
  require(!support.empty(), "multiplier_set: empty support");
  std::unordered_set<Monomial, MonomialHash> in_basis(basis.begin(), basis.end());
  std::vector<Monomial> out;
  for (const auto& b : basis) {
    Monomial t = b - support.front();
    bool ok = true;
    for (const auto& a : support)
      if (!in_basis.count(t + a)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(std::move(t));
  }
  sort_grevlex(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::vector<Monomial>> multiplier_sets(const std::vector<Monomial>& basis,
                                                          const std::vector<std::vector<Monomial>>& supports) {
  std::vector<std::vector<Monomial>> out;
  for (const auto& s : supports) out.push_back(multiplier_set(basis, s));
  return out;
}

struct CandidateBasis {
  std::size_t hidden_var = 0;
  std::vector<Monomial> basis;                     // B, ascending grevlex
  std::vector<std::vector<Monomial>> multipliers;  // T_1 .. T_{m+1}
  std::vector<Monomial> b_lambda;                  // ordered like T_{m+1}
  std::vector<Monomial> b_c;                       // ascending grevlex
  Formulation formulation = Formulation::Standard;
  std::vector<std::size_t> subset;  // polytope indices, 0 = unit simplex
  Displacement delta;

  std::size_t total_rows() const {
    std::size_t s = 0;
    for (const auto& t : multipliers) s += t.size();
    return s;
  }
  std::size_t min_multiplier_count() const {
    std::size_t s = ~std::size_t{0};
    for (const auto& t : multipliers) s = std::min(s, t.size());
    return s;
  }
  const std::vector<Monomial>& lambda_multipliers() const { return multipliers.back(); }
};

/// Splits B into (B_lambda, B_c). Standard: B_lambda = B n T_{m+1}. Alternate:
/// B_lambda is the image x_i * T_{m+1}, which makes A21 = I and A22 = 0.
inline void partition(CandidateBasis& cand, Formulation f) {
  cand.formulation = f;
  const std::size_t n = cand.basis.front().size();
  const Monomial shift = f == Formulation::Alternate ? Monomial::unit(n, cand.hidden_var) : Monomial(n);
  std::unordered_set<Monomial, MonomialHash> in_basis(cand.basis.begin(), cand.basis.end());
  cand.b_lambda.clear();
  for (const auto& t : cand.lambda_multipliers()) {
    Monomial m = t + shift;
    if (in_basis.count(m)) cand.b_lambda.push_back(std::move(m));
  }
  std::unordered_set<Monomial, MonomialHash> lam(cand.b_lambda.begin(), cand.b_lambda.end());
  cand.b_c.clear();
  for (const auto& b : cand.basis)
    if (!lam.count(b)) cand.b_c.push_back(b);
}

/// One term of a symbolic matrix entry: lambda^power * coefficient.
struct EntryTerm {
  int lambda_power = 0;
  Coefficient coef;
  friend bool operator==(const EntryTerm&, const EntryTerm&) = default;
};

struct SymbolicEntry {
  std::size_t col = 0;
  std::vector<EntryTerm> terms;
};

struct RowLabel {
  std::size_t poly = 0;  // 0-based; poly == m marks the x_i - lambda block
  Monomial multiplier;
  friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

/// Coefficient matrix M(lambda) with rows t * f_j and columns b = [b1; b2].
struct SymbolicMatrix {
  std::vector<RowLabel> rows;
  std::vector<Monomial> cols;
  std::vector<std::vector<SymbolicEntry>> entries;  // per row, ascending col
  std::size_t upper_rows = 0;
  std::size_t lambda_cols = 0;
  std::size_t slot_count = 0;

  std::size_t row_count() const noexcept { return rows.size(); }
  std::size_t col_count() const noexcept { return cols.size(); }

  const SymbolicEntry* find(std::size_t r, std::size_t c) const {
    for (const auto& e : entries[r])
      if (e.col == c) return &e;
    return nullptr;
  }
};

inline SymbolicMatrix build_matrix(const CandidateBasis& cand, const AugmentedSystem& aug) {
  require(!cand.basis.empty(), "build_matrix: empty basis");
  require(cand.multipliers.size() == aug.poly_count(), "build_matrix: multiplier set count mismatch");
  SymbolicMatrix M;
  M.cols = cand.b_lambda;
  M.cols.insert(M.cols.end(), cand.b_c.begin(), cand.b_c.end());
  M.lambda_cols = cand.b_lambda.size();
  M.slot_count = aug.base.slot_count();
  std::unordered_map<Monomial, std::size_t, MonomialHash> col_of;
  for (std::size_t c = 0; c < M.cols.size(); ++c) col_of.emplace(M.cols[c], c);
  auto col = [&](const Monomial& mono) {
    auto it = col_of.find(mono);
    if (it == col_of.end()) fail(ErrorKind::Internal, "build_matrix: monomial " + mono.to_string() + " missing from basis");
    return it->second;
  };
  auto add = [&](std::vector<SymbolicEntry>& row, std::size_t c, EntryTerm term) {
    for (auto& e : row)
      if (e.col == c) {
        e.terms.push_back(term);
        return;
      }
    row.push_back({c, {term}});
  };
  for (std::size_t j = 0; j < aug.m(); ++j)
    for (const auto& t : cand.multipliers[j]) {
      std::vector<SymbolicEntry> row;
      for (const auto& term : aug.base.polys[j].terms()) {
        if (!term.coef.is_slot() && term.coef.constant == 0.0) continue;
        add(row, col(t + term.monomial), {0, term.coef});
      }
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
      M.rows.push_back({j, t});
      M.entries.push_back(std::move(row));
    }
  M.upper_rows = M.rows.size();
  const Monomial ei = aug.hidden_unit();
  for (const auto& t : cand.lambda_multipliers()) {
    std::vector<SymbolicEntry> row;
    add(row, col(t + ei), {0, Coefficient::of_constant(1.0)});
    add(row, col(t), {1, Coefficient::of_constant(-1.0)});
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
    M.rows.push_back({aug.m(), t});
    M.entries.push_back(std::move(row));
  }
  return M;
}

/// Checks the block pattern that makes the eigenvalue reduction possible:
/// standard form needs B21 = -I, B22 = 0; alternate form needs A21 = I, A22 = 0.
/// Upper rows must be lambda-free and lower rows must be x^t (x_i - lambda).
inline bool has_block_structure(const SymbolicMatrix& M, Formulation f) {
  const std::size_t lower = M.row_count() - M.upper_rows;
  if (lower != M.lambda_cols) return false;
  for (std::size_t r = 0; r < M.upper_rows; ++r)
    for (const auto& e : M.entries[r])
      for (const auto& t : e.terms)
        if (t.lambda_power != 0) return false;
  for (std::size_t k = 0; k < lower; ++k) {
    const auto& row = M.entries[M.upper_rows + k];
    if (row.size() != 2) return false;
    std::size_t lam_hits = 0, const_hits = 0;
    for (const auto& e : row) {
      if (e.terms.size() != 1 || e.terms[0].coef.is_slot()) return false;
      const auto& t = e.terms[0];
      if (t.lambda_power == 1) {
        if (t.coef.constant != -1.0) return false;
        if (f == Formulation::Standard && e.col != k) return false;
        ++lam_hits;
      } else if (t.lambda_power == 0) {
        if (t.coef.constant != 1.0) return false;
        if (f == Formulation::Alternate && e.col != k) return false;
        ++const_hits;
      } else {
        return false;
      }
    }
    if (lam_hits != 1 || const_hits != 1) return false;
  }
  return true;
}

/// Deterministic random stream for genericity tests keyed by matrix content,
/// so identical matrices always get identical draws.
inline std::uint64_t content_seed(std::uint64_t seed, std::string_view tag, const SymbolicMatrix& M) {
  std::uint64_t h = hash_tag(tag);
  MonomialHash mh;
  for (const auto& r : M.rows) h = splitmix64(h ^ (r.poly * 0x100000001b3ull) ^ mh(r.multiplier));
  for (const auto& c : M.cols) h = splitmix64(h ^ mh(c));
  return derive_seed(seed, {h});
}

/// Evaluates the given block of M with every slot and lambda replaced by a
/// random non-zero residue mod p.
inline modp::Matrix draw_modp(const SymbolicMatrix& M, std::mt19937_64& rng, std::uint64_t p, std::size_t row_begin,
                              std::size_t row_end, std::size_t col_begin, std::size_t col_end) {
  std::vector<std::uint64_t> slots(M.slot_count);
  for (auto& s : slots) s = 1 + rng() % (p - 1);
  const std::uint64_t lam = 1 + rng() % (p - 1);
  modp::Matrix A(row_end - row_begin, col_end - col_begin);
  for (std::size_t r = row_begin; r < row_end; ++r)
    for (const auto& e : M.entries[r]) {
      if (e.col < col_begin || e.col >= col_end) continue;
      std::uint64_t v = 0;
      for (const auto& t : e.terms) {
        std::uint64_t c = t.coef.is_slot() ? slots.at(static_cast<std::size_t>(*t.coef.slot))
                                           : modp::from_double(t.coef.constant, p);
        if (t.lambda_power > 0) c = modp::mul(c, modp::pow(lam, static_cast<std::uint64_t>(t.lambda_power), p), p);
        v = (v + c) % p;
      }
      A.at(r - row_begin, e.col - col_begin) = v;
    }
  return A;
}

/// Generic rank of the full M(lambda): max over `rank_trials` random
/// instantiations (slots and lambda) over Z/p.
inline std::size_t generic_rank(const SymbolicMatrix& M, const SearchConfig& cfg, std::string_view tag = "rank") {
  std::mt19937_64 rng(content_seed(cfg.seed, tag, M));
  std::size_t best = 0;
  for (int trial = 0; trial < cfg.rank_trials; ++trial) {
    best = std::max(best, modp::rank(draw_modp(M, rng, cfg.rank_prime, 0, M.row_count(), 0, M.col_count()),
                                     cfg.rank_prime));
    if (best == std::min(M.row_count(), M.col_count())) break;
  }
  return best;
}

/// True iff the upper-row / B_c-column block has generic full column rank.
inline bool a12_fullrank(const SymbolicMatrix& M, const SearchConfig& cfg) {
  const std::size_t bc = M.col_count() - M.lambda_cols;
  if (bc == 0) return true;
  if (bc > M.upper_rows) return false;
  std::mt19937_64 rng(content_seed(cfg.seed, "a12", M));
  for (int trial = 0; trial < cfg.rank_trials; ++trial)
    if (modp::rank(draw_modp(M, rng, cfg.rank_prime, 0, M.upper_rows, M.lambda_cols, M.col_count()),
                   cfg.rank_prime) == bc)
      return true;
  return false;
}

/// All acceptance conditions on a candidate in its current partition.
struct CandidateCheck {
  bool rows_cover_cols = false;
  bool multipliers_nonempty = false;
  bool full_rank = false;
  bool structure = false;
  bool a12 = false;
  bool ok() const { return rows_cover_cols && multipliers_nonempty && full_rank && structure && a12; }
};

inline CandidateCheck check_candidate(const CandidateBasis& cand, const AugmentedSystem& aug, const SearchConfig& cfg) {
  CandidateCheck c;
  c.rows_cover_cols = cand.total_rows() >= cand.basis.size();
  c.multipliers_nonempty = cand.min_multiplier_count() > 0;
  if (!c.rows_cover_cols || !c.multipliers_nonempty) return c;
  const SymbolicMatrix M = build_matrix(cand, aug);
  c.full_rank = generic_rank(M, cfg) == cand.basis.size();
  c.structure = has_block_structure(M, cand.formulation);
  c.a12 = c.structure && a12_fullrank(M, cfg);
  return c;
}

enum class Rejection { None, EmptyBasis, TooFewRows, EmptyMultiplierSet, RankDeficient, A12RankDeficient, TooLarge };

inline const char* to_string(Rejection r) {
  switch (r) {
    case Rejection::None: return "accepted";
    case Rejection::EmptyBasis: return "empty basis";
    case Rejection::TooFewRows: return "sum |T_j| < |B|";
    case Rejection::EmptyMultiplierSet: return "some T_j empty";
    case Rejection::RankDeficient: return "rank(M) < |B|";
    case Rejection::A12RankDeficient: return "A12 not full column rank";
    case Rejection::TooLarge: return "polytope too large";
  }
  return "?";
}

struct SearchDiagnostic {
  std::size_t hidden_var = 0;
  std::vector<std::size_t> subset;
  std::vector<double> delta;
  std::size_t basis_size = 0;
  Rejection reason = Rejection::None;
};

struct SearchOutcome {
  std::optional<CandidateBasis> best;
  std::vector<SearchDiagnostic> diagnostics;
  std::size_t evaluated = 0;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> ordered_subsets(std::size_t count, std::size_t max_size) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  for (std::size_t size = 1; size <= std::min(count, max_size); ++size) {
    cur.assign(size, 0);
    for (std::size_t k = 0; k < size; ++k) cur[k] = k;
    while (true) {
      out.push_back(cur);
      std::size_t k = size;
      while (k > 0 && cur[k - 1] == count - size + k - 1) --k;
      if (k == 0) break;
      ++cur[k - 1];
      for (std::size_t q = k; q < size; ++q) cur[q] = cur[q - 1] + 1;
    }
  }
  return out;
}

/// Total preference order among accepted candidates: smaller |B|, then
/// smaller |B_lambda|, then lexicographically smaller B.
inline bool better_candidate(const CandidateBasis& a, const CandidateBasis& b) {
  if (a.basis.size() != b.basis.size()) return a.basis.size() < b.basis.size();
  if (a.b_lambda.size() != b.b_lambda.size()) return a.b_lambda.size() < b.b_lambda.size();
  std::vector<Monomial> sa = a.basis, sb = b.basis;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa < sb;
}

struct SearchTask {
  std::size_t hidden_var;
  std::size_t subset_index;
};

}  // namespace detail

/// Tries the formulations allowed by the preference on a fresh candidate.
inline Rejection evaluate_candidate(CandidateBasis& cand, const AugmentedSystem& aug, const SearchConfig& cfg) {
  if (cand.basis.empty()) return Rejection::EmptyBasis;
  if (cand.total_rows() < cand.basis.size()) return Rejection::TooFewRows;
  if (cand.min_multiplier_count() == 0) return Rejection::EmptyMultiplierSet;
  partition(cand, cfg.formulation == FormulationPreference::Alternate ? Formulation::Alternate : Formulation::Standard);
  SymbolicMatrix M = build_matrix(cand, aug);
  if (generic_rank(M, cfg) != cand.basis.size()) return Rejection::RankDeficient;
  if (has_block_structure(M, cand.formulation) && a12_fullrank(M, cfg)) return Rejection::None;
  if (cfg.formulation == FormulationPreference::Auto) {
    partition(cand, Formulation::Alternate);
    M = build_matrix(cand, aug);
    if (has_block_structure(M, cand.formulation) && a12_fullrank(M, cfg)) return Rejection::None;
  }
  return Rejection::A12RankDeficient;
}

/// Full scan; never throws for "nothing found" (see `search`).
inline SearchOutcome search_all(const PolySystem& sys, const SearchConfig& cfg) {
  sys.validate();
  cfg.validate();
  require(sys.polys.size() >= sys.n_vars, "system has fewer equations than unknowns (m < n)");
  const std::size_t n = sys.n_vars, m = sys.polys.size();
  const std::size_t polytope_count = m + 2;  // unit simplex, f_1..f_m, x_i - lambda
  const auto subsets = detail::ordered_subsets(polytope_count, cfg.max_subset_size.value_or(polytope_count));
  const auto deltas = displacement_grid(n, cfg.epsilon, derive_seed(cfg.seed, {hash_tag("delta")}));

  std::vector<detail::SearchTask> tasks;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < subsets.size(); ++s) tasks.push_back({i, s});

  struct TaskResult {
    std::optional<CandidateBasis> best;
    std::vector<SearchDiagnostic> diags;
  };
  std::vector<TaskResult> results(tasks.size());

  auto run_task = [&](std::size_t idx) {
    const auto& task = tasks[idx];
    const AugmentedSystem aug = augment(sys, task.hidden_var);
    std::vector<std::vector<Monomial>> supports;
    for (std::size_t j = 0; j < aug.poly_count(); ++j) supports.push_back(aug.support(j));
    std::optional<Polytope> Q;
    for (std::size_t k : subsets[task.subset_index]) {
      const Polytope P = k == 0 ? unit_simplex(n) : Polytope(n, supports[k - 1]);
      Q = Q ? minkowski_sum(*Q, P) : prune_to_vertices(P);
    }
    TaskResult& res = results[idx];
    for (const auto& d : deltas) {
      SearchDiagnostic diag{task.hidden_var, subsets[task.subset_index], d.delta, 0, Rejection::None};
      CandidateBasis cand;
      cand.hidden_var = task.hidden_var;
      cand.subset = subsets[task.subset_index];
      cand.delta = d;
      try {
        cand.basis = lattice_points(*Q, d, cfg.lattice_cap);
      } catch (const Error&) {
        diag.reason = Rejection::TooLarge;
        res.diags.push_back(std::move(diag));
        continue;
      }
      diag.basis_size = cand.basis.size();
      if (!cand.basis.empty()) cand.multipliers = multiplier_sets(cand.basis, supports);
      diag.reason = evaluate_candidate(cand, aug, cfg);
      if (diag.reason == Rejection::None && (!res.best || detail::better_candidate(cand, *res.best)))
        res.best = std::move(cand);
      res.diags.push_back(std::move(diag));
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, tasks.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) run_task(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < tasks.size(); k += jobs) run_task(k);
      });
    for (auto& t : pool) t.join();
  }

  SearchOutcome out;
  for (auto& r : results) {
    out.evaluated += r.diags.size();
    for (auto& d : r.diags) out.diagnostics.push_back(std::move(d));
    if (r.best && (!out.best || detail::better_candidate(*r.best, *out.best))) out.best = std::move(r.best);
  }
  return out;
}

/// Smallest favourable basis; throws ErrorKind::NoFavourableBasis with a
/// per-reason summary of the rejected (variable, subset, displacement) triples.
inline CandidateBasis search(const PolySystem& sys, const SearchConfig& cfg) {
  if (sys.polys.size() < sys.n_vars)
    fail(ErrorKind::NoFavourableBasis, "no favourable basis found: system has fewer equations than unknowns (m < n)");
  SearchOutcome out = search_all(sys, cfg);
  if (out.best) return std::move(*out.best);
  std::map<std::string, std::size_t> counts;
  for (const auto& d : out.diagnostics) ++counts[to_string(d.reason)];
  std::ostringstream msg;
  msg << "no favourable basis found (" << out.evaluated << " candidates:";
  for (const auto& [reason, c] : counts) msg << ' ' << reason << '=' << c << ';';
  msg << ')';
  fail(ErrorKind::NoFavourableBasis, msg.str());
}

}  // namespace rforge
