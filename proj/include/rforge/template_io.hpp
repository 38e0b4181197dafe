#pragma once

// Versioned template files: the finalized solver template (plus an optional
// fallback in the other formulation), the reduction trace and the generator
// configuration that produced them. Serialized as JSON with a fixed key
// order so identical inputs give identical bytes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rforge/problem_io.hpp"
#include "rforge/solver_template.hpp"
#include "rforge/template_gen.hpp"
#include "rforge/template_reduce.hpp"

namespace rforge {

inline constexpr const char* kTemplateFormat = "resultant-forge-template";
inline constexpr int kTemplateVersion = 1;

struct SearchProvenance {
  std::size_t hidden_var = 0;
  std::vector<std::size_t> subset;
  std::vector<double> delta;
  std::size_t basis_size = 0;
  std::size_t row_count = 0;
  Formulation formulation = Formulation::Standard;
};

struct TemplateBundle {
  SearchConfig config;
  SearchProvenance search;
  ReductionTrace trace;
  SolverTemplate primary;
  std::optional<SolverTemplate> fallback;

  const SolverTemplate* fallback_ptr() const { return fallback ? &*fallback : nullptr; }
};

/// Everything the generator produces, including the unreduced candidate for audits.
struct GeneratedTemplate {
  TemplateBundle bundle;
  CandidateBasis searched;
  CandidateBasis reduced;
};

/// Freezes a (possibly tall) candidate for audits: solvable by least squares
/// on the upper block. Production templates come from `finalize`.
inline SolverTemplate freeze_unsquared(const CandidateBasis& cand, const AugmentedSystem& aug, double kappa_max = 1e12) {
  const SymbolicMatrix M = build_matrix(cand, aug);
  require(has_block_structure(M, cand.formulation), "freeze_unsquared: block structure violated");
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
        t.placements.push_back({r, e.col, term.lambda_power, term.coef.slot, term.coef.is_slot() ? 1.0 : term.coef.constant});
  t.recovery = detail::recovery_plan(M.cols, M.lambda_cols, aug.n(), aug.hidden_var, t.back_substitution);
  t.validate();
  return t;
}

/// Offline pipeline: basis search, column reduction, squaring, finalize.
/// With the auto preference a fallback in the other formulation is attached
/// when the squared (B, T) also admits it.
inline GeneratedTemplate generate(const PolySystem& sys, const SearchConfig& cfg, double kappa_max = 1e12) {
  GeneratedTemplate g;
  g.searched = search(sys, cfg);
  const AugmentedSystem aug = augment(sys, g.searched.hidden_var);
  Reduced cols = reduce_columns(g.searched, aug, cfg);
  Reduced rows = remove_excess_rows(cols.cand, aug, cfg);
  g.reduced = rows.cand;
  auto& b = g.bundle;
  b.config = cfg;
  b.search = {g.searched.hidden_var, g.searched.subset,       g.searched.delta.delta,
              g.searched.basis.size(), g.searched.total_rows(), g.searched.formulation};
  b.trace = cols.trace;
  b.trace.append(rows.trace);
  b.primary = finalize(rows.cand, rows.matrix, aug, cfg, kappa_max);
  if (cfg.formulation == FormulationPreference::Auto) {
    CandidateBasis other = rows.cand;
    partition(other, rows.cand.formulation == Formulation::Standard ? Formulation::Alternate : Formulation::Standard);
    const SymbolicMatrix Mo = build_matrix(other, aug);
    if (Mo.row_count() == Mo.col_count() && has_block_structure(Mo, other.formulation) && a12_fullrank(Mo, cfg) &&
        generic_rank(Mo, cfg) == Mo.col_count())
      b.fallback = finalize(other, Mo, aug, cfg, kappa_max);
  }
  return g;
}

namespace detail {

inline Json monomials_to_json(const std::vector<Monomial>& ms) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(monomial_to_json(m));
  return a;
}

inline std::vector<Monomial> monomials_from_json(const Json& j) {
  std::vector<Monomial> out;
  for (const auto& v : j) out.push_back(monomial_from_json(v));
  return out;
}

inline Json rows_to_json(const std::vector<RowLabel>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json o;
    o["poly"] = r.poly;
    o["mult"] = monomial_to_json(r.multiplier);
    a.push_back(std::move(o));
  }
  return a;
}

inline std::vector<RowLabel> rows_from_json(const Json& j) {
  std::vector<RowLabel> out;
  for (const auto& o : j) out.push_back({o.at("poly").get<std::size_t>(), monomial_from_json(o.at("mult"))});
  return out;
}

inline Json template_to_json(const SolverTemplate& t) {
  Json j;
  j["formulation"] = to_string(t.formulation);
  j["hidden_var"] = t.hidden_var;
  j["inversion_size"] = t.inversion_size();
  j["eigen_size"] = t.eigen_size();
  j["kappa_max"] = t.kappa_max;
  j["b_lambda"] = monomials_to_json(t.b_lambda);
  j["b_c"] = monomials_to_json(t.b_c);
  j["rows"] = rows_to_json(t.rows);
  Json pl = Json::array();
  for (const auto& p : t.placements) {
    Json o;
    o["row"] = p.row;
    o["col"] = p.col;
    o["lambda"] = p.lambda_power;
    if (p.slot) {
      o["slot"] = *p.slot;
      o["scale"] = p.value;
    } else {
      o["const"] = p.value;
    }
    pl.push_back(std::move(o));
  }
  j["placements"] = std::move(pl);
  Json rec = Json::array();
  for (const auto& r : t.recovery) {
    Json o;
    o["var"] = r.var;
    o["from_eigenvalue"] = r.from_eigenvalue;
    Json pairs = Json::array();
    for (const auto& pr : r.pairs) pairs.push_back(Json::array({pr.base, pr.shifted}));
    o["pairs"] = std::move(pairs);
    rec.push_back(std::move(o));
  }
  j["recovery"] = std::move(rec);
  j["back_substitution"] = t.back_substitution;
  return j;
}

inline SolverTemplate template_from_json(const Json& j, const PolySystem& sys) {
  SolverTemplate t;
  t.system = sys;
  t.formulation = formulation_from_string(j.at("formulation").get<std::string>());
  t.hidden_var = j.at("hidden_var").get<std::size_t>();
  t.kappa_max = j.at("kappa_max").get<double>();
  t.b_lambda = monomials_from_json(j.at("b_lambda"));
  t.b_c = monomials_from_json(j.at("b_c"));
  t.rows = rows_from_json(j.at("rows"));
  for (const auto& o : j.at("placements")) {
    Placement p;
    p.row = o.at("row").get<std::size_t>();
    p.col = o.at("col").get<std::size_t>();
    p.lambda_power = o.at("lambda").get<int>();
    if (o.contains("slot")) {
      p.slot = o.at("slot").get<int>();
      p.value = o.at("scale").get<double>();
    } else {
      p.value = o.at("const").get<double>();
    }
    t.placements.push_back(p);
  }
  for (const auto& o : j.at("recovery")) {
    VariableRecovery r;
    r.var = o.at("var").get<std::size_t>();
    r.from_eigenvalue = o.at("from_eigenvalue").get<bool>();
    for (const auto& pr : o.at("pairs")) r.pairs.push_back({pr.at(0).get<std::size_t>(), pr.at(1).get<std::size_t>()});
    t.recovery.push_back(std::move(r));
  }
  t.back_substitution = j.at("back_substitution").get<bool>();
  require(t.hidden_var < sys.n_vars, "template hidden variable out of range");
  t.validate();
  return t;
}

}  // namespace detail

inline Json config_to_json(const SearchConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["epsilon"] = c.epsilon;
  j["max_subset_size"] = c.max_subset_size ? Json(*c.max_subset_size) : Json(nullptr);
  j["rank_trials"] = c.rank_trials;
  j["rank_prime"] = c.rank_prime;
  j["formulation"] = to_string(c.formulation);
  return j;
}

inline SearchConfig config_from_json(const Json& j) {
  SearchConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epsilon = j.at("epsilon").get<double>();
  if (!j.at("max_subset_size").is_null()) c.max_subset_size = j.at("max_subset_size").get<std::size_t>();
  c.rank_trials = j.at("rank_trials").get<int>();
  c.rank_prime = j.at("rank_prime").get<std::uint64_t>();
  c.formulation = preference_from_string(j.at("formulation").get<std::string>());
  return c;
}

inline Json bundle_to_json(const TemplateBundle& b) {
  Json j;
  j["format"] = kTemplateFormat;
  j["version"] = kTemplateVersion;
  j["generator"] = config_to_json(b.config);
  j["problem"] = system_to_json(b.primary.system);
  Json s;
  s["hidden_var"] = b.search.hidden_var;
  s["subset"] = b.search.subset;
  s["delta"] = b.search.delta;
  s["basis_size"] = b.search.basis_size;
  s["row_count"] = b.search.row_count;
  s["formulation"] = to_string(b.search.formulation);
  j["search"] = std::move(s);
  Json tr = Json::array();
  for (const auto& st : b.trace.steps) {
    Json o;
    o["kind"] = st.kind == ReductionStep::Kind::Columns ? "columns" : "row";
    o["cols"] = detail::monomials_to_json(st.cols);
    o["rows"] = detail::rows_to_json(st.rows);
    tr.push_back(std::move(o));
  }
  j["trace"] = std::move(tr);
  j["primary"] = detail::template_to_json(b.primary);
  j["fallback"] = b.fallback ? detail::template_to_json(*b.fallback) : Json(nullptr);
  return j;
}

inline TemplateBundle bundle_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format") || j["format"] != kTemplateFormat)
    fail(ErrorKind::Parse, "not a resultant-forge template file");
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kTemplateVersion)
    fail(ErrorKind::VersionMismatch, "unsupported template version " + (j.contains("version") ? j["version"].dump() : "?") +
                                         " (expected " + std::to_string(kTemplateVersion) + ")");
  try {
    TemplateBundle b;
    b.config = config_from_json(j.at("generator"));
    const PolySystem sys = system_from_json(j.at("problem"));
    const Json& s = j.at("search");
    b.search.hidden_var = s.at("hidden_var").get<std::size_t>();
    b.search.subset = s.at("subset").get<std::vector<std::size_t>>();
    b.search.delta = s.at("delta").get<std::vector<double>>();
    b.search.basis_size = s.at("basis_size").get<std::size_t>();
    b.search.row_count = s.at("row_count").get<std::size_t>();
    b.search.formulation = formulation_from_string(s.at("formulation").get<std::string>());
    for (const auto& o : j.at("trace")) {
      ReductionStep st;
      st.kind = o.at("kind").get<std::string>() == "columns" ? ReductionStep::Kind::Columns : ReductionStep::Kind::Row;
      st.cols = detail::monomials_from_json(o.at("cols"));
      st.rows = detail::rows_from_json(o.at("rows"));
      b.trace.steps.push_back(std::move(st));
    }
    b.primary = detail::template_from_json(j.at("primary"), sys);
    if (!j.at("fallback").is_null()) b.fallback = detail::template_from_json(j.at("fallback"), sys);
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad template file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(ErrorKind::Parse, std::string("bad template file: ") + e.what());
  }
}

inline std::string serialize_bundle(const TemplateBundle& b) { return bundle_to_json(b).dump(1) + "\n"; }

inline TemplateBundle parse_bundle(const std::string& text) { return bundle_from_json(detail::parse_json(text)); }

inline TemplateBundle load_bundle(const std::string& path) { return parse_bundle(detail::read_file(path)); }

}  // namespace rforge
