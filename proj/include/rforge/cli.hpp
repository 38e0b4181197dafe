#pragma once

// resultant-forge command line. The entry point is run_cli so tests can
// drive it in-process with their own streams.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/gep_baseline.hpp"
#include "rforge/modp.hpp"
#include "rforge/oracles.hpp"
#include "rforge/polytope.hpp"
#include "rforge/problem_io.hpp"
#include "rforge/solver.hpp"
#include "rforge/stability.hpp"
#include "rforge/template_io.hpp"

namespace rforge {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitNoBasis = 2, kExitCannotSquare = 3, kExitVersion = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoFavourableBasis:
      return kExitNoBasis;
    case ErrorKind::CannotSquare:
      return kExitCannotSquare;
    case ErrorKind::VersionMismatch:
      return kExitVersion;
    default:
      return kExitIo;
  }
}

/// RESULTANT_FORGE_SEED when set, else 0.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("RESULTANT_FORGE_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("RESULTANT_FORGE_SEED is not an unsigned integer: ") + env);
  }
}

inline std::string format_complex(Complex z, int digits = 15) {
  char buf[96];
  if (z.imag() == 0.0)
    std::snprintf(buf, sizeof buf, "%.*g", digits, z.real());
  else
    std::snprintf(buf, sizeof buf, "%.*g%+.*gi", digits, z.real(), digits, z.imag());
  return buf;
}

inline std::string format_double(double v, const char* fmt = "%.3e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Parse, "cannot write " + path);
  f << text;
  if (!f) fail(ErrorKind::Parse, "write failed for " + path);
}

inline std::string read_input(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  return detail::read_file(path);
}

// ---------------------------------------------------------------- solve

inline Json solution_to_json(const SolutionSet& s, const std::vector<std::string>& names, bool all) {
  Json j;
  j["formulation"] = to_string(s.formulation);
  j["condition"] = s.condition;
  j["eigenvalue_count"] = s.eigenvalue_count;
  j["dropped_infinite"] = s.dropped_infinite;
  j["variables"] = names;
  Json roots = Json::array();
  for (const auto& r : s.roots) {
    if (!all && !(r.is_real && r.complete)) continue;
    Json o;
    Json vals = Json::array();
    for (auto z : r.values) vals.push_back(Json::array({z.real(), z.imag()}));
    o["values"] = std::move(vals);
    o["residual"] = std::isfinite(r.residual) ? Json(r.residual) : Json(nullptr);
    o["real"] = r.is_real;
    o["complete"] = r.complete;
    roots.push_back(std::move(o));
  }
  j["roots"] = std::move(roots);
  return j;
}

inline std::string solution_to_csv(const SolutionSet& s, const std::vector<std::string>& names, bool all) {
  std::string out;
  for (const auto& n : names) out += n + "_re," + n + "_im,";
  out += "residual,real,complete\n";
  for (const auto& r : s.roots) {
    if (!all && !(r.is_real && r.complete)) continue;
    for (auto z : r.values) out += format_double(z.real(), "%.17g") + "," + format_double(z.imag(), "%.17g") + ",";
    out += format_double(r.residual, "%.6e") + "," + (r.is_real ? "1" : "0") + "," + (r.complete ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string solution_to_text(const SolutionSet& s, const std::vector<std::string>& names, bool all) {
  std::string out = "formulation " + std::string(to_string(s.formulation)) + ", condition " + format_double(s.condition) +
                    ", eigenvalues " + std::to_string(s.eigenvalue_count) + "\n";
  std::size_t k = 0;
  for (const auto& r : s.roots) {
    if (!all && !(r.is_real && r.complete)) continue;
    out += "root " + std::to_string(++k) + ":";
    for (std::size_t v = 0; v < r.values.size(); ++v)
      out += " " + names[v] + "=" + (r.is_real ? format_complex({r.values[v].real(), 0.0}) : format_complex(r.values[v]));
    out += "  residual " + format_double(r.residual);
    if (!r.complete) out += " (incomplete)";
    out += "\n";
  }
  if (k == 0) out += "no roots\n";
  return out;
}

// ---------------------------------------------------------------- verify

struct CheckLine {
  std::string name;
  enum Status { Pass, Fail, Skip } status = Pass;
  std::string detail;
};

/// Generic rank of a frozen template over Z/p: the whole pencil and the
/// upper-block columns of B_c.
inline std::pair<std::size_t, std::size_t> template_generic_ranks(const SolverTemplate& t, std::uint64_t seed) {
  const std::uint64_t p = modp::kDefaultPrime;
  std::mt19937_64 rng(derive_seed(seed, {hash_tag("verify-rank")}));
  std::vector<std::uint64_t> slots(t.slot_count());
  for (auto& s : slots) s = 1 + rng() % (p - 1);
  const std::uint64_t lam = 1 + rng() % (p - 1);
  const std::size_t L = t.eigen_size(), C = t.inversion_size(), U = t.rows.size() - L;
  modp::Matrix full(t.rows.size(), t.basis_size()), a12(U, C);
  for (const auto& pl : t.placements) {
    std::uint64_t v = pl.slot ? modp::mul(slots[static_cast<std::size_t>(*pl.slot)], modp::from_double(pl.value, p), p)
                              : modp::from_double(pl.value, p);
    if (pl.lambda_power == 1) v = modp::mul(v, lam, p);
    full.at(pl.row, pl.col) = (full.at(pl.row, pl.col) + v) % p;
    if (pl.row < U && pl.col >= L) a12.at(pl.row, pl.col - L) = (a12.at(pl.row, pl.col - L) + v) % p;
  }
  return {modp::rank(full, p), modp::rank(a12, p)};
}

inline std::vector<std::vector<Complex>> root_points(const std::vector<Root>& roots) {
  std::vector<std::vector<Complex>> out;
  for (const auto& r : roots) out.push_back(r.values);
  return out;
}

/// Oracle cross-checks for a problem/template pair on `instances` sampled
/// coefficient vectors.
inline std::vector<CheckLine> verify_bundle(const PolySystem& problem, const TemplateBundle& b, std::uint64_t seed,
                                            std::size_t instances) {
  std::vector<CheckLine> out;
  const bool same = serialize_system(problem) == serialize_system(b.primary.system);
  out.push_back({"template matches problem", same ? CheckLine::Pass : CheckLine::Fail, same ? "" : "embedded problem differs"});
  if (!same) return out;

  std::vector<const SolverTemplate*> tpls{&b.primary};
  if (b.fallback) tpls.push_back(&*b.fallback);
  for (const auto* t : tpls) {
    const std::string tag = std::string(" (") + to_string(t->formulation) + ")";
    const std::string v = lower_block_violation(*t);
    out.push_back({"lower block structure" + tag, v.empty() ? CheckLine::Pass : CheckLine::Fail, v});
    out.push_back({"square template" + tag, t->is_square() ? CheckLine::Pass : CheckLine::Fail,
                   std::to_string(t->rows.size()) + " rows, " + std::to_string(t->basis_size()) + " columns"});
    const auto [rk, rk12] = template_generic_ranks(*t, seed);
    out.push_back({"full generic rank" + tag, rk == t->basis_size() ? CheckLine::Pass : CheckLine::Fail,
                   "rank " + std::to_string(rk) + " of " + std::to_string(t->basis_size())});
    out.push_back({"A12 full column rank" + tag, rk12 == t->inversion_size() ? CheckLine::Pass : CheckLine::Fail,
                   "rank " + std::to_string(rk12) + " of " + std::to_string(t->inversion_size())});
  }

  const std::size_t n = problem.n_vars;
  std::optional<GepTemplate> gep;
  std::string gep_error;
  try {
    gep = generate_gep(problem, b.config);
  } catch (const Error& e) {
    gep_error = e.what();
  }

  double worst_res = 0.0, worst_oracle = 0.0, worst_fb = 0.0, worst_gep = 0.0;
  std::size_t count_bad = 0, oracle_bad = 0, fb_bad = 0, gep_bad = 0, errors = 0;
  std::string first_error;
  for (std::size_t k = 0; k < instances; ++k) {
    const auto coeffs = sample_coefficients(problem.slot_count(), seed, k);
    const auto polys = instantiate(problem, coeffs);
    try {
      const SolutionSet s = solve(b.primary, b.fallback_ptr(), coeffs);
      const auto valid = s.valid_roots();
      for (const auto& r : valid) worst_res = std::max(worst_res, r.residual);
      const auto pts = root_points(valid);
      if (n == 2 && polys.size() == 2) {
        const auto ref = sylvester_roots(polys[0], polys[1]);
        const auto bkk = static_cast<std::size_t>(bkk_2d(polys[0], polys[1]));
        const auto m = match_roots(pts, ref);
        worst_oracle = std::max(worst_oracle, m.max_error);
        if (m.unmatched_a || m.unmatched_b || m.max_error >= 1e-6) ++oracle_bad;
        if (valid.size() != bkk) ++count_bad;
      } else if (n == 1 && polys.size() == 1) {
        std::vector<std::vector<Complex>> ref;
        for (auto z : companion_roots(polys[0])) ref.push_back({z});
        const auto m = match_roots(pts, ref);
        worst_oracle = std::max(worst_oracle, m.max_error);
        if (m.unmatched_a || m.unmatched_b || m.max_error >= 1e-6) ++oracle_bad;
      }
      if (b.fallback) {
        const SolutionSet f = solve(*b.fallback, coeffs);
        const auto m = match_roots(pts, root_points(f.valid_roots()));
        worst_fb = std::max(worst_fb, m.max_error);
        if (m.unmatched_a || m.unmatched_b || m.max_error >= 1e-6) ++fb_bad;
      }
      if (gep) {
        const auto g = solve_gep(*gep, coeffs);
        const auto m = match_roots(pts, g.roots);
        worst_gep = std::max(worst_gep, m.max_error);
        if (m.unmatched_a || m.unmatched_b || m.max_error >= 1e-6) ++gep_bad;
      }
    } catch (const Error& e) {
      if (!errors++) first_error = e.what();
    }
  }
  const std::string of = " of " + std::to_string(instances) + " instances";
  out.push_back({"solves without error", errors ? CheckLine::Fail : CheckLine::Pass,
                 errors ? std::to_string(errors) + of + " failed: " + first_error : ""});
  out.push_back({"root residuals below 1e-8", worst_res < 1e-8 ? CheckLine::Pass : CheckLine::Fail,
                 "worst " + format_double(worst_res)});
  if (n <= 2 && problem.polys.size() == n) {
    out.push_back({n == 2 ? "Sylvester oracle agreement" : "companion oracle agreement",
                   oracle_bad ? CheckLine::Fail : CheckLine::Pass,
                   "worst " + format_double(worst_oracle) + ", mismatched " + std::to_string(oracle_bad) + of});
    if (n == 2)
      out.push_back({"root count equals BKK bound", count_bad ? CheckLine::Fail : CheckLine::Pass,
                     std::to_string(count_bad) + " mismatches" + of});
  } else {
    out.push_back({"oracle agreement", CheckLine::Skip, "oracles cover square univariate and bivariate systems only"});
  }
  if (b.fallback)
    out.push_back({"fallback formulation agreement", fb_bad ? CheckLine::Fail : CheckLine::Pass,
                   "worst " + format_double(worst_fb)});
  else
    out.push_back({"fallback formulation agreement", CheckLine::Skip, "template has no fallback"});
  if (gep)
    out.push_back({"hidden-variable baseline agreement", gep_bad ? CheckLine::Fail : CheckLine::Pass,
                   "worst " + format_double(worst_gep)});
  else
    out.push_back({"hidden-variable baseline agreement", CheckLine::Skip, gep_error});
  return out;
}

// ---------------------------------------------------------------- inspect

inline std::string point_string(const Monomial& p) {
  std::string s = "(";
  for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + std::to_string(p[k]);
  return s + ")";
}

inline std::string polytope_summary(const Polytope& P, const Displacement& d, double cap) {
  std::string s = "vertices";
  const Polytope hull = prune_to_vertices(P);
  for (const auto& v : hull.points()) s += " " + point_string(v);
  s += "; lattice points " + std::to_string(lattice_points(P, d, cap).size());
  return s;
}

inline std::string inspect_template_text(const TemplateBundle& b) {
  const auto& t = b.primary;
  const auto names = t.system.names();
  std::ostringstream o;
  o << "format " << kTemplateFormat << " v" << kTemplateVersion << "\n";
  o << "generator: seed " << b.config.seed << ", epsilon " << b.config.epsilon << ", formulation preference "
    << to_string(b.config.formulation) << "\n";
  o << "hidden variable " << names[t.hidden_var] << ", formulation " << to_string(t.formulation) << "\n";
  o << "template: " << size_summary(t) << "\n";
  o << "size " << t.inversion_size() << " x " << t.basis_size() << " (inversion x basis)\n";
  o << "rows " << t.rows.size() << " (upper " << t.rows.size() - t.eigen_size() << ", lower " << t.eigen_size() << ")\n";
  o << "search: basis " << b.search.basis_size << ", rows " << b.search.row_count << ", polytopes {";
  for (std::size_t k = 0; k < b.search.subset.size(); ++k) o << (k ? "," : "") << b.search.subset[k];
  o << "}, delta (";
  for (std::size_t k = 0; k < b.search.delta.size(); ++k) o << (k ? "," : "") << b.search.delta[k];
  o << ")\n";
  o << "reduction: " << b.trace.steps.size() << " steps, " << b.trace.removed_cols().size() << " columns and "
    << b.trace.removed_rows().size() << " rows removed\n";
  for (const auto& r : t.recovery) {
    o << "recovery " << names[r.var] << ": ";
    if (r.from_eigenvalue)
      o << "eigenvalue\n";
    else
      o << r.pairs.size() << " ratio pairs" << (t.back_substitution ? " (back substitution)" : "") << "\n";
  }
  if (b.fallback)
    o << "fallback: " << to_string(b.fallback->formulation) << ", " << size_summary(*b.fallback) << "\n";
  else
    o << "fallback: none\n";
  return o.str();
}

// ---------------------------------------------------------------- entry

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"resultant-forge: sparse resultant solver generator"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress on stderr");
  auto log = [&](const std::string& s) {
    if (!quiet) err << s << "\n";
  };

  std::uint64_t seed = 0;
  std::string problem_path, template_path, out_path, coeffs_path, report_path, format = "text";
  double epsilon = 0.45, kappa_max = 1e12;
  std::size_t max_subset = 0, n_instances = 5000, verify_instances = 10;
  unsigned jobs = 1;
  std::string formulation = "auto";
  bool all_complex = false;
  std::size_t hidden = 0;
  std::vector<std::size_t> subset;

  auto* gen = app.add_subcommand("generate", "search, reduce and freeze a solver template");
  gen->add_option("--problem", problem_path, "problem JSON file")->required();
  gen->add_option("--out", out_path, "template output file")->required();
  auto* gen_seed = gen->add_option("--seed", seed, "generator seed (default: RESULTANT_FORGE_SEED or 0)");
  gen->add_option("--epsilon", epsilon, "displacement magnitude, in (0, 0.5)");
  gen->add_option("--max-subset", max_subset, "largest polytope subset searched (0 = all)");
  gen->add_option("--formulation", formulation, "auto, standard or alternate")
      ->check(CLI::IsMember({"auto", "standard", "alternate"}));
  gen->add_option("--jobs", jobs, "search worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--kappa-max", kappa_max, "condition bound for A12-hat");

  auto* sol = app.add_subcommand("solve", "solve one coefficient instance");
  sol->add_option("--template", template_path, "template file")->required();
  sol->add_option("--coeffs", coeffs_path, "coefficient JSON array, or - for stdin")->required();
  sol->add_flag("--all-complex", all_complex, "print complex and incomplete roots too");
  sol->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

  auto* bench = app.add_subcommand("bench", "numerical stability over random instances");
  bench->add_option("--template", template_path, "template file")->required();
  bench->add_option("--n", n_instances, "number of instances")->check(CLI::PositiveNumber);
  auto* bench_seed = bench->add_option("--seed", seed, "sampler seed (default: RESULTANT_FORGE_SEED or 0)");
  bench->add_option("--report", report_path, "report output file (default: stdout)");
  bench->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  bench->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* ver = app.add_subcommand("verify", "oracle cross-checks, one PASS/FAIL line per invariant");
  ver->add_option("--problem", problem_path, "problem JSON file")->required();
  ver->add_option("--template", template_path, "template file")->required();
  auto* ver_seed = ver->add_option("--seed", seed, "sampler seed (default: RESULTANT_FORGE_SEED or 0)");
  ver->add_option("--instances", verify_instances, "random instances checked")->check(CLI::PositiveNumber);

  auto* insp = app.add_subcommand("inspect", "debug views");
  insp->require_subcommand(1);
  auto* insp_poly = insp->add_subcommand("polytope", "Newton polytopes, vertex sets and lattice counts");
  insp_poly->add_option("--problem", problem_path, "problem JSON file")->required();
  insp_poly->add_option("--hidden", hidden, "0-based hidden variable of the extra equation");
  insp_poly->add_option("--subset", subset, "polytope indices summed (0 = unit simplex)")->delimiter(',');
  insp_poly->add_option("--epsilon", epsilon, "displacement magnitude");
  auto* insp_tpl = insp->add_subcommand("template", "template sizes and provenance");
  insp_tpl->add_option("file", template_path, "template file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    auto resolve_seed = [&](CLI::Option* opt) {
      if (!opt || opt->count() == 0) seed = default_seed();
    };

    if (*gen) {
      resolve_seed(gen_seed);
      const PolySystem sys = load_system(problem_path);
      SearchConfig cfg;
      cfg.seed = seed;
      cfg.epsilon = epsilon;
      if (max_subset > 0) cfg.max_subset_size = max_subset;
      cfg.formulation = preference_from_string(formulation);
      cfg.jobs = jobs;
      log("generate: " + std::to_string(sys.n_vars) + " variables, " + std::to_string(sys.polys.size()) +
          " equations, seed " + std::to_string(seed));
      const GeneratedTemplate g = generate(sys, cfg, kappa_max);
      log("search: basis " + std::to_string(g.searched.basis.size()) + ", rows " +
          std::to_string(g.searched.total_rows()) + "; reduction " + std::to_string(g.bundle.trace.steps.size()) + " steps");
      write_file(out_path, serialize_bundle(g.bundle));
      out << "template: " << size_summary(g.bundle.primary) << "\n";
      return kExitOk;
    }

    if (*sol) {
      const TemplateBundle b = load_bundle(template_path);
      const auto coeffs = parse_coefficients(read_input(coeffs_path));
      const SolutionSet s = solve(b.primary, b.fallback_ptr(), coeffs);
      const auto names = b.primary.system.names();
      if (format == "json")
        out << solution_to_json(s, names, all_complex).dump(2) << "\n";
      else if (format == "csv")
        out << solution_to_csv(s, names, all_complex);
      else
        out << solution_to_text(s, names, all_complex);
      return kExitOk;
    }

    if (*bench) {
      resolve_seed(bench_seed);
      const TemplateBundle b = load_bundle(template_path);
      StabilityOptions opt;
      opt.instances = n_instances;
      opt.seed = seed;
      opt.jobs = jobs;
      const std::size_t tick = std::max<std::size_t>(1, n_instances / 10);
      opt.progress = [&](std::size_t done, std::size_t total) {
        if (done % tick == 0 || done == total) log("bench: " + std::to_string(done) + "/" + std::to_string(total));
      };
      const StabilityReport rep = run_stability(b, opt);
      std::string text;
      if (format == "json")
        text = report_to_json(rep).dump(2) + "\n";
      else if (format == "csv")
        text = report_to_csv(rep);
      else
        text = "seed " + std::to_string(seed) + "\n" + report_to_text(rep);
      if (report_path.empty())
        out << text;
      else
        write_file(report_path, text);
      return kExitOk;
    }

    if (*ver) {
      resolve_seed(ver_seed);
      const PolySystem sys = load_system(problem_path);
      const TemplateBundle b = load_bundle(template_path);
      const auto checks = verify_bundle(sys, b, seed, verify_instances);
      bool ok = true;
      for (const auto& c : checks) {
        const char* tag = c.status == CheckLine::Pass ? "PASS" : c.status == CheckLine::Fail ? "FAIL" : "SKIP";
        out << tag << " " << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
        ok = ok && c.status != CheckLine::Fail;
      }
      if (checks.front().status == CheckLine::Fail) return kExitVersion;
      return ok ? kExitOk : kExitIo;
    }

    if (*insp_poly) {
      const PolySystem sys = load_system(problem_path);
      sys.validate();
      require(hidden < sys.n_vars, "--hidden out of range");
      const AugmentedSystem aug = augment(sys, hidden);
      const std::size_t n = sys.n_vars;
      std::vector<Polytope> polys{unit_simplex(n)};
      for (std::size_t j = 0; j <= aug.m(); ++j) polys.emplace_back(n, aug.support(j));
      const Displacement d0 = Displacement::zero(n, epsilon);
      const auto names = sys.names();
      out << "hidden " << names[hidden] << "; polytope 0 is the unit simplex, " << aug.m() + 1
          << " is the extra equation\n";
      for (std::size_t k = 0; k < polys.size(); ++k)
        out << "NP" << k << ": " << polytope_summary(polys[k], d0, kDefaultLatticeCap) << "\n";
      if (subset.empty())
        for (std::size_t k = 0; k < polys.size(); ++k) subset.push_back(k);
      for (auto k : subset) require(k < polys.size(), "--subset index out of range");
      Polytope Q = polys[subset[0]];
      for (std::size_t k = 1; k < subset.size(); ++k) Q = minkowski_sum(Q, polys[subset[k]]);
      out << "sum {";
      for (std::size_t k = 0; k < subset.size(); ++k) out << (k ? "," : "") << subset[k];
      out << "}: " << polytope_summary(Q, d0, kDefaultLatticeCap) << "\n";
      return kExitOk;
    }

    if (*insp_tpl) {
      out << inspect_template_text(load_bundle(template_path));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}

}  // namespace rforge
