#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "rforge/oracles.hpp"
#include "rforge/problem_io.hpp"
#include "rforge/solver.hpp"
#include "rforge/stability.hpp"
#include "rforge/template_io.hpp"
#include "rforge/template_reduce.hpp"

using namespace rforge;

namespace {

PolySystem fixture(const std::string& name) { return load_system(std::string(RFORGE_FIXTURES) + "/" + name); }

std::vector<std::vector<Complex>> points(const SolutionSet& s) {
  std::vector<std::vector<Complex>> out;
  for (const auto& r : s.valid_roots()) out.push_back(r.values);
  return out;
}

void expect_conditions(const CandidateBasis& c, const AugmentedSystem& aug, const SearchConfig& cfg) {
  const SymbolicMatrix M = build_matrix(c, aug);
  EXPECT_GT(c.min_multiplier_count(), 0u);
  EXPECT_GE(c.total_rows(), c.basis.size());
  EXPECT_EQ(generic_rank(M, cfg), c.basis.size());
  EXPECT_TRUE(has_block_structure(M, c.formulation));
  EXPECT_TRUE(a12_fullrank(M, cfg));
}

// Candidate for the cubic with B = {1..x^4}: 6 rows, 5 columns.
CandidateBasis tall_cubic(const AugmentedSystem& aug) {
  CandidateBasis c;
  c.basis = {{0}, {1}, {2}, {3}, {4}};
  c.multipliers = multiplier_sets(c.basis, {aug.support(0), aug.support(1)});
  partition(c, Formulation::Standard);
  return c;
}

}  // namespace

TEST(ReduceColumns, MinimalCandidateIsUnchanged) {
  const PolySystem sys = fixture("cubic.json");
  const SearchConfig cfg;
  const CandidateBasis c = search(sys, cfg);
  const Reduced r = reduce_columns(c, augment(sys, c.hidden_var), cfg);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.cand.basis, c.basis);
}

TEST(ReduceColumns, S1KeepsConditionsAndShrinks) {
  const PolySystem sys = fixture("s1.json");
  const SearchConfig cfg;
  const CandidateBasis c = search(sys, cfg);
  const AugmentedSystem aug = augment(sys, c.hidden_var);
  const Reduced r = reduce_columns(c, aug, cfg);
  expect_conditions(r.cand, aug, cfg);
  EXPECT_LE(r.cand.basis.size(), c.basis.size());
  EXPECT_LE(r.cand.total_rows(), c.total_rows());
  // monotone along the trace
  CandidateBasis cur = c;
  for (const auto& step : r.trace.steps) {
    const CandidateBasis next = detail::apply_step(cur, step);
    EXPECT_LE(next.basis.size(), cur.basis.size());
    EXPECT_LE(next.total_rows(), cur.total_rows());
    expect_conditions(next, aug, cfg);
    cur = next;
  }
}

TEST(ReduceColumns, EmptyMultiplierSetIsRejected) {
  const PolySystem sys = fixture("cubic.json");
  const AugmentedSystem aug = augment(sys, 0);
  CandidateBasis c = tall_cubic(aug);
  c.multipliers[0].clear();
  EXPECT_FALSE(detail::column_conditions_hold(c, build_matrix(c, aug), {}));
}

TEST(RemoveExcessRows, SquaresTallCubic) {
  const PolySystem sys = fixture("cubic.json");
  const AugmentedSystem aug = augment(sys, 0);
  const SearchConfig cfg;
  const CandidateBasis c = tall_cubic(aug);
  ASSERT_EQ(c.total_rows(), 6u);
  const Reduced r = remove_excess_rows(c, aug, cfg);
  EXPECT_EQ(r.cand.total_rows(), r.cand.basis.size());
  EXPECT_EQ(r.trace.steps.size(), 1u);
  expect_conditions(r.cand, aug, cfg);
  const SolverTemplate t = finalize(r.cand, r.matrix, aug, cfg);
  const auto s = solve(t, {1, -6, 11, -6});
  const auto m = match_roots(points(s), {{1.0}, {2.0}, {3.0}});
  EXPECT_EQ(m.unmatched_a + m.unmatched_b, 0u);
  EXPECT_LT(m.max_error, 1e-8);
}

TEST(RemoveExcessRows, SquareInputIsIdentity) {
  const PolySystem sys = fixture("cubic.json");
  const CandidateBasis c = search(sys, {});
  const Reduced r = remove_excess_rows(c, augment(sys, 0), {});
  EXPECT_TRUE(r.trace.empty());
}

TEST(RemoveExcessRows, CannotSquareIsReported) {
  const PolySystem sys = fixture("cannot_square.json");
  const CandidateBasis c = search(sys, {});
  try {
    remove_excess_rows(c, augment(sys, c.hidden_var), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CannotSquare);
  }
}

TEST(Reduction, PreservesSolutionSet) {
  for (const char* f : {"cubic.json", "s1.json"}) {
    const PolySystem sys = fixture(f);
    const SearchConfig cfg;
    const GeneratedTemplate g = generate(sys, cfg);
    const SolverTemplate before = freeze_unsquared(g.searched, augment(sys, g.searched.hidden_var));
    for (std::uint64_t k = 0; k < 30; ++k) {
      const auto coeffs = sample_coefficients(sys.slot_count(), 5, k);
      const auto a = points(solve(before, coeffs));
      const auto b = points(solve(g.bundle.primary, coeffs));
      const auto m = match_roots(a, b);
      EXPECT_EQ(m.unmatched_a + m.unmatched_b, 0u) << f << " instance " << k;
      EXPECT_LT(m.max_error, 1e-8) << f << " instance " << k;
    }
  }
}

TEST(Reduction, TraceReplayReproducesCandidate) {
  const PolySystem sys = fixture("s1.json");
  const GeneratedTemplate g = generate(sys, {});
  const CandidateBasis replayed = replay(g.searched, g.bundle.trace);
  EXPECT_EQ(replayed.basis, g.reduced.basis);
  EXPECT_EQ(replayed.multipliers, g.reduced.multipliers);
  EXPECT_EQ(replayed.b_lambda, g.reduced.b_lambda);
}

TEST(Finalize, UnivariateSizes) {
  const GeneratedTemplate g = generate(fixture("cubic.json"), {});
  EXPECT_EQ(g.bundle.primary.inversion_size(), 1u);
  EXPECT_EQ(g.bundle.primary.eigen_size(), 3u);
  EXPECT_EQ(size_summary(g.bundle.primary), "inv 1x1, eig 3x3");
}

TEST(Finalize, S1Sizes) {
  const GeneratedTemplate g = generate(fixture("s1.json"), {});
  EXPECT_EQ(g.bundle.primary.eigen_size(), 4u);
  EXPECT_TRUE(g.bundle.primary.is_square());
  EXPECT_EQ(lower_block_violation(g.bundle.primary), "");
}

TEST(Finalize, FloatingPointRankCrossCheck) {
  // SVD rank (tol 1e-8 sigma_max) of M at a random lambda matches |B|.
  for (const char* f : {"cubic.json", "s1.json"}) {
    const GeneratedTemplate g = generate(fixture(f), {});
    const auto& t = g.bundle.primary;
    const auto [m0, m1] = fill_dense(t, sample_coefficients(t.slot_count(), 8, 0));
    const Eigen::MatrixXd M = m0 + 0.731 * m1;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv(k) > 1e-8 * sv(0);
    EXPECT_EQ(static_cast<std::size_t>(rank), t.basis_size()) << f;
  }
}
