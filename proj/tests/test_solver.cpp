#include <gtest/gtest.h>

#include <random>

#include "rforge/oracles.hpp"
#include "rforge/problem_io.hpp"
#include "rforge/solver.hpp"
#include "rforge/stability.hpp"
#include "rforge/template_io.hpp"

using namespace rforge;

namespace {

PolySystem fixture(const std::string& name) { return load_system(std::string(RFORGE_FIXTURES) + "/" + name); }

std::vector<std::vector<Complex>> points(const SolutionSet& s) {
  std::vector<std::vector<Complex>> out;
  for (const auto& r : s.valid_roots()) out.push_back(r.values);
  return out;
}

const TemplateBundle& cubic_bundle() {
  static const TemplateBundle b = generate(fixture("cubic.json"), {}).bundle;
  return b;
}

const TemplateBundle& s1_bundle() {
  static const TemplateBundle b = generate(fixture("s1.json"), {}).bundle;
  return b;
}

std::vector<Complex> sorted_by_real(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  return v;
}

}  // namespace

TEST(SchurReduce, CubicEigenvaluesMatchCompanion) {
  const auto& t = cubic_bundle().primary;
  const std::vector<double> c{1, -6, 11, -6};
  const SchurResult s = schur_reduce(fill(t, c));
  ASSERT_EQ(s.X.rows(), 3);
  Eigen::EigenSolver<Eigen::MatrixXd> es(s.X);
  std::vector<Complex> ev;
  for (Eigen::Index k = 0; k < 3; ++k) ev.push_back(es.eigenvalues()(k));
  const auto want = companion_roots(std::vector<Complex>{-6, 11, -6, 1});
  ev = sorted_by_real(ev);
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(ev[k] - want[k]), 1e-10);
}

TEST(SchurReduce, IllConditionedIsReported) {
  FilledBlocks b;
  b.a11 = Eigen::MatrixXd::Ones(2, 1);
  b.a12 = Eigen::MatrixXd::Zero(2, 2);
  b.a12(0, 0) = 1.0;
  b.lower_lambda = Eigen::MatrixXd::Identity(1, 1);
  b.lower_c = Eigen::MatrixXd::Zero(1, 2);
  try {
    schur_reduce(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IllConditioned);
  }
}

TEST(Eigensolve, DiagonalMatrix) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(3, 3);
  X.diagonal() << 1.0, 2.0, 3.0;
  const EigenResult r = eigensolve(X);
  ASSERT_EQ(r.pairs.size(), 3u);
  std::vector<Complex> ev;
  for (const auto& p : r.pairs) {
    ev.push_back(p.lambda);
    EXPECT_LT((X.cast<Complex>() * p.vector - p.lambda * p.vector).norm(), 1e-12);
  }
  ev = sorted_by_real(ev);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(ev[k].real(), k + 1.0, 1e-14);
}

TEST(Eigensolve, AlternateMapsMuAndDropsInfinite) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2, 2);
  X(0, 0) = -0.5;
  const EigenResult r = eigensolve(X, Formulation::Alternate);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.dropped_infinite, 1u);
  EXPECT_NEAR(std::abs(r.pairs[0].lambda - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.pairs[0].raw + 0.5), 0.0, 1e-15);
}

TEST(Solve, CubicRoots) {
  const SolutionSet s = solve(cubic_bundle().primary, {1, -6, 11, -6});
  ASSERT_EQ(s.roots.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT(std::abs(s.roots[k].values[0] - Complex(k + 1.0)), 1e-8);
    EXPECT_LT(s.roots[k].residual, 1e-10);
    EXPECT_TRUE(s.roots[k].is_real);
  }
}

TEST(Solve, ComplexRootsAreFlagged) {
  // x^3 + x = x (x^2 + 1)
  const SolutionSet s = solve(cubic_bundle().primary, {1, 0, 1, 0});
  ASSERT_EQ(s.roots.size(), 3u);
  std::size_t real = 0;
  for (const auto& r : s.roots) {
    real += r.is_real;
    EXPECT_LT(r.residual, 1e-10);
  }
  EXPECT_EQ(real, 1u);
  std::size_t imaginary_unit = 0;
  for (const auto& r : s.roots) imaginary_unit += std::abs(r.values[0] * r.values[0] + 1.0) < 1e-8;
  EXPECT_EQ(imaginary_unit, 2u);
}

TEST(Solve, S1Roots) {
  const SolutionSet s = solve(s1_bundle().primary, {1, 1, -5, 1, -2});
  const auto got = points(s);
  EXPECT_EQ(got.size(), 4u);
  for (const auto& r : s.valid_roots()) EXPECT_LT(r.residual, 1e-10);
  const auto m = match_roots(got, {{1.0, 2.0}, {2.0, 1.0}, {-1.0, -2.0}, {-2.0, -1.0}});
  EXPECT_EQ(m.unmatched_a + m.unmatched_b, 0u);
  EXPECT_LT(m.max_error, 1e-8);
}

TEST(Solve, S1RootsMoveContinuously) {
  const auto& t = s1_bundle().primary;
  const std::vector<double> base{1, 1, -5, 1, -2};
  const auto a = points(solve(t, base));
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c = base;
    for (auto& v : c) v += 1e-7 * g(rng);
    const auto m = match_roots(a, points(solve(t, c)));
    EXPECT_EQ(m.pairs.size(), 4u);
    EXPECT_LT(m.max_error, 1e-4);
  }
}

TEST(Solve, AgreesWithSylvesterOnRandomS1) {
  const auto& t = s1_bundle().primary;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto c = sample_coefficients(t.slot_count(), 12, k);
    const auto polys = instantiate(t.system, c);
    const auto want = sylvester_roots(polys[0], polys[1]);
    const auto m = match_roots(points(solve(t, c)), want);
    EXPECT_EQ(m.unmatched_a + m.unmatched_b, 0u) << "instance " << k;
    EXPECT_LT(m.max_error, 1e-6) << "instance " << k;
  }
}

TEST(Solve, BackSubstitutionSatisfiesUpperBlock) {
  // A11 b1 + A12 b2 = 0 at every eigenpair.
  const auto& t = s1_bundle().primary;
  const std::vector<double> c{1, 1, -5, 1, -2};
  const FilledBlocks blocks = fill(t, c);
  const SchurResult s = schur_reduce(blocks);
  const EigenResult e = eigensolve(s.X, t.formulation);
  ASSERT_FALSE(e.pairs.empty());
  for (const auto& p : e.pairs) {
    const Eigen::VectorXcd b = back_substitute(s, p.vector);
    const Eigen::Index L = blocks.a11.cols();
    const Eigen::VectorXcd r = blocks.a11.cast<Complex>() * b.head(L) + blocks.a12.cast<Complex>() * b.tail(b.size() - L);
    EXPECT_LT(r.norm() / (1.0 + b.norm()), 1e-8);
  }
}

TEST(Solve, RootsAreOrderedByEigenvalue) {
  const SolutionSet s = solve(s1_bundle().primary, {1, 1, -5, 1, -2});
  for (std::size_t k = 1; k < s.roots.size(); ++k) {
    const Complex a = s.roots[k - 1].eigenvalue, b = s.roots[k].eigenvalue;
    EXPECT_TRUE(a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag()));
  }
}

TEST(Solve, WrongCoefficientCountIsAnError) {
  EXPECT_THROW(solve(s1_bundle().primary, {1, 2, 3}), Error);
  EXPECT_THROW(solve(s1_bundle().primary, {1, 1, std::nan(""), 1, -2}), Error);
}

TEST(Solve, FallbackTakesOverWhenPrimaryIsIllConditioned) {
  const auto& b = s1_bundle();
  ASSERT_NE(b.fallback_ptr(), nullptr);
  // Force the primary to refuse every instance.
  SolverTemplate strict = b.primary;
  strict.kappa_max = 0.5;
  const std::vector<double> c{1, 1, -5, 1, -2};
  EXPECT_THROW(solve(strict, c), Error);
  const SolutionSet s = solve(strict, b.fallback_ptr(), c);
  EXPECT_EQ(s.formulation, b.fallback_ptr()->formulation);
  EXPECT_EQ(points(s).size(), 4u);
  EXPECT_THROW(solve(strict, nullptr, c), Error);
}

TEST(Solve, FormulationsAgree) {
  const auto& b = s1_bundle();
  ASSERT_NE(b.fallback_ptr(), nullptr);
  EXPECT_NE(b.primary.formulation, b.fallback_ptr()->formulation);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto c = sample_coefficients(b.primary.slot_count(), 3, k);
    const auto m = match_roots(points(solve(b.primary, c)), points(solve(*b.fallback_ptr(), c)));
    EXPECT_EQ(m.unmatched_a + m.unmatched_b, 0u) << "instance " << k;
    EXPECT_LT(m.max_error, 1e-8) << "instance " << k;
  }
}
