#include <gtest/gtest.h>

#include <random>

#include "rforge/poly.hpp"
#include "rforge/problem_io.hpp"

using namespace rforge;

namespace {

ParamPolynomial param(std::vector<std::pair<Monomial, int>> terms) {
  std::vector<ParamTerm> t;
  for (auto& [m, s] : terms) t.push_back({m, Coefficient::of_slot(s)});
  return ParamPolynomial(std::move(t));
}

PolySystem s1() {
  PolySystem s;
  s.n_vars = 2;
  s.var_names = {"x", "y"};
  s.polys.push_back(param({{{2, 0}, 0}, {{0, 2}, 1}, {{0, 0}, 2}}));
  s.polys.push_back(param({{{1, 1}, 3}, {{0, 0}, 4}}));
  return s;
}

}  // namespace

TEST(Supp, ReadsOffExponents) {
  const NumPolynomial p(2, {{{2, 0}, 1.0}, {{1, 1}, 2.0}, {{0, 0}, 3.0}});
  auto s = supp(p);
  std::sort(s.begin(), s.end());
  EXPECT_EQ(s, (std::vector<Monomial>{{0, 0}, {1, 1}, {2, 0}}));
  EXPECT_EQ(supp(NumPolynomial(2, {{{0, 0}, 5.0}})), (std::vector<Monomial>{{0, 0}}));
}

TEST(Supp, EmptyPolynomialIsAnError) {
  EXPECT_THROW(supp(NumPolynomial(2, {})), Error);
  EXPECT_THROW(supp(ParamPolynomial()), Error);
}

TEST(Evaluate, KnownValues) {
  const NumPolynomial f1(2, {{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{0, 0}, -5.0}});
  const NumPolynomial f2(2, {{{1, 1}, 1.0}, {{0, 0}, -2.0}});
  EXPECT_EQ(evaluate(f1, {1.0, 2.0}), Complex(0.0));
  EXPECT_EQ(evaluate(f2, {2.0, 1.0}), Complex(0.0));
  const NumPolynomial cubic(1, {{{3}, 1.0}, {{2}, -6.0}, {{1}, 11.0}, {{0}, -6.0}});
  EXPECT_EQ(evaluate(cubic, {4.0}), Complex(6.0));  // 64 - 96 + 44 - 6
  EXPECT_THROW(evaluate(cubic, {1.0, 2.0}), Error);
}

TEST(Instantiate, FillsSlots) {
  PolySystem lin;
  lin.n_vars = 1;
  lin.polys.push_back(param({{{1}, 0}, {{0}, 1}}));
  const auto p = instantiate(lin, {1.0, -3.0});
  EXPECT_EQ(evaluate(p[0], {3.0}), Complex(0.0));
  EXPECT_THROW(instantiate(lin, {1.0}), Error);
  EXPECT_THROW(instantiate(lin, {1.0, std::nan("")}), Error);

  const auto z = instantiate(lin, {0.0, 0.0});
  EXPECT_TRUE(z[0].is_zero());
}

TEST(Instantiate, CanonicalS1) {
  const auto p = instantiate(s1(), {1, 1, -5, 1, -2});
  for (auto root : std::vector<std::vector<Complex>>{{1, 2}, {2, 1}, {-1, -2}, {-2, -1}}) {
    EXPECT_EQ(evaluate(p[0], root), Complex(0.0));
    EXPECT_EQ(evaluate(p[1], root), Complex(0.0));
  }
}

TEST(Instantiate, SupportShrinksOnlyOnZeros) {
  const PolySystem s = s1();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(s.slot_count());
    for (auto& v : c) v = pick(rng);
    const auto p = instantiate(s, c);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto full = supp(s.polys[i]);
      bool nonzero = false;
      for (const auto& t : p[i].terms()) nonzero = nonzero || t.coef != 0.0;
      if (!nonzero) continue;
      for (const auto& m : supp(p[i])) EXPECT_NE(std::find(full.begin(), full.end(), m), full.end());
    }
  }
  const auto generic = instantiate(s, {0.3, -1.7, 2.2, 0.9, -0.4});
  EXPECT_EQ(supp(generic[0]).size(), supp(s.polys[0]).size());
}

TEST(Evaluate, LinearInCoefficients) {
  const PolySystem s = s1();
  const std::vector<Complex> pt{Complex(0.3, -1.1), Complex(1.7, 0.2)};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5), b(5), ab(5);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    const double alpha = g(rng);
    for (int k = 0; k < 5; ++k) ab[k] = a[k] + alpha * b[k];
    for (std::size_t i = 0; i < 2; ++i) {
      const Complex lhs = evaluate(instantiate(s, ab)[i], pt);
      const Complex rhs = evaluate(instantiate(s, a)[i], pt) + alpha * evaluate(instantiate(s, b)[i], pt);
      EXPECT_LT(std::abs(lhs - rhs), 1e-12);
    }
  }
}

TEST(MonomialOrder, StrictTotalOrderOnRandomTriples) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> e(0, 3);
  auto draw = [&] { return Monomial{e(rng), e(rng), e(rng)}; };
  const std::vector<Monomial> block{{1, 0, 0}, {0, 1, 1}, {2, 2, 0}};
  for (const MonomialOrder& ord :
       {MonomialOrder(OrderKind::Grevlex), MonomialOrder(OrderKind::Lex), MonomialOrder(OrderKind::Block, block)}) {
    for (int trial = 0; trial < 2000; ++trial) {
      const Monomial a = draw(), b = draw(), c = draw();
      EXPECT_FALSE(ord.less(a, a));
      if (a != b) {
        EXPECT_NE(ord.less(a, b), ord.less(b, a));
      }
      if (ord.less(a, b) && ord.less(b, c)) {
        EXPECT_TRUE(ord.less(a, c));
      }
    }
  }
}

TEST(MonomialOrder, GrevlexAscending) {
  std::vector<Monomial> ms{{0, 2}, {1, 1}, {2, 0}, {0, 0}, {1, 0}, {0, 1}};
  sort_grevlex(ms);
  // x > y, so ascending reads 1, y, x, y^2, xy, x^2
  EXPECT_EQ(ms, (std::vector<Monomial>{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}}));
}

TEST(PolySystem, ValidateRejectsBadInput) {
  PolySystem s = s1();
  EXPECT_NO_THROW(s.validate());
  s.polys.push_back(param({{{-1, 0}, 5}}));
  EXPECT_THROW(s.validate(), Error);
  PolySystem gap = s1();
  gap.polys[1] = param({{{1, 1}, 3}, {{0, 0}, 7}});
  EXPECT_THROW(gap.validate(), Error);
  EXPECT_THROW(ParamPolynomial({{{1, 0}, Coefficient::of_slot(0)}, {{1, 0}, Coefficient::of_slot(1)}}), Error);
}

TEST(ProblemIo, RoundTripIsByteStable) {
  const std::string text = serialize_system(s1());
  const PolySystem back = parse_system(text);
  EXPECT_EQ(serialize_system(back), text);
  EXPECT_EQ(back.var_names, s1().var_names);
}

TEST(ProblemIo, ConstantsAndErrors) {
  const std::string text = R"({"n_vars":1,"polys":[[{"exp":[2],"const":1.5},{"exp":[0],"slot":0}]]})";
  const PolySystem s = parse_system(text);
  EXPECT_EQ(s.slot_count(), 1u);
  EXPECT_EQ(serialize_system(parse_system(serialize_system(s))), serialize_system(s));
  try {
    parse_system("{\"n_vars\": 1, ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
  EXPECT_THROW(parse_system(R"({"n_vars":1,"polys":[[{"exp":[1,1],"slot":0}]]})"), Error);
  EXPECT_THROW(parse_coefficients("[1, \"a\"]"), Error);
  EXPECT_EQ(parse_coefficients("[1, -6, 11, -6]"), (std::vector<double>{1, -6, 11, -6}));
}
