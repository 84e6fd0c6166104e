#include "flowhopf/enumerate.hpp"
#include "flowhopf/flowchart.hpp"
#include "flowhopf/parse.hpp"
#include "flowhopf/recfun.hpp"
#include "flowhopf/renorm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace flowhopf;

namespace {

RecFun F(std::string_view s) { return parse_recfun(s); }
PlanarTree T(std::string_view s) { return parse_tree(s); }

std::string eval(std::string_view f, std::vector<Nat> args, std::uint64_t fuel = 10000) {
  return evaluate(F(f), args, fuel).str();
}

const double pi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

TEST(RecFun, ParseAndSignature) {
  EXPECT_EQ(F("S").signature(), (Signature{1, 1}));
  EXPECT_EQ(F("comp(S;S)").signature(), (Signature{1, 1}));
  EXPECT_EQ(F("rec(S; comp(P[3,3]; S))").signature(), (Signature{2, 1}));
  EXPECT_EQ(F("br(S,C[1])").signature(), (Signature{1, 2}));
  EXPECT_EQ(F("mu(comp(C[2];S))").signature(), (Signature{1, 1}));
  EXPECT_EQ(F("empty[2,3]").signature(), (Signature{2, 3}));
  EXPECT_EQ(F("krec(S; comp(P[3,3]; S))").signature(), (Signature{2, 1}));
  EXPECT_EQ(F(F("rec(S; comp(P[3,3]; S))").str()).str(), F("rec(S;comp(P[3,3];S))").str());
  EXPECT_THROW(RecFun::primrec(F("S"), F("S")), SignatureError);
  EXPECT_THROW(RecFun::compose(F("br(S,S)"), F("S")), SignatureError);
  EXPECT_THROW(RecFun::projection(3, 2), SignatureError);
  EXPECT_THROW(F("rec(S;S)"), ParseError);
  EXPECT_THROW(F("P[3,2]"), ParseError);
  EXPECT_THROW(F("rec(S"), ParseError);
}

TEST(RecFun, Evaluate) {
  EXPECT_EQ(eval("S", {4}), "Halted(5)");
  EXPECT_EQ(eval("rec(S; comp(P[3,3]; S))", {2, 3}), "Halted(5)");
  EXPECT_EQ(eval("br(S,C[1])", {4}), "Halted(5,1)");
  EXPECT_FALSE(evaluate(F("mu(comp(C[2];S))"), std::vector<Nat>{7}, 1000).halted());
  // least y >= 1 with P[2,2](x, y) = 1
  EXPECT_EQ(eval("mu(P[2,2])", {9}), "Halted(1)");
}

TEST(RecFun, Fbar) {
  EXPECT_EQ(fbar(F("S"), std::vector<Nat>{4}, 100), 5u);
  EXPECT_EQ(fbar(F("mu(comp(C[2];S))"), std::vector<Nat>{7}, 1000), 0u);
  EXPECT_EQ(fbar(F("empty[1,1]"), std::vector<Nat>{1}, 100), 0u);
}

TEST(RecFun, AdditionGrid) {
  const RecFun add = F("rec(S; comp(P[3,3]; S))");
  const RecFun kadd = F("krec(S; comp(P[3,3]; S))");
  for (Nat x = 1; x <= 5; ++x)
    for (Nat y = 1; y <= 5; ++y) {
      const std::vector<Nat> a{x, y};
      const auto r = evaluate(add, a, 10000);
      ASSERT_TRUE(r.halted());
      EXPECT_EQ(r.values()[0], x + y);
      EXPECT_EQ(evaluate(kadd, a, 10000).str(), r.str());
    }
}

TEST(RecFunProperty, FuelMonotone) {
  for (const char* f : {"rec(S; comp(P[3,3]; S))", "rec(C[1]; comp(br(P[1,3],P[3,3]); rec(S; comp(P[3,3]; S))))"})
    for (Nat x = 1; x <= 4; ++x)
      for (Nat y = 1; y <= 4; ++y) {
        const std::vector<Nat> a{x, y};
        for (std::uint64_t fuel : {10u, 40u, 200u}) {
          const auto r = evaluate(F(f), a, fuel);
          if (r.halted()) ASSERT_EQ(evaluate(F(f), a, fuel * 50).str(), r.str());
        }
      }
}

TEST(Flowchart, AdmissibilityExamples) {
  auto r = admissible_check(T("c(in(S),in(S))"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r.function().str(), F("comp(S;S)").str());
  r = admissible_check(T("r(in(S),in(S))"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.rejection().vertex.rfind("root", 0), 0u);
  r = admissible_check(T("b(in(S),in(C[1]))"));
  ASSERT_TRUE(r);
  EXPECT_EQ(r.function().str(), F("br(S,C[1])").str());
  EXPECT_EQ(admissible_check(T("m(in(P[2,2]))")).function().signature(), (Signature{1, 1}));
  EXPECT_FALSE(admissible_check(T("m(in(br(S,S)))")));
}

TEST(Flowchart, VertexMode) {
  const std::vector<RecFun> ss{F("S"), F("S")};
  EXPECT_EQ(flowchart_output_vertexmode(T("c"), ss)->str(), F("comp(S;S)").str());
  EXPECT_FALSE(flowchart_output_vertexmode(T("r"), ss));
  EXPECT_EQ(flowchart_output_vertexmode(T("b"), ss)->str(), F("br(S,S)").str());
}

// admissible_check agrees with the vertex-mode output on single vertices
TEST(FlowchartProperty, SingleVertexAgreement) {
  std::vector<RecFun> fs{F("S"), F("comp(P[3,3];S)")};
  for (int n = 1; n <= 3; ++n) {
    fs.push_back(RecFun::constant(n));
    for (int i = 1; i <= n; ++i) fs.push_back(RecFun::projection(i, n));
  }
  for (Label l : all_labels) {
    const std::size_t k = minimum_valence(l);
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      std::vector<RecFun> sigma;
      std::vector<PlanarTree> kids;
      for (auto i : idx) {
        sigma.push_back(fs[i]);
        kids.push_back(PlanarTree::flag(fs[i]));
      }
      const bool ok = admissible_check(PlanarTree::vertex(l, kids)).ok();
      ASSERT_EQ(ok, flowchart_output_vertexmode(PlanarTree::vertex(l), sigma).has_value());
      std::size_t j = k;
      while (j > 0 && ++idx[j - 1] == fs.size()) idx[--j] = 0;
      if (j == 0) break;
    }
  }
}

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(T("b(in(S),in(C[1]),in(P[1,1]))")), T("b(in(S),b(in(C[1]),in(P[1,1])))"));
  EXPECT_EQ(binarize(T("c(b(in(S),in(S)),in(P[1,2]))")), T("c(b(in(S),in(S)),in(P[1,2]))"));
  const PlanarTree t = T("c(in(S),in(S),in(S),in(S))");
  EXPECT_EQ(admissible_check(binarize(t)).function().signature(), admissible_check(t).function().signature());
}

TEST(BinarizeProperty, RandomTreesKeepValues) {
  std::mt19937_64 rng(2024);
  const std::vector<RecFun> palette{F("S"), F("P[1,1]"), F("C[1]"), F("P[2,2]")};
  int found = 0;
  for (int tries = 0; found < 100 && tries < 20000; ++tries) {
    const PlanarTree t = random_tree(rng, std::uniform_int_distribution<int>(1, 4)(rng), {Label::b, Label::c, Label::m},
                                     palette, 4);
    const auto a = admissible_check(t);
    const auto b = admissible_check(binarize(t));
    ASSERT_EQ(a.ok(), b.ok()) << render(t);
    if (!a) continue;
    ++found;
    ASSERT_EQ(a.function().signature(), b.function().signature());
    for (Nat v = 1; v <= 3; ++v) {
      const std::vector<Nat> args(a.function().signature().inputs, v);
      const auto x = evaluate(a.function(), args, 100000), y = evaluate(b.function(), args, 100000);
      if (x.halted() && y.halted()) ASSERT_EQ(x.values(), y.values()) << render(t);
    }
  }
  EXPECT_EQ(found, 100);
}

// ---- Laurent model

TEST(Laurent, Arithmetic) {
  const auto w = LaurentElement::pole(1);
  EXPECT_EQ((w * w).polar_order(), 2);
  EXPECT_DOUBLE_EQ((w * w).coef(2), 1);
  const auto x = (LaurentElement(3) + w) * LaurentElement(2);
  EXPECT_DOUBLE_EQ(x.finite(), 6);
  EXPECT_DOUBLE_EQ(x.coef(1), 2);
  const auto y = LaurentElement(pi2 / 6) * w;
  EXPECT_DOUBLE_EQ(y.coef(1), pi2 / 6);
  EXPECT_DOUBLE_EQ(y.finite(), 0);
  EXPECT_EQ((LaurentElement(1) - LaurentElement(3) * w).str(), "-3 w^-1 + 1");
}

TEST(Laurent, Projection) {
  const auto x = LaurentElement::pole(2, 3) + LaurentElement(5);
  EXPECT_EQ(distance(rb_T(x), LaurentElement::pole(2, 3)), 0);
  EXPECT_EQ(distance(rb_T(LaurentElement(5)), LaurentElement()), 0);
  EXPECT_EQ(distance(rb_one_minus_T(x), LaurentElement(5)), 0);
  const auto w = LaurentElement::pole(1);
  EXPECT_EQ(distance(rb_T(w) * rb_T(w), rb_T(w * rb_T(w)) + rb_T(rb_T(w) * w) - rb_T(w * w)), 0);
}

TEST(LaurentProperty, RotaBaxter) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-2, 2);
  auto random_element = [&] {
    LaurentElement x(coef(rng));
    const int order = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int k = 1; k <= order; ++k) x += LaurentElement::pole(k, coef(rng));
    return x;
  };
  for (int i = 0; i < 100; ++i) {
    const auto x = random_element(), y = random_element();
    const auto lhs = rb_T(x) * rb_T(y);
    const auto rhs = rb_T(x * rb_T(y)) + rb_T(rb_T(x) * y) - rb_T(x * y);
    ASSERT_LE(distance(lhs, rhs), 1e-12);
  }
}

TEST(Laurent, SeriesValues) {
  EXPECT_NEAR(phi_series_value(1, 1e-7), pi2 / 6, 1e-6);
  EXPECT_NEAR(phi_series_value(2, 1e-7), pi2 / 8, 1e-6);
  for (std::uint64_t m : {1u, 2u, 5u})
    for (double eps : {1e-3, 1e-5}) EXPECT_LE(std::abs(phi_series_value(m, eps) - phi_series_value(m, eps / 10)), eps);
}

// ---- Feynman rule and BPHZ

namespace {

const char* diverging = "m(in(comp(C[2];S)))";  // mu of a function that is never 1
const char* total_one = "c(in(C[1]),in(P[1,1]))";  // constantly 1

FeynmanRule flagged_rule() {
  FeynmanRule r;
  r.k = {3, 1};
  r.fuel = 10000;
  return r;
}

}  // namespace

TEST(Feynman, FunctionValues) {
  const FeynmanRule rule = flagged_rule();
  EXPECT_EQ(feynman_function(F("mu(comp(C[2];S))"), rule).polar_order(), 1);
  EXPECT_NEAR(feynman_function(F("C[1]"), rule).finite(), pi2 / 6, 1e-6);
  EXPECT_NEAR(feynman_function(F("comp(C[1];S)"), rule).finite(), pi2 / 8, 1e-6);
  EXPECT_DOUBLE_EQ(feynman_function(std::nullopt, rule).finite(), 1);
  EXPECT_NEAR(feynman_function(F("br(C[1],C[1])"), rule).finite(), pi2 * pi2 / 36, 1e-6);
}

TEST(Feynman, FlaggedTrees) {
  Renormalizer R(flagged_rule());
  const auto d = R.phi(T(diverging));
  EXPECT_EQ(d.polar_order(), 1);
  EXPECT_NEAR(d.coef(1), 1, 1e-12);
  const auto one = R.phi(T(total_one));
  EXPECT_TRUE(one.is_finite());
  EXPECT_NEAR(one.finite(), pi2 / 6, 1e-6);
  const auto both = R.phi(Forest(std::vector<PlanarTree>{T(diverging), T(total_one)}));
  EXPECT_NEAR(both.coef(1), pi2 / 6, 1e-6);
  EXPECT_EQ(both.polar_order(), 1);
  // inadmissible charts count as the constant 1
  EXPECT_DOUBLE_EQ(R.phi(T("r(in(S),in(S))")).finite(), 1);
}

TEST(Feynman, VertexMode) {
  FeynmanRule rule;
  rule.mode = RuleMode::vertex;
  rule.k = {1};
  Renormalizer R(rule);
  EXPECT_EQ(R.sigma_count(T("b")), 9u);
  const auto b = R.phi(T("b"));
  EXPECT_TRUE(b.is_finite());
  EXPECT_GT(b.finite(), 1);
  EXPECT_EQ(distance(R.phi(T("r")), LaurentElement(1)), 0);
  EXPECT_GE(R.phi(T("m")).polar_order(), 1);
  rule.sigma_cap = 20;
  Renormalizer capped(rule);
  EXPECT_THROW(capped.phi(T("b(c,c)")), SigmaCapExceeded);
}

TEST(Bphz, Primitive) {
  Renormalizer R(flagged_rule());
  const auto t = T(diverging);
  EXPECT_EQ(distance(R.phi_minus(t), LaurentElement::pole(1, -1)), 0);
  EXPECT_EQ(distance(R.phi_plus(t), LaurentElement()), 0);
  const auto u = T(total_one);
  EXPECT_EQ(distance(R.phi_minus(u), LaurentElement()), 0);
  EXPECT_EQ(distance(R.phi_plus(u), R.phi(u)), 0);
  EXPECT_EQ(distance(R.phi_minus(Forest{}), LaurentElement(1)), 0);
}

TEST(Bphz, TwoChain) {
  Renormalizer R(flagged_rule());
  // the c-vertex composes the divergent mu subchart with S
  const auto t = T("c(m(in(comp(C[2];S))),in(S))");
  ASSERT_EQ(R.hopf().admissible_cuts(t).size(), 1u);
  const Cut cut = R.hopf().admissible_cuts(t)[0];
  const auto expected = -rb_T(R.phi(t) + R.phi_minus(cut.pruned) * R.phi(cut.trunk));
  EXPECT_LE(distance(R.phi_minus(t), expected), 1e-12);
  EXPECT_TRUE(R.phi_plus(t).is_finite());
  EXPECT_LE(R.phisumc(t).difference(), 1e-9);
  EXPECT_LE(distance(R.factorization_value(element(t, Mode::comm)), R.phi(t)), 1e-9);
}

TEST(BphzProperty, FlaggedTreesDegree3) {
  Renormalizer R(flagged_rule());
  TreeEnumerator gen(Shape::flagged, {Label::b, Label::c, Label::r, Label::m}, {F("S"), F("mu(comp(P[1,2];S))")});
  int poles = 0;
  for (const auto& t : gen.trees_up_to(3)) {
    if (!R.phi(t).is_finite()) ++poles;
    ASSERT_TRUE(R.phi_plus(t).is_finite()) << render(t);
    ASSERT_LE(distance(R.factorization_value(element(t, Mode::comm)), R.phi(t)), 1e-9) << render(t);
    ASSERT_LE(R.phisumc(t).difference(), 1e-9) << render(t);
  }
  EXPECT_GT(poles, 0);
}

TEST(BphzProperty, Multiplicative) {
  Renormalizer R(flagged_rule());
  TreeEnumerator gen(Shape::flagged, {Label::b, Label::c, Label::m}, {F("S"), F("mu(comp(P[1,2];S))")});
  const auto trees = gen.trees_up_to(2);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto& a = trees[rng() % trees.size()];
    const auto& b = trees[rng() % trees.size()];
    const Forest ab(std::vector<PlanarTree>{a, b});
    const auto [minus, plus] = R.bphz_direct(ab);
    ASSERT_LE(distance(minus, R.phi_minus(a) * R.phi_minus(b)), 1e-9);
    ASSERT_LE(distance(plus, R.phi_plus(a) * R.phi_plus(b)), 1e-9);
    ASSERT_LE(distance(R.phi(ab), R.phi(a) * R.phi(b)), 1e-12);
  }
}

TEST(Bphz, VertexModeBreaksFactoredForm) {
  FeynmanRule rule;
  rule.mode = RuleMode::vertex;
  rule.k = {3, 1};
  rule.fuel = 10000;
  Renormalizer R(rule);
  EXPECT_GT(R.phisumc(T("c(m)")).difference(), 1e-6);
  EXPECT_TRUE(R.phi_plus(T("c(m)")).is_finite());
}
