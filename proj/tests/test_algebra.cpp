#include "flowhopf/enumerate.hpp"
#include "flowhopf/grafting.hpp"
#include "flowhopf/hopf.hpp"
#include "flowhopf/linear.hpp"
#include "flowhopf/parse.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flowhopf;

namespace {

PlanarTree T(std::string_view s) { return parse_tree(s); }
AlgebraElement E(std::string_view s, Mode m = Mode::nc) { return parse_element(s, m); }

}  // namespace

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(to_string(parse_rational("6/4")), "3/2");
  EXPECT_EQ(to_string(parse_rational("-3")), "-3");
  EXPECT_EQ(to_string(parse_rational("4/2")), "2");
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("x"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/-2"), std::invalid_argument);
}

TEST(TreeDsl, ParseRender) {
  EXPECT_EQ(render(T("b(c,r)")), "b(c,r)");
  EXPECT_EQ(render(T(" b ( c , r ) ")), "b(c,r)");
  EXPECT_EQ(T("b").degree(), 1);
  EXPECT_EQ(T("b(c,r)").degree(), 3);
  EXPECT_EQ(render(T("b(#1,#2)")), "b(#,#)");
  EXPECT_EQ(render(T("c(in(S),in(comp(S;S)))")), "c(in(S),in(comp(S;S)))");
}

TEST(TreeDsl, ErrorsCarryOffset) {
  try {
    parse_tree("b(c,");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(parse_tree("x(b)"), ParseError);
  EXPECT_THROW(parse_tree("b(#2,#1)"), ParseError);
  EXPECT_THROW(parse_tree("b c"), ParseError);
}

TEST(TreeDsl, RoundTripAllBasisTrees) {
  TreeEnumerator gen(Shape::vertex, {Label::b, Label::c, Label::r, Label::m});
  std::size_t n = 0;
  for (int d = 1; d <= 6; ++d)
    for (const auto& t : gen.trees(d)) {
      ASSERT_EQ(parse_tree(render(t)), t);
      ++n;
    }
  EXPECT_EQ(n, 4u + 16 + 128 + 1280 + 14336 + 172032);
}

TEST(Forest, CanonicalizeAndDegree) {
  EXPECT_EQ(render(parse_forest("r*b", Mode::comm)), "b*r");
  EXPECT_EQ(render(parse_forest("c*b*c", Mode::comm)), "b*c*c");
  EXPECT_EQ(render(parse_forest("r*b", Mode::nc)), "r*b");
  EXPECT_EQ(parse_forest("1").degree(), 0);
  const Forest f = parse_forest("c*b(c)*b", Mode::comm);
  EXPECT_EQ(canonicalize(f, Mode::comm), f);
}

TEST(Algebra, Arithmetic) {
  EXPECT_EQ((Rational(2) * E("b")) * (Rational(3) * E("c")), E("6 b*c"));
  EXPECT_EQ(E("2 b - 1/2 c(b)") * unit(Mode::nc), E("2 b - 1/2 c(b)"));
  EXPECT_EQ(E("b*c", Mode::comm), E("c*b", Mode::comm));
  EXPECT_NE(E("b*c"), E("c*b"));
  EXPECT_TRUE((E("b") - E("b")).is_zero());
  EXPECT_THROW(E("b") * E("b", Mode::comm), ModeMismatch);
  EXPECT_EQ(render(E("3 + b - 2/3 b*c")), "3 + b - 2/3 b*c");
}

TEST(Algebra, MultiplicationLawsExhaustive) {
  TreeEnumerator gen(Shape::vertex, {Label::b, Label::c, Label::r, Label::m});
  for (Mode mode : {Mode::nc, Mode::comm}) {
    std::vector<Forest> fs{Forest{}};
    for (int d = 1; d <= 2; ++d)
      for (auto& f : gen.forests(d, mode)) fs.push_back(f);
    for (const auto& a : fs)
      for (const auto& b : fs) {
        const auto x = element(a, mode), y = element(b, mode);
        EXPECT_EQ(x * unit(mode), x);
        EXPECT_EQ(unit(mode) * x, x);
        if (mode == Mode::comm) EXPECT_EQ(x * y, y * x);
        for (const auto& c : fs) {
          if (a.degree() + b.degree() + c.degree() > 4) continue;
          const auto z = element(c, mode);
          EXPECT_EQ((x * y) * z, x * (y * z));
        }
      }
  }
}

TEST(Linear, Membership) {
  using V = std::map<Forest, Rational>;
  const Forest b = parse_forest("b"), bb = parse_forest("b*b"), l2 = parse_forest("b(b)");
  auto r = solve_linear_membership<Forest>(V{{b, 2}}, {V{{b, 1}}});
  ASSERT_TRUE(r);
  EXPECT_EQ((*r)[0], 2);
  EXPECT_FALSE(solve_linear_membership<Forest>(V{{l2, 1}}, {V{{bb, 1}}}));
  // dependent generators, target a genuine combination
  std::vector<V> gens{V{{b, 1}, {bb, 1}}, V{{b, 2}, {bb, 2}}, V{{l2, 1}, {bb, -1}}};
  V target{{b, 3}, {l2, 5}, {bb, -2}};
  auto c = solve_linear_membership<Forest>(target, gens);
  ASSERT_TRUE(c);
  V back;
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (auto& [k, v] : gens[i]) back[k] += (*c)[i] * v;
  std::erase_if(back, [](auto& kv) { return kv.second.is_zero(); });
  EXPECT_EQ(back, target);
}

TEST(Hopf, AdmissibleCuts) {
  EXPECT_TRUE(admissible_cuts(T("b")).empty());
  auto one = admissible_cuts(T("b(c)"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(render(one[0].pruned), "c");
  EXPECT_EQ(render(one[0].trunk), "b");
  auto three = admissible_cuts(T("b(c,r)"));
  std::set<std::string> got;
  for (auto& c : three) got.insert(render(c.pruned) + "|" + render(c.trunk));
  EXPECT_EQ(got, (std::set<std::string>{"c|b(r)", "r|b(c)", "c*r|b"}));
  // path condition: b(c(r)) has cuts {c-edge}, {r-edge}
  EXPECT_EQ(admissible_cuts(T("b(c(r))")).size(), 2u);
}

TEST(Hopf, CoproductExamples) {
  Hopf h(Mode::nc);
  EXPECT_EQ(h.coproduct(E("b")), tensor(E("b"), E("1")) + tensor(E("1"), E("b")));
  EXPECT_EQ(h.coproduct(E("b(c)")),
            tensor(E("b(c)"), E("1")) + tensor(E("1"), E("b(c)")) + tensor(E("c"), E("b")));
  EXPECT_EQ(h.reduced_coproduct(E("b(c,r)")),
            tensor(E("c"), E("b(r)")) + tensor(E("r"), E("b(c)")) + tensor(E("c*r"), E("b")));
  EXPECT_TRUE(h.reduced_coproduct(E("b")).is_zero());
  EXPECT_THROW(h.reduced_coproduct(E("1 + b")), std::invalid_argument);
}

TEST(Hopf, FlagsSurviveCuts) {
  // binary trees keep a free flag where a subtree was pruned
  auto cuts = admissible_cuts(T("b(c(#,#),#)"));
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_EQ(render(cuts[0].trunk), "b(#,#)");
  // flow charts pass the pruned output along
  auto fc = admissible_cuts(T("c(c(in(S),in(S)),in(S))"));
  ASSERT_EQ(fc.size(), 1u);
  EXPECT_EQ(render(fc[0].trunk), "c(in(comp(S;S)),in(S))");
  auto bad = admissible_cuts(T("c(r(in(S),in(S)),in(S))"));
  EXPECT_EQ(render(bad[0].trunk), "c(in(?),in(S))");
}

TEST(Hopf, AntipodeExamples) {
  Hopf h(Mode::nc);
  EXPECT_EQ(h.antipode(E("b")), E("-b"));
  EXPECT_EQ(h.antipode(E("b(c)")), E("-b(c) + c*b"));
  const auto x = E("b(c)");
  EXPECT_TRUE(multiply(map_tensor(h.coproduct(x), [&](const Forest& f) { return h.antipode(f); }, nullptr))
                  .is_zero());
}

namespace {

void check_hopf_axioms(Mode mode, int max_degree) {
  TreeEnumerator gen(Shape::vertex, {Label::b, Label::c, Label::r, Label::m});
  Hopf h(mode);
  auto cop = [&](const Forest& f) -> AlgebraElement { return element(f, mode); };
  for (const PlanarTree& t : gen.trees_up_to(max_degree)) {
    const AlgebraElement x = element(t, mode);
    const TensorElement d = h.coproduct(x);
    // grading
    for (const auto& [p, c] : d.terms()) ASSERT_EQ(p.first.degree() + p.second.degree(), t.degree());
    // counit
    AlgebraElement left(mode), right(mode);
    for (const auto& [p, c] : d.terms()) {
      if (p.first.empty()) left.add_term(p.second, c);
      if (p.second.empty()) right.add_term(p.first, c);
    }
    ASSERT_EQ(left, x);
    ASSERT_EQ(right, x);
    // coassociativity, as sums of forest triples
    std::map<std::tuple<Forest, Forest, Forest>, Rational> l3, r3;
    for (const auto& [p, c] : d.terms()) {
      const TensorElement dl = h.coproduct(p.first), dr = h.coproduct(p.second);
      for (const auto& [q, e] : dl.terms()) l3[{q.first, q.second, p.second}] += c * e;
      for (const auto& [q, e] : dr.terms()) r3[{p.first, q.first, q.second}] += c * e;
    }
    std::erase_if(l3, [](auto& kv) { return kv.second.is_zero(); });
    std::erase_if(r3, [](auto& kv) { return kv.second.is_zero(); });
    ASSERT_EQ(l3, r3) << render(t);
    // antipode
    ASSERT_TRUE(multiply(map_tensor(d, [&](const Forest& f) { return h.antipode(f); }, cop)).is_zero());
    ASSERT_TRUE(multiply(map_tensor(d, cop, [&](const Forest& f) { return h.antipode(f); })).is_zero());
  }
}

}  // namespace

TEST(Hopf, AxiomsNc) { check_hopf_axioms(Mode::nc, 4); }
TEST(Hopf, AxiomsComm) { check_hopf_axioms(Mode::comm, 4); }

TEST(Hopf, CoproductMultiplicative) {
  std::mt19937 rng(7);
  TreeEnumerator gen(Shape::vertex, {Label::b, Label::c, Label::r, Label::m});
  for (Mode mode : {Mode::nc, Mode::comm}) {
    Hopf h(mode);
    auto fs = gen.forests_up_to(3, mode);
    for (int i = 0; i < 60; ++i) {
      const Forest& a = fs[rng() % fs.size()];
      const Forest& b = fs[rng() % fs.size()];
      EXPECT_EQ(h.coproduct(element(a, mode) * element(b, mode)),
                h.coproduct(element(a, mode)) * h.coproduct(element(b, mode)));
    }
  }
}

TEST(Hopf, Convolution) {
  Character<Rational> phi([](const PlanarTree& t) { return Rational(t.degree() + 1, 3); }, 4);
  auto eps = counit_character<Rational>(4);
  for (const char* s : {"b(c)", "b(c,r)", "m(b(c))*r", "2 b + c(c)"}) {
    const auto x = E(s);
    EXPECT_EQ(convolution(eps, phi, x), phi(x));
    EXPECT_EQ(convolution(phi, eps, x), phi(x));
  }
  Hopf h(Mode::nc);
  auto phiS = compose_antipode<Rational>(phi.functional(), h, Rational(0));
  EXPECT_EQ(convolution<Rational>(phiS, phi.functional(), E("b(c)"), h, Rational(0)), 0);
  EXPECT_THROW(phi(T("b(b(b(b(b))))")), UndefinedCharacterValue);
}

TEST(Grafting, Corolla) {
  EXPECT_EQ(bplus_corolla(Label::b, E("1")), E("b"));
  EXPECT_EQ(bplus_corolla(Label::b, E("c")), E("b(c)"));
  EXPECT_EQ(bplus_corolla(Label::r, E("b*c")), E("r(b,c)"));
  EXPECT_EQ(bplus_corolla(Label::r, E("2 b*c - 1")), E("2 r(b,c) - r"));
  EXPECT_THROW(bplus_corolla(Label::b, E("b(#,#)")), std::invalid_argument);
}

TEST(Grafting, Binary) {
  EXPECT_EQ(bplus_binary(Label::r, E("1")), E("r(#,#)"));
  EXPECT_EQ(bplus_binary(Label::b, E("r(#,#)")), E("b(r(#,#),#)"));
  EXPECT_EQ(bplus_binary(Label::c, E("b(#,#)*r(#,#)")), E("c(b(#,#),r(#,#))"));
  EXPECT_EQ(bplus_binary(Label::c, E("b(#,#)*r(#,#)*c(#,#)")), E("c(b(#,#),#)*r(#,#)*c(#,#)"));
  EXPECT_TRUE(bplus_binary(Label::c, E("b(#,#)*r(#,#)*c(#,#)"), BinaryConvention::zero_on_mismatch).is_zero());
}

TEST(Grafting, CorollaCocycleSmall) {
  for (Label l : all_labels) EXPECT_TRUE(cocycle_check(GraftOperator::corolla(l), 4).pass);
}

TEST(Grafting, BinaryCocycleFailsOnDisconnectedForest) {
  for (auto conv : {BinaryConvention::first_input, BinaryConvention::zero_on_mismatch}) {
    auto r = cocycle_check(GraftOperator::binary(Label::r, conv), 3);
    ASSERT_FALSE(r.pass);
    EXPECT_GE(r.witness->forest.size(), 2u);
    EXPECT_FALSE(r.witness->residual().is_zero());
  }
}
