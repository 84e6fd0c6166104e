#pragma once

// Grafting operators B+ and the 1-cocycle verifier.

#include "flowhopf/algebra.hpp"
#include "flowhopf/enumerate.hpp"
#include "flowhopf/hopf.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowhopf {

enum class GraftKind { corolla, binary };
enum class BinaryConvention { first_input, zero_on_mismatch };

/// B+ = sum over `labels` of the single-label operator.
struct GraftOperator {
  GraftKind kind = GraftKind::corolla;
  std::vector<Label> labels{Label::b};
  BinaryConvention convention = BinaryConvention::first_input;

  static GraftOperator corolla(Label l) { return {GraftKind::corolla, {l}, BinaryConvention::first_input}; }
  static GraftOperator binary(Label l, BinaryConvention c = BinaryConvention::first_input) {
    return {GraftKind::binary, {l}, c};
  }

  std::string str() const {
    std::string out = kind == GraftKind::corolla ? "corolla:" : "binary:";
    for (Label l : labels) out += label_char(l);
    if (kind == GraftKind::binary && convention == BinaryConvention::zero_on_mismatch) out += ":zero";
    return out;
  }
};

/// Parses "corolla:b", "binary:r", "binary:bcr", "binary:b:zero".
inline GraftOperator parse_graft(std::string_view text) {
  GraftOperator op;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("graft operator must be kind:labels");
  const auto kind = text.substr(0, colon);
  if (kind == "corolla")
    op.kind = GraftKind::corolla;
  else if (kind == "binary")
    op.kind = GraftKind::binary;
  else
    throw std::invalid_argument("unknown graft kind '" + std::string(kind) + "'");
  std::string_view rest = text.substr(colon + 1);
  const auto colon2 = rest.find(':');
  std::string_view labels = rest.substr(0, colon2);
  if (colon2 != std::string_view::npos) {
    const auto conv = rest.substr(colon2 + 1);
    if (conv == "zero")
      op.convention = BinaryConvention::zero_on_mismatch;
    else if (conv == "first")
      op.convention = BinaryConvention::first_input;
    else
      throw std::invalid_argument("unknown binary convention '" + std::string(conv) + "'");
  }
  op.labels.clear();
  for (char ch : labels) {
    auto l = label_from_char(ch);
    if (!l) throw std::invalid_argument(std::string("unknown label '") + ch + "'");
    if (op.kind == GraftKind::binary && *l == Label::m)
      throw std::invalid_argument("binary grafting is defined for b, c and r only");
    op.labels.push_back(*l);
  }
  if (op.labels.empty()) throw std::invalid_argument("graft operator needs at least one label");
  return op;
}

/// B+_l on a single forest, as an element (possibly zero).
inline AlgebraElement graft_forest(Label l, GraftKind kind, BinaryConvention conv, const Forest& f, Mode mode) {
  if (kind == GraftKind::corolla) {
    for (const auto& t : f.trees())
      if (t.has_flags()) throw std::invalid_argument("corolla grafting takes vertex-labeled forests without flags");
    return element(PlanarTree::vertex(l, {f.trees().begin(), f.trees().end()}), mode);
  }
  const PlanarTree hole = PlanarTree::flag();
  switch (f.size()) {
    case 0: return element(PlanarTree::vertex(l, {hole, hole}), mode);
    case 1: return element(PlanarTree::vertex(l, {f[0], hole}), mode);
    case 2: return element(PlanarTree::vertex(l, {f[0], f[1]}), mode);
    default: {
      if (conv == BinaryConvention::zero_on_mismatch) return AlgebraElement(mode);
      std::vector<PlanarTree> ts{PlanarTree::vertex(l, {f[0], hole})};
      ts.insert(ts.end(), f.trees().begin() + 1, f.trees().end());
      return element(Forest(std::move(ts)), mode);
    }
  }
}

inline AlgebraElement apply_graft(const GraftOperator& op, const Forest& f, Mode mode) {
  AlgebraElement out(mode);
  for (Label l : op.labels) out += graft_forest(l, op.kind, op.convention, f, mode);
  return out;
}

inline AlgebraElement apply_graft(const GraftOperator& op, const AlgebraElement& x) {
  return apply_linear(x, [&](const Forest& f) { return apply_graft(op, f, x.mode()); });
}

inline AlgebraElement bplus_corolla(Label l, const AlgebraElement& x) {
  return apply_graft(GraftOperator::corolla(l), x);
}
inline AlgebraElement bplus_binary(Label l, const AlgebraElement& x,
                                   BinaryConvention c = BinaryConvention::first_input) {
  return apply_graft(GraftOperator::binary(l, c), x);
}

struct CocycleWitness {
  Forest forest;
  TensorElement lhs;  // reduced coproduct of B(T)
  TensorElement rhs;  // (id (x) B) reduced coproduct of T + T (x) B(1)
  TensorElement residual() const { return lhs - rhs; }
};

struct CocycleResult {
  bool pass = true;
  int max_degree = 0;
  std::size_t checked = 0;
  std::optional<CocycleWitness> witness;
};

/// Both sides of  D~ B(T) = (id (x) B) D~(T) + T (x) B(1)  for one forest.
/// When B(T) has a constant term or is zero the reduced coproduct is taken
/// as D - (.)(x)1 - 1(x)(.) on each forest term.
inline std::pair<TensorElement, TensorElement> cocycle_sides(const GraftOperator& op, const Forest& T,
                                                            Hopf& hopf) {
  const Mode mode = hopf.mode();
  const AlgebraElement bt = apply_graft(op, T, mode);
  TensorElement lhs(mode);
  for (const auto& [f, c] : bt.terms()) {
    if (f.empty()) continue;
    TensorElement d(mode, {Forest{}, Forest{}});
    for (const auto& t : f.trees()) d = d * (t.degree() > T.degree() ? hopf.fresh_coproduct(t) : hopf.coproduct(t));
    d.add_term({f, Forest{}}, -1);
    d.add_term({Forest{}, f}, -1);
    d *= c;
    lhs += d;
  }
  TensorElement rhs = map_tensor(hopf.reduced_coproduct(T), nullptr,
                                 [&](const Forest& g) { return apply_graft(op, g, mode); });
  rhs += tensor(element(T, mode), apply_graft(op, Forest{}, mode));
  return {std::move(lhs), std::move(rhs)};
}

/// Tests the cocycle identity on every basis forest of degree 1..max_degree
/// (vertex-labeled forests for corolla operators, binary flagged forests for
/// binary ones). The witness is the first failing forest in degree-then-forest
/// order.
inline CocycleResult cocycle_check(const GraftOperator& op, int max_degree, Mode mode = Mode::nc) {
  if (max_degree < 1) throw std::invalid_argument("cocycle_check: max_degree must be >= 1");
  TreeEnumerator gen = op.kind == GraftKind::corolla
                           ? TreeEnumerator(Shape::vertex, {Label::b, Label::c, Label::r, Label::m})
                           : TreeEnumerator(Shape::binary, {Label::b, Label::c, Label::r});
  Hopf hopf(mode);
  CocycleResult res;
  res.max_degree = max_degree;
  for (int d = 1; d <= max_degree; ++d) {
    for (const Forest& T : gen.forests(d, mode)) {
      ++res.checked;
      auto [lhs, rhs] = cocycle_sides(op, T, hopf);
      if (!(lhs == rhs)) {
        res.pass = false;
        res.witness = CocycleWitness{T, std::move(lhs), std::move(rhs)};
        return res;
      }
    }
  }
  return res;
}

}  // namespace flowhopf
