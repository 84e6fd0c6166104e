#pragma once

// Flow charts: planar trees whose input flags carry recursive functions and
// whose vertices are elementary operations. Labels propagate from the leaves
// to the root; the root output is the function computed by the chart.

#include "flowhopf/recfun.hpp"
#include "flowhopf/tree.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace flowhopf {

struct Rejection {
  std::string vertex;  // path from the root, e.g. "root" or "root.2.1"
  std::string rule;
  std::string str() const { return "vertex " + vertex + ": " + rule; }
};

class AdmissibleResult {
 public:
  AdmissibleResult(RecFun f) : v_(std::move(f)) {}
  AdmissibleResult(Rejection r) : v_(std::move(r)) {}
  bool ok() const { return std::holds_alternative<RecFun>(v_); }
  explicit operator bool() const { return ok(); }
  const RecFun& function() const { return std::get<RecFun>(v_); }
  const Rejection& rejection() const { return std::get<Rejection>(v_); }

 private:
  std::variant<RecFun, Rejection> v_;
};

namespace detail {

inline AdmissibleResult admissible_at(const PlanarTree& t, const std::string& path) {
  if (t.is_flag()) {
    switch (t.flag_kind()) {
      case FlagKind::labeled: return *t.flag_function();
      case FlagKind::free: return Rejection{path, "input flag carries no function"};
      case FlagKind::invalid: return Rejection{path, "input flag is fed by a chart that computes nothing"};
    }
  }
  std::vector<RecFun> in;
  for (std::size_t i = 0; i < t.arity(); ++i) {
    AdmissibleResult sub = admissible_at(t.children()[i], path + "." + std::to_string(i + 1));
    if (!sub) return sub;
    in.push_back(sub.function());
  }
  const std::string who = path + " (" + std::string(1, label_char(t.label())) + ")";
  auto reject = [&](std::string rule) { return AdmissibleResult(Rejection{who, std::move(rule)}); };
  switch (t.label()) {
    case Label::c: {
      if (in.size() < 2) return reject("composition needs at least two inputs");
      for (std::size_t i = 1; i < in.size(); ++i)
        if (in[i].signature().inputs != in[i - 1].signature().outputs)
          return reject("composition: input " + std::to_string(i + 1) + " (" + in[i].str() +
                        ") expects " + std::to_string(in[i].signature().inputs) +
                        " arguments but input " + std::to_string(i) + " yields " +
                        std::to_string(in[i - 1].signature().outputs));
      return RecFun::compose(std::move(in));
    }
    case Label::b: {
      if (in.empty()) return reject("bracketing needs at least one input");
      for (std::size_t i = 1; i < in.size(); ++i)
        if (in[i].signature().inputs != in[0].signature().inputs)
          return reject("bracketing: inputs do not share a domain (" + in[0].str() + " vs " +
                        in[i].str() + ")");
      return RecFun::bracket(std::move(in));
    }
    case Label::r: {
      if (in.size() < 2) return reject("recursion needs k initial inputs and one step input");
      const std::size_t k = in.size() - 1;
      const Signature base = in[0].signature();
      for (std::size_t i = 0; i < k; ++i)
        if (in[i].signature().outputs != 1 || in[i].signature().inputs != base.inputs)
          return reject("recursion: initial input " + std::to_string(i + 1) + " (" + in[i].str() +
                        ") must be N^" + std::to_string(base.inputs) + " -> N");
      const Signature step = in[k].signature();
      const int need = base.inputs + static_cast<int>(k) + 1;
      if (step.outputs != 1 || step.inputs != need)
        return reject("recursion: step input " + in[k].str() + " must have " + std::to_string(need) +
                      " arguments, has " + std::to_string(step.inputs));
      if (k == 1) return RecFun::primrec(in[0], in[1]);
      RecFun g = in.back();
      in.pop_back();
      return RecFun::krec(std::move(in), std::move(g));
    }
    case Label::m: {
      if (in.size() != 1) return reject("minimisation takes exactly one input");
      const Signature s = in[0].signature();
      if (s.outputs != 1 || s.inputs < 1)
        return reject("minimisation: input " + in[0].str() + " must be N^(n+1) -> N");
      return RecFun::mu(in[0]);
    }
  }
  return reject("unknown label");
}

}  // namespace detail

/// Checks every vertex rule bottom-up and returns the root output function.
inline AdmissibleResult admissible_check(const PlanarTree& t) { return detail::admissible_at(t, "root"); }

/// Flag that replaces a pruned subtree in the trunk of a cut. Trees with
/// function-labeled inputs pass the subtree's output along; charts with free
/// inputs leave a free flag.
inline PlanarTree trunk_flag_for(const PlanarTree& pruned) {
  bool labeled = false;
  auto scan = [&](auto&& self, const PlanarTree& t) -> void {
    if (t.is_flag()) {
      labeled = labeled || t.flag_kind() != FlagKind::free;
      return;
    }
    for (const auto& ch : t.children()) self(self, ch);
  };
  scan(scan, pruned);
  if (!labeled) return PlanarTree::flag();
  AdmissibleResult r = admissible_check(pruned);
  return r ? PlanarTree::flag(r.function()) : PlanarTree::invalid_flag();
}

/// Minimum number of inputs of a vertex that can carry a computation.
inline std::size_t minimum_valence(Label l) { return l == Label::m ? 1 : 2; }

/// Adds free flags so that every vertex reaches its minimum valence.
inline PlanarTree pad_with_flags(const PlanarTree& t) {
  if (t.is_flag()) return t;
  std::vector<PlanarTree> kids;
  for (const auto& ch : t.children()) kids.push_back(pad_with_flags(ch));
  while (kids.size() < minimum_valence(t.label())) kids.push_back(PlanarTree::flag());
  return PlanarTree::vertex(t.label(), std::move(kids));
}

/// Labels the free flags of t, left to right, with the given functions.
inline PlanarTree assign_inputs(const PlanarTree& t, std::span<const RecFun> inputs) {
  std::size_t next = 0;
  auto go = [&](auto&& self, const PlanarTree& s) -> PlanarTree {
    if (s.is_flag()) {
      if (s.flag_kind() != FlagKind::free) return s;
      if (next >= inputs.size()) throw std::invalid_argument("assign_inputs: too few inputs");
      return PlanarTree::flag(inputs[next++]);
    }
    std::vector<PlanarTree> kids;
    for (const auto& ch : s.children()) kids.push_back(self(self, ch));
    return PlanarTree::vertex(s.label(), std::move(kids));
  };
  PlanarTree out = go(go, t);
  if (next != inputs.size()) throw std::invalid_argument("assign_inputs: too many inputs");
  return out;
}

/// Number of free input flags after padding.
inline int free_flag_count(const PlanarTree& t) {
  if (t.is_flag()) return t.flag_kind() == FlagKind::free ? 1 : 0;
  int n = 0;
  for (const auto& ch : t.children()) n += free_flag_count(ch);
  return n;
}

/// The basic functions of arity d that may feed an input: S (d = 1 only),
/// C[d] and P[i,d].
inline std::vector<RecFun> basic_inputs(int d = 1) {
  std::vector<RecFun> out;
  if (d == 1) out.push_back(RecFun::successor());
  out.push_back(RecFun::constant(d));
  for (int i = 1; i <= d; ++i) out.push_back(RecFun::projection(i, d));
  return out;
}

/// Output of a vertex-labeled chart under the input assignment sigma (free
/// flags after padding, in planar order). nullopt stands for the empty
/// function assigned to charts that fail admissibility.
inline std::optional<RecFun> flowchart_output_vertexmode(const PlanarTree& t,
                                                         std::span<const RecFun> sigma) {
  AdmissibleResult r = admissible_check(assign_inputs(pad_with_flags(t), sigma));
  if (!r) return std::nullopt;
  return r.function();
}

/// Replaces k-ary bracketing and composition vertices (k > 2) by right-nested
/// chains of binary ones. Higher-order recursion vertices are kept as they are.
inline PlanarTree binarize(const PlanarTree& t) {
  if (t.is_flag()) return t;
  std::vector<PlanarTree> kids;
  for (const auto& ch : t.children()) kids.push_back(binarize(ch));
  if ((t.label() == Label::b || t.label() == Label::c) && kids.size() > 2) {
    PlanarTree acc = PlanarTree::vertex(t.label(), {kids[kids.size() - 2], kids.back()});
    for (std::size_t i = kids.size() - 2; i-- > 0;)
      acc = PlanarTree::vertex(t.label(), {kids[i], acc});
    return acc;
  }
  return PlanarTree::vertex(t.label(), std::move(kids));
}

}  // namespace flowhopf
