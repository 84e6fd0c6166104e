#pragma once

// Coproduct by admissible cuts, counit, antipode, characters and convolution.

#include "flowhopf/algebra.hpp"
#include "flowhopf/flowchart.hpp"
#include "flowhopf/tree.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace flowhopf {

struct Cut {
  Forest pruned;  // planar left-to-right order
  PlanarTree trunk;
};

/// Per-task caches for the coproduct and antipode. Not thread-safe; give
/// each task its own instance.
class Hopf {
 public:
  explicit Hopf(Mode mode) : mode_(mode) {}
  Mode mode() const { return mode_; }

  /// All admissible cuts, the empty cut included as its first entry.
  const std::vector<Cut>& cuts_with_empty(const PlanarTree& t) {
    if (auto it = cuts_.find(t); it != cuts_.end()) return it->second;
    std::vector<Cut> out = compute_cuts(t);
    return cuts_.emplace(t, std::move(out)).first->second;
  }

  /// Same as cuts_with_empty without memoizing t itself (its subtrees are
  /// still cached). Useful for one-off trees such as B(T).
  std::vector<Cut> compute_cuts(const PlanarTree& t) {
    std::vector<Cut> out;
    if (t.is_flag()) {
      out.push_back({Forest{}, t});
      return out;
    }
    // Partial products over the children processed so far.
    struct Partial {
      std::vector<PlanarTree> pruned;
      std::vector<PlanarTree> kids;
    };
    std::vector<Partial> acc{Partial{}};
    for (const PlanarTree& ch : t.children()) {
      std::vector<Partial> next;
      if (ch.is_flag()) {
        for (auto& p : acc) {
          p.kids.push_back(ch);
          next.push_back(std::move(p));
        }
        acc = std::move(next);
        continue;
      }
      const std::vector<Cut>& sub = cuts_with_empty(ch);
      const std::optional<PlanarTree> slot =
          t.has_flags() ? std::optional<PlanarTree>(trunk_flag_for(ch)) : std::nullopt;
      next.reserve(acc.size() * (sub.size() + 1));
      for (const auto& p : acc) {
        Partial whole = p;
        whole.pruned.push_back(ch);
        if (slot) whole.kids.push_back(*slot);
        next.push_back(std::move(whole));
        for (const Cut& c : sub) {
          Partial q = p;
          q.pruned.insert(q.pruned.end(), c.pruned.trees().begin(), c.pruned.trees().end());
          q.kids.push_back(c.trunk);
          next.push_back(std::move(q));
        }
      }
      acc = std::move(next);
    }
    // The empty cut is the one that recursed everywhere; move it to the front.
    out.reserve(acc.size());
    for (auto& p : acc) {
      Cut c{Forest(std::move(p.pruned)), PlanarTree::vertex(t.label(), std::move(p.kids))};
      if (c.pruned.empty())
        out.insert(out.begin(), std::move(c));
      else
        out.push_back(std::move(c));
    }
    return out;
  }

  /// Delta(t) without memoizing t.
  TensorElement fresh_coproduct(const PlanarTree& t) {
    TensorElement out(mode_);
    out.add_term({Forest(t), Forest{}}, 1);
    for (const Cut& c : compute_cuts(t)) out.add_term({c.pruned, Forest(c.trunk)}, 1);
    return out;
  }

  /// Nonempty admissible cuts as (pruned forest, trunk) pairs.
  std::vector<Cut> admissible_cuts(const PlanarTree& t) {
    const auto& all = cuts_with_empty(t);
    return std::vector<Cut>(all.begin() + 1, all.end());
  }

  const TensorElement& coproduct(const PlanarTree& t) {
    if (auto it = tree_cop_.find(t); it != tree_cop_.end()) return it->second;
    TensorElement out(mode_);
    out.add_term({Forest(t), Forest{}}, 1);
    for (const Cut& c : cuts_with_empty(t)) out.add_term({c.pruned, Forest(c.trunk)}, 1);
    return tree_cop_.emplace(t, std::move(out)).first->second;
  }

  TensorElement coproduct(const Forest& f) {
    TensorElement out(mode_, {Forest{}, Forest{}});
    for (const PlanarTree& t : f.trees()) out = out * coproduct(t);
    return out;
  }

  TensorElement coproduct(const AlgebraElement& x) {
    check(x);
    TensorElement out(mode_);
    for (const auto& [f, c] : x.terms()) {
      TensorElement d = coproduct(f);
      d *= c;
      out += d;
    }
    return out;
  }

  /// Delta(f) - f (x) 1 - 1 (x) f; requires f nonempty.
  const TensorElement& reduced_coproduct(const Forest& f) {
    if (f.empty()) throw std::invalid_argument("reduced coproduct of the unit");
    if (auto it = reduced_.find(f); it != reduced_.end()) return it->second;
    TensorElement d = coproduct(f);
    d.add_term({f, Forest{}}, -1);
    d.add_term({Forest{}, f}, -1);
    return reduced_.emplace(f, std::move(d)).first->second;
  }

  TensorElement reduced_coproduct(const AlgebraElement& x) {
    check(x);
    if (!constant_term(x).is_zero())
      throw std::invalid_argument("reduced coproduct: element has a constant term");
    TensorElement out(mode_);
    for (const auto& [f, c] : x.terms()) {
      TensorElement d = reduced_coproduct(f);
      d *= c;
      out += d;
    }
    return out;
  }

  /// S(1) = 1, S(x) = -x - sum S(x') x'' by induction on degree.
  const AlgebraElement& antipode(const Forest& f) {
    if (auto it = antipode_.find(f); it != antipode_.end()) return it->second;
    AlgebraElement out(mode_);
    if (f.empty()) {
      out = unit(mode_);
    } else {
      out.add_term(f, -1);
      const TensorElement red = reduced_coproduct(f);
      for (const auto& [p, c] : red.terms()) {
        const AlgebraElement left = antipode(p.first);
        out -= c * (left * element(p.second, mode_));
      }
    }
    return antipode_.emplace(f, std::move(out)).first->second;
  }

  AlgebraElement antipode(const AlgebraElement& x) {
    check(x);
    return apply_linear(x, [this](const Forest& f) { return antipode(f); });
  }

 private:
  void check(const AlgebraElement& x) const {
    if (x.mode() != mode_) throw ModeMismatch();
  }

  Mode mode_;
  std::unordered_map<PlanarTree, std::vector<Cut>, TreeHash> cuts_;
  std::unordered_map<PlanarTree, TensorElement, TreeHash> tree_cop_;
  std::unordered_map<Forest, TensorElement, ForestHash> reduced_;
  std::unordered_map<Forest, AlgebraElement, ForestHash> antipode_;
};

inline std::vector<Cut> admissible_cuts(const PlanarTree& t) { return Hopf(Mode::nc).admissible_cuts(t); }
inline TensorElement coproduct(const AlgebraElement& x) { return Hopf(x.mode()).coproduct(x); }
inline TensorElement reduced_coproduct(const AlgebraElement& x) {
  return Hopf(x.mode()).reduced_coproduct(x);
}
inline AlgebraElement antipode(const AlgebraElement& x) { return Hopf(x.mode()).antipode(x); }

inline Rational counit(const Forest& f) { return f.empty() ? Rational(1) : Rational(0); }
inline Rational counit(const AlgebraElement& x) { return constant_term(x); }

// ---------------------------------------------------------------------------
// Characters and convolution

inline Rational scale(const Rational& v, const Rational& c) { return v * c; }

/// Linear functional on H given by its values on basis forests.
template <class T>
using Functional = std::function<T(const Forest&)>;

class UndefinedCharacterValue : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Multiplicative functional determined by its values on trees up to a
/// degree cutoff; asking beyond the cutoff is an error.
template <class T>
class Character {
 public:
  Character(std::function<T(const PlanarTree&)> on_tree, int cutoff, T one = T(1))
      : on_tree_(std::move(on_tree)), cutoff_(cutoff), one_(std::move(one)) {}

  int cutoff() const { return cutoff_; }

  T operator()(const PlanarTree& t) const {
    if (t.degree() > cutoff_)
      throw UndefinedCharacterValue("character undefined on " + render(t) + " (degree " +
                                    std::to_string(t.degree()) + " > cutoff " +
                                    std::to_string(cutoff_) + ")");
    return on_tree_(t);
  }
  T operator()(const Forest& f) const {
    T v = one_;
    for (const auto& t : f.trees()) v = v * (*this)(t);
    return v;
  }
  T operator()(const AlgebraElement& x) const {
    T v = one_ - one_;
    for (const auto& [f, c] : x.terms()) v = v + scale((*this)(f), c);
    return v;
  }

  Functional<T> functional() const {
    return [self = *this](const Forest& f) { return self(f); };
  }

 private:
  std::function<T(const PlanarTree&)> on_tree_;
  int cutoff_;
  T one_;
};

/// The counit as a character with values in T.
template <class T>
Character<T> counit_character(int cutoff, T one = T(1)) {
  return Character<T>([zero = one - one](const PlanarTree&) { return zero; }, cutoff, one);
}

/// <phi (x) psi, Delta(x)>.
template <class T>
T convolution(const Functional<T>& phi, const Functional<T>& psi, const AlgebraElement& x,
              Hopf& hopf, T zero) {
  T v = zero;
  const TensorElement d = hopf.coproduct(x);
  for (const auto& [p, c] : d.terms()) v = v + scale(phi(p.first) * psi(p.second), c);
  return v;
}

template <class T>
T convolution(const Character<T>& phi, const Character<T>& psi, const AlgebraElement& x, T zero = T(0)) {
  Hopf hopf(x.mode());
  return convolution<T>(phi.functional(), psi.functional(), x, hopf, zero);
}

/// phi o S as a functional.
template <class T>
Functional<T> compose_antipode(Functional<T> phi, Hopf& hopf, T zero) {
  return [phi = std::move(phi), &hopf, zero](const Forest& f) {
    T v = zero;
    for (const auto& [g, c] : hopf.antipode(f).terms()) v = v + scale(phi(g), c);
    return v;
  };
}

}  // namespace flowhopf
