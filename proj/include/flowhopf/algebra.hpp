#pragma once

// Exact linear combinations of forests (elements of H) and of forest pairs
// (elements of H (x) H), in noncommutative or commutative mode.

#include "flowhopf/rational.hpp"
#include "flowhopf/tree.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace flowhopf {

class ModeMismatch : public std::invalid_argument {
 public:
  ModeMismatch() : std::invalid_argument("mode mismatch between operands") {}
};

/// Raised when an element grows past HOPF_FLOW_MAX_TERMS terms.
class TermLimitExceeded : public std::runtime_error {
 public:
  explicit TermLimitExceeded(std::size_t limit)
      : std::runtime_error("term count exceeds HOPF_FLOW_MAX_TERMS=" + std::to_string(limit)) {}
};

inline std::size_t max_terms() {
  static const std::size_t limit = [] {
    const char* env = std::getenv("HOPF_FLOW_MAX_TERMS");
    if (!env || !*env) return std::size_t{0};
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    return (end && *end == '\0') ? static_cast<std::size_t>(v) : std::size_t{0};
  }();
  return limit;
}

using ForestPair = std::pair<Forest, Forest>;

inline Forest canonical_key(const Forest& f, Mode mode) { return canonicalize(f, mode); }
inline ForestPair canonical_key(const ForestPair& p, Mode mode) {
  return {canonicalize(p.first, mode), canonicalize(p.second, mode)};
}
inline int key_degree(const Forest& f) { return f.degree(); }
inline int key_degree(const ForestPair& p) { return p.first.degree() + p.second.degree(); }

template <class Key>
class LinComb {
 public:
  using Map = std::map<Key, Rational>;

  explicit LinComb(Mode mode = Mode::nc) : mode_(mode) {}
  LinComb(Mode mode, const Key& k, Rational c = 1) : mode_(mode) { add_term(k, std::move(c)); }

  Mode mode() const { return mode_; }
  const Map& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  Rational coefficient(const Key& k) const {
    auto it = terms_.find(canonical_key(k, mode_));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const Key& k, const Rational& c) {
    if (c.is_zero()) return;
    add_canonical(canonical_key(k, mode_), c);
  }

  /// Caller guarantees that k is already canonical for this mode.
  void add_canonical(const Key& k, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.try_emplace(k, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    } else if (const std::size_t lim = max_terms(); lim && terms_.size() > lim) {
      throw TermLimitExceeded(lim);
    }
  }

  LinComb& operator+=(const LinComb& o) {
    check(o);
    for (const auto& [k, c] : o.terms_) add_canonical(k, c);
    return *this;
  }
  LinComb& operator-=(const LinComb& o) {
    check(o);
    for (const auto& [k, c] : o.terms_) add_canonical(k, -c);
    return *this;
  }
  LinComb& operator*=(const Rational& s) {
    if (s.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend LinComb operator+(LinComb a, const LinComb& b) { return a += b; }
  friend LinComb operator-(LinComb a, const LinComb& b) { return a -= b; }
  friend LinComb operator-(LinComb a) { return a *= Rational(-1); }
  friend LinComb operator*(const Rational& s, LinComb a) { return a *= s; }
  friend LinComb operator*(LinComb a, const Rational& s) { return a *= s; }

  friend bool operator==(const LinComb& a, const LinComb& b) {
    return a.mode_ == b.mode_ && a.terms_ == b.terms_;
  }

  /// Largest degree present, -1 for zero.
  int max_degree() const {
    int d = -1;
    for (const auto& [k, c] : terms_) d = std::max(d, key_degree(k));
    return d;
  }

  /// Homogeneous component of degree n.
  LinComb component(int n) const {
    LinComb out(mode_);
    for (const auto& [k, c] : terms_)
      if (key_degree(k) == n) out.terms_.emplace(k, c);
    return out;
  }

  /// Drops everything above degree n.
  LinComb truncate(int n) const {
    LinComb out(mode_);
    for (const auto& [k, c] : terms_)
      if (key_degree(k) <= n) out.terms_.emplace(k, c);
    return out;
  }

  /// Same terms re-canonicalized for another mode.
  LinComb as_mode(Mode m) const {
    if (m == mode_) return *this;
    LinComb out(m);
    for (const auto& [k, c] : terms_) out.add_term(k, c);
    return out;
  }

  void check(const LinComb& o) const {
    if (o.mode_ != mode_) throw ModeMismatch();
  }

 private:
  Mode mode_;
  Map terms_;
};

using AlgebraElement = LinComb<Forest>;
using TensorElement = LinComb<ForestPair>;

inline AlgebraElement unit(Mode mode) { return AlgebraElement(mode, Forest{}); }
inline AlgebraElement element(const PlanarTree& t, Mode mode, Rational c = 1) {
  return AlgebraElement(mode, Forest(t), std::move(c));
}
inline AlgebraElement element(const Forest& f, Mode mode, Rational c = 1) {
  return AlgebraElement(mode, f, std::move(c));
}

inline AlgebraElement operator*(const AlgebraElement& x, const AlgebraElement& y) {
  x.check(y);
  AlgebraElement out(x.mode());
  for (const auto& [f, a] : x.terms())
    for (const auto& [g, b] : y.terms()) out.add_term(f * g, a * b);
  return out;
}

inline TensorElement operator*(const TensorElement& x, const TensorElement& y) {
  x.check(y);
  TensorElement out(x.mode());
  for (const auto& [p, a] : x.terms())
    for (const auto& [q, b] : y.terms())
      out.add_term({p.first * q.first, p.second * q.second}, a * b);
  return out;
}

inline TensorElement tensor(const AlgebraElement& x, const AlgebraElement& y) {
  x.check(y);
  TensorElement out(x.mode());
  for (const auto& [f, a] : x.terms())
    for (const auto& [g, b] : y.terms()) out.add_canonical({f, g}, a * b);
  return out;
}

/// Scalar coefficient of the empty forest.
inline Rational constant_term(const AlgebraElement& x) { return x.coefficient(Forest{}); }

/// Applies linear maps on each tensor factor: (f (x) g)(t).
inline TensorElement map_tensor(const TensorElement& t,
                                const std::function<AlgebraElement(const Forest&)>& left,
                                const std::function<AlgebraElement(const Forest&)>& right) {
  TensorElement out(t.mode());
  for (const auto& [p, c] : t.terms()) {
    const AlgebraElement l = left ? left(p.first) : element(p.first, t.mode());
    if (l.is_zero()) continue;
    const AlgebraElement r = right ? right(p.second) : element(p.second, t.mode());
    for (const auto& [f, a] : l.terms())
      for (const auto& [g, b] : r.terms()) out.add_canonical({f, g}, c * a * b);
  }
  return out;
}

/// Multiplication map H (x) H -> H.
inline AlgebraElement multiply(const TensorElement& t) {
  AlgebraElement out(t.mode());
  for (const auto& [p, c] : t.terms()) out.add_term(p.first * p.second, c);
  return out;
}

/// Extends a map defined on forests linearly.
inline AlgebraElement apply_linear(const AlgebraElement& x,
                                   const std::function<AlgebraElement(const Forest&)>& f) {
  AlgebraElement out(x.mode());
  for (const auto& [g, c] : x.terms()) {
    AlgebraElement y = f(g);
    y.check(out);
    for (const auto& [h, d] : y.terms()) out.add_canonical(h, c * d);
  }
  return out;
}

inline std::string render_coef_term(const Rational& c, const std::string& body, bool first) {
  std::string out;
  Rational a = c;
  if (a < 0) {
    out += first ? "-" : " - ";
    a = -a;
  } else if (!first) {
    out += " + ";
  }
  if (a == 1) return out + body;
  if (body == "1") return out + to_string(a);
  return out + to_string(a) + " " + body;
}

inline std::string render(const AlgebraElement& x) {
  if (x.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [f, c] : x.terms()) {
    out += render_coef_term(c, render(f), first);
    first = false;
  }
  return out;
}

inline std::string render(const TensorElement& x) {
  if (x.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [p, c] : x.terms()) {
    out += render_coef_term(c, render(p.first) + " (x) " + render(p.second), first);
    first = false;
  }
  return out;
}

}  // namespace flowhopf
