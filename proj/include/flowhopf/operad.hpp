#pragma once

// The operad of flow charts: planar trees whose free flags are the ordered
// inputs, composed by grafting roots into input flags; and the operadic
// Dyson-Schwinger equation X = beta(P(X)).

#include "flowhopf/algebra.hpp"
#include "flowhopf/dse.hpp"
#include "flowhopf/linear.hpp"
#include "flowhopf/parse.hpp"
#include "flowhopf/tree.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowhopf {

class NonInvertible : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Contracts every vertex with exactly one child (unary operations act as the
/// identity). Rejects labeled flags.
inline PlanarTree normalize_operad_tree(const PlanarTree& t) {
  if (t.is_flag()) {
    if (t.flag_kind() != FlagKind::free) throw std::invalid_argument("operad trees carry free input flags only");
    return t;
  }
  if (t.arity() == 1) return normalize_operad_tree(t.children()[0]);
  std::vector<PlanarTree> kids;
  kids.reserve(t.arity());
  for (const auto& ch : t.children()) kids.push_back(normalize_operad_tree(ch));
  return PlanarTree::vertex(t.label(), std::move(kids));
}

inline int operad_arity(const PlanarTree& t) {
  if (t.is_flag()) return 1;
  int n = 0;
  for (const auto& ch : t.children()) n += operad_arity(ch);
  return n;
}

class OperadElement {
 public:
  using Map = std::map<PlanarTree, Rational>;

  explicit OperadElement(int arity = 1) : arity_(arity) {}
  OperadElement(const PlanarTree& t, Rational c = 1) : arity_(operad_arity(t)) { add_term(t, c); }

  static OperadElement identity(Rational c = 1) { return OperadElement(PlanarTree::flag(), std::move(c)); }
  /// delta with k input flags (k = 1 normalizes to the identity).
  static OperadElement corolla(Label l, int k, Rational c = 1) {
    return OperadElement(PlanarTree::vertex(l, std::vector<PlanarTree>(k, PlanarTree::flag())), std::move(c));
  }

  int arity() const { return arity_; }
  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Rational coefficient(const PlanarTree& t) const {
    auto it = terms_.find(t);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const PlanarTree& t, const Rational& c) {
    if (c.is_zero()) return;
    PlanarTree n = normalize_operad_tree(t);
    if (operad_arity(n) != arity_)
      throw std::invalid_argument("operad term " + render(n) + " has arity " + std::to_string(operad_arity(n)) +
                                  ", expected " + std::to_string(arity_));
    auto [it, fresh] = terms_.emplace(std::move(n), c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  OperadElement& operator+=(const OperadElement& o) {
    check(o);
    for (const auto& [t, c] : o.terms_) add_term(t, c);
    return *this;
  }
  OperadElement& operator-=(const OperadElement& o) {
    check(o);
    for (const auto& [t, c] : o.terms_) add_term(t, -c);
    return *this;
  }
  OperadElement& operator*=(const Rational& s) {
    if (s.is_zero()) terms_.clear();
    for (auto& [t, c] : terms_) c *= s;
    return *this;
  }
  friend OperadElement operator+(OperadElement a, const OperadElement& b) { return a += b; }
  friend OperadElement operator-(OperadElement a, const OperadElement& b) { return a -= b; }
  friend OperadElement operator*(const Rational& s, OperadElement a) { return a *= s; }
  friend bool operator==(const OperadElement& a, const OperadElement& b) {
    return a.arity_ == b.arity_ && a.terms_ == b.terms_;
  }

  /// The scalar if this is a multiple of the identity.
  std::optional<Rational> scalar() const {
    if (arity_ != 1) return std::nullopt;
    if (terms_.empty()) return Rational(0);
    if (terms_.size() == 1 && terms_.begin()->first.is_flag()) return terms_.begin()->second;
    return std::nullopt;
  }

 private:
  void check(const OperadElement& o) const {
    if (o.arity_ != arity_) throw std::invalid_argument("operad arity mismatch in sum");
  }

  int arity_;
  Map terms_;
};

inline std::string render(const OperadElement& x) {
  if (x.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [t, c] : x.terms()) {
    out += render_coef_term(c, t.is_flag() ? std::string("id") : render(t), first);
    first = false;
  }
  return out;
}

namespace detail {

inline PlanarTree graft_inputs(const PlanarTree& t, const std::vector<const PlanarTree*>& gs, std::size_t& next) {
  if (t.is_flag()) return *gs[next++];
  std::vector<PlanarTree> kids;
  kids.reserve(t.arity());
  for (const auto& ch : t.children()) kids.push_back(graft_inputs(ch, gs, next));
  return PlanarTree::vertex(t.label(), std::move(kids));
}

}  // namespace detail

/// Structural grafting of basis trees: the root of gs[i] replaces the i-th input flag of t.
inline PlanarTree operad_compose(const PlanarTree& t, const std::vector<const PlanarTree*>& gs) {
  std::size_t next = 0;
  return normalize_operad_tree(detail::graft_inputs(t, gs, next));
}

/// f o (g_1, ..., g_n), multilinear.
inline OperadElement operad_compose(const OperadElement& f, const std::vector<OperadElement>& gs) {
  if (static_cast<int>(gs.size()) != f.arity())
    throw std::invalid_argument("operad composition: " + std::to_string(gs.size()) + " arguments for arity " +
                                std::to_string(f.arity()));
  int arity = 0;
  for (const auto& g : gs) arity += g.arity();
  OperadElement out(arity);
  if (f.is_zero()) return out;
  for (const auto& g : gs)
    if (g.is_zero()) return out;
  std::vector<const PlanarTree*> pick(gs.size());
  std::vector<Rational> coef(gs.size() + 1);
  for (const auto& [t, c] : f.terms()) {
    coef[0] = c;
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == gs.size()) {
        out.add_term(operad_compose(t, pick), coef[i]);
        return;
      }
      for (const auto& [g, gc] : gs[i].terms()) {
        pick[i] = &g;
        coef[i + 1] = coef[i] * gc;
        self(self, i + 1);
      }
    };
    rec(rec, 0);
  }
  return out;
}

/// Erases the input flags; the identity goes to the unit.
inline AlgebraElement forget_flags(const OperadElement& x, Mode mode = Mode::nc) {
  auto strip = [](auto&& self, const PlanarTree& t) -> PlanarTree {
    std::vector<PlanarTree> kids;
    for (const auto& ch : t.children())
      if (!ch.is_flag()) kids.push_back(self(self, ch));
    return PlanarTree::vertex(t.label(), std::move(kids));
  };
  AlgebraElement out(mode);
  for (const auto& [t, c] : x.terms()) out.add_term(t.is_flag() ? Forest{} : Forest(strip(strip, t)), c);
  return out;
}

using OperadBeta = std::map<int, OperadElement>;

/// "2:b,3:b" (corollas), "1:1/2" (scalar identity), "3:b(#1,c(#2,#3))";
/// entries with the same arity add up. A leading rational multiplies the entry.
inline OperadBeta parse_operad_beta(std::string_view text) {
  OperadBeta beta;
  std::vector<std::string_view> entries;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || (text[i] == ',' && depth == 0)) {
      entries.push_back(text.substr(start, i - start));
      start = i + 1;
    } else if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      --depth;
    }
  }
  for (auto e : entries) {
    const auto colon = e.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("beta entry must be arity:element");
    detail::Cursor ar{e.substr(0, colon)};
    ar.skip_ws();
    const int k = static_cast<int>(ar.integer());
    std::string_view body = e.substr(colon + 1);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
    Rational c = 1;
    std::size_t p = 0;
    while (p < body.size() && (std::isdigit(static_cast<unsigned char>(body[p])) || body[p] == '/' || body[p] == '-'))
      ++p;
    if (p > 0) {
      c = parse_rational(body.substr(0, p));
      body.remove_prefix(p);
      while (!body.empty() && (body.front() == ' ' || body.front() == '*')) body.remove_prefix(1);
    }
    OperadElement term(k);
    if (body.empty() || body == "id") {
      term = OperadElement::identity(c);
    } else if (body.size() == 1 && label_from_char(body[0])) {
      term = OperadElement::corolla(*label_from_char(body[0]), k, c);
    } else {
      term = OperadElement(parse_tree(body), c);
    }
    if (term.arity() != k)
      throw std::invalid_argument("beta entry of arity " + std::to_string(k) + " has arity " +
                                  std::to_string(term.arity()));
    auto [it, fresh] = beta.emplace(k, term);
    if (!fresh) it->second += term;
  }
  return beta;
}

/// The delta-corolla family beta_k for k = 1..kmax.
inline OperadBeta corolla_beta(Label l, int kmax) {
  OperadBeta beta;
  for (int k = 1; k <= kmax; ++k) beta.emplace(k, OperadElement::corolla(l, k));
  return beta;
}

struct OperadSolution {
  int cutoff = 0;
  std::vector<OperadElement> x;  // x[n] of arity n; x[0] unused
  const OperadElement& operator[](int n) const { return x.at(n); }
};

namespace detail {

inline Rational beta1_scalar(const OperadBeta& beta) {
  auto it = beta.find(1);
  if (it == beta.end()) return 0;
  auto s = it->second.scalar();
  if (!s) throw std::invalid_argument("beta_1 must be a scalar multiple of the identity");
  return *s;
}

/// sum over j_1+...+j_k = n of beta_k o (x_j1 (x) ... (x) x_jk), with x indexed from 1.
inline OperadElement truncate_vertices(const OperadElement& x, int max_vertices) {
  OperadElement out(x.arity());
  for (const auto& [t, c] : x.terms())
    if (t.degree() <= max_vertices) out.add_term(t, c);
  return out;
}

inline OperadElement operad_power_term(const OperadElement& bk, int k, int n, const std::vector<OperadElement>& x,
                                       int max_vertices = -1) {
  OperadElement out(n);
  std::vector<OperadElement> args;
  auto rec = [&](auto&& self, int left, int slots) -> void {
    if (slots == 0) {
      if (left != 0) return;
      if (max_vertices < 0) {
        out += operad_compose(bk, args);
        return;
      }
      // prune factors that cannot fit under the vertex bound
      int base = 1 << 30;
      for (const auto& [t, c] : bk.terms()) base = std::min(base, t.degree());
      std::vector<OperadElement> cut;
      int others = base;
      std::vector<int> lo;
      for (const auto& a : args) {
        int m = 1 << 30;
        for (const auto& [t, c] : a.terms()) m = std::min(m, t.degree());
        lo.push_back(m);
        others += m;
      }
      if (others > max_vertices) return;
      for (std::size_t i = 0; i < args.size(); ++i)
        cut.push_back(truncate_vertices(args[i], max_vertices - (others - lo[i])));
      out += truncate_vertices(operad_compose(bk, cut), max_vertices);
      return;
    }
    for (int j = 1; j <= left - (slots - 1) && j < static_cast<int>(x.size()); ++j) {
      if (x[j].is_zero()) continue;
      args.push_back(x[j]);
      self(self, left - j, slots - 1);
      args.pop_back();
    }
  };
  rec(rec, n, k);
  return out;
}

}  // namespace detail

/// x_1 = (1 - a_1 lambda)^{-1} id and
/// (1 - a_1 lambda) x_{n+1} = sum_{k>=2} a_k beta_k o (x_j1 (x) ... (x) x_jk).
/// With max_vertices >= 0 only trees with at most that many vertices are kept
/// (exact on those trees, since composition never removes vertices).
inline OperadSolution solve_operad_dse(const FormalSeries& P, const OperadBeta& beta, int N, int max_vertices = -1) {
  if (N < 1) throw std::invalid_argument("solve_operad_dse: cutoff must be >= 1");
  for (const auto& [k, b] : beta)
    if (b.arity() != k) throw std::invalid_argument("beta_" + std::to_string(k) + " has the wrong arity");
  const Rational lambda = detail::beta1_scalar(beta);
  const Rational denom = 1 - P[1] * lambda;
  if (denom.is_zero()) throw NonInvertible("non-invertible degree-1 operator: a_1 * lambda = 1");
  const Rational inv = 1 / denom;
  OperadSolution sol{N, {OperadElement(0), OperadElement::identity(inv)}};
  for (int n = 2; n <= N; ++n) {
    OperadElement rhs(n);
    for (const auto& [k, bk] : beta) {
      if (k < 2 || k > n || P[k].is_zero()) continue;
      OperadElement t = detail::operad_power_term(bk, k, n, sol.x, max_vertices);
      t *= P[k];
      rhs += t;
    }
    rhs *= inv;
    sol.x.push_back(std::move(rhs));
  }
  return sol;
}

/// Substitutes into X = beta(P(X)) componentwise, the a_1 beta_1 term included.
inline DegreeCheck verify_operad_dse(const OperadSolution& sol, const FormalSeries& P, const OperadBeta& beta, int N) {
  if (static_cast<int>(sol.x.size()) <= N) throw std::invalid_argument("verify_operad_dse: solution too short");
  for (int n = 1; n <= N; ++n) {
    OperadElement rhs(n);
    if (n == 1) rhs += OperadElement::identity();
    for (const auto& [k, bk] : beta) {
      if (k > n || P[k].is_zero()) continue;
      OperadElement t = detail::operad_power_term(bk, k, n, sol.x);
      t *= P[k];
      rhs += t;
    }
    if (!(rhs == sol.x[n]))
      return {false, N, n, "x_" + std::to_string(n) + " differs from beta(P(X)) in arity " + std::to_string(n)};
  }
  return {true, N, 0, ""};
}

/// Compositions x_k o (x_j1 (x) ... (x) x_jk) with j_1+...+j_k = n (zero ones dropped).
inline std::vector<OperadElement> suboperad_span(const OperadSolution& sol, int n) {
  std::vector<OperadElement> out;
  for (int k = 1; k <= n && k < static_cast<int>(sol.x.size()); ++k) {
    std::vector<OperadElement> args;
    auto rec = [&](auto&& self, int left, int slots) -> void {
      if (slots == 0) {
        if (left == 0) {
          OperadElement v = operad_compose(sol.x[k], args);
          if (!v.is_zero()) out.push_back(std::move(v));
        }
        return;
      }
      for (int j = 1; j <= left - (slots - 1) && j < static_cast<int>(sol.x.size()); ++j) {
        args.push_back(sol.x[j]);
        self(self, left - j, slots - 1);
        args.pop_back();
      }
    };
    rec(rec, n, k);
  }
  return out;
}

/// Composes every spanning element of arity k with every tuple of spanning
/// elements of total arity n <= N and tests membership in the span at n.
inline DegreeCheck suboperad_closure_check(const OperadSolution& sol, int N) {
  std::vector<std::vector<OperadElement>> span(N + 1);
  std::vector<SparseEliminator<PlanarTree>> elim(N + 1);
  for (int n = 1; n <= N; ++n) {
    span[n] = suboperad_span(sol, n);
    for (std::size_t i = 0; i < span[n].size(); ++i) elim[n].add(span[n][i].terms(), i);
  }
  for (int k = 1; k <= N; ++k)
    for (const auto& f : span[k]) {
      std::vector<OperadElement> args;
      bool ok = true;
      int bad = 0;
      auto rec = [&](auto&& self, int used, int slots) -> void {
        if (!ok) return;
        if (slots == 0) {
          const OperadElement v = operad_compose(f, args);
          if (!elim[used].contains(v.terms())) {
            ok = false;
            bad = used;
          }
          return;
        }
        for (int j = 1; used + j + (slots - 1) <= N; ++j)
          for (const auto& g : span[j]) {
            args.push_back(g);
            self(self, used + j, slots - 1);
            args.pop_back();
          }
      };
      rec(rec, 0, k);
      if (!ok) return {false, N, bad, "a composite of spanning elements leaves the span in arity " + std::to_string(bad)};
    }
  return {true, N, 0, ""};
}

/// Hopf-side series matched to the delta-corolla operadic equation:
/// forgetting flags turns (1 - a_1) X into 1 + s V where V = B+_delta(Q(V)),
/// Q(t) = P~(s t)/s and P~(t) = sum_{k>=2} a_k (1-a_1)^{-k} (1+t)^k, s = P~(0).
struct HopfMatch {
  FormalSeries series;
  Rational scale;  // s
};

inline HopfMatch operad_hopf_match(const FormalSeries& P, int order) {
  const Rational inv = 1 / (1 - P[1]);
  std::vector<Rational> pt(order + 1, Rational(0));
  for (int k = 2; k <= P.order(); ++k) {
    if (P[k].is_zero()) continue;
    Rational ak = P[k];
    for (int i = 0; i < k; ++i) ak *= inv;
    Rational binom = 1;
    for (int j = 0; j <= k && j <= order; ++j) {
      pt[j] += ak * binom;
      binom = binom * (k - j) / (j + 1);
    }
  }
  const Rational s = pt[0];
  if (s.is_zero()) throw std::invalid_argument("operad_hopf_match: P~(0) vanishes");
  std::vector<Rational> q(order + 1);
  Rational sp = 1;  // s^{j-1}, starting at j = 0 with s^{-1}
  sp /= s;
  for (int j = 0; j <= order; ++j) {
    q[j] = pt[j] * sp;
    sp *= s;
  }
  return {FormalSeries(std::move(q)), s};
}

/// Compares forget_flags of the operadic solution (beta = delta-corollas,
/// arities up to those of P) with solve_dse for the matched series, vertex
/// degree by vertex degree through `degree`. The operadic solution must reach
/// arity (deg P - 1) * degree + 1.
inline DegreeCheck operad_hopf_correspondence(const FormalSeries& P, Label delta, int degree, Mode mode = Mode::nc) {
  int kmax = 0;
  for (int k = 2; k <= P.order(); ++k)
    if (!P[k].is_zero()) kmax = k;
  if (kmax < 2) throw std::invalid_argument("operad_hopf_correspondence: P needs a term of degree >= 2");
  const int arity = (kmax - 1) * degree + 1;
  OperadBeta beta = corolla_beta(delta, kmax);
  const OperadSolution op = solve_operad_dse(P, beta, arity, degree);
  AlgebraElement total(mode);
  for (int n = 1; n <= arity; ++n) total += forget_flags(op[n], mode);
  total *= 1 - P[1];
  const HopfMatch match = operad_hopf_match(P, degree);
  const GradedSolution hopf = solve_dse(match.series, GraftOperator::corolla(delta), degree, mode);
  if (!(total.component(0) == unit(mode))) return {false, degree, 0, "constant term is not 1"};
  for (int d = 1; d <= degree; ++d) {
    AlgebraElement expect = hopf[d];
    expect *= match.scale;
    if (!(total.component(d) == expect))
      return {false, degree, d,
              "degree " + std::to_string(d) + ": operad gives " + render(total.component(d)) + ", Hopf gives " +
                  render(expect)};
  }
  return {true, degree, 0, ""};
}

}  // namespace flowhopf
