#pragma once

// Combinatorial Dyson-Schwinger equations X = B+(P(X)) in the Hopf algebra of
// flow charts: solvers, substitution checks and the Hopf-theoretic criteria
// (Foissy's series condition, subalgebra closure, Bergbauer-Kreimer coproduct
// formula, Hopf ideal).

#include "flowhopf/algebra.hpp"
#include "flowhopf/enumerate.hpp"
#include "flowhopf/grafting.hpp"
#include "flowhopf/hopf.hpp"
#include "flowhopf/linear.hpp"
#include "flowhopf/text.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowhopf {

/// P(t) = sum a_k t^k with a_0 = 1, stored up to a finite order.
class FormalSeries {
 public:
  FormalSeries() : a_{Rational(1)} {}
  explicit FormalSeries(std::vector<Rational> coeffs) : a_(std::move(coeffs)) {
    if (a_.empty() || a_[0] != 1) throw std::invalid_argument("formal series must have a_0 = 1");
  }

  static FormalSeries geometric(int order) { return FormalSeries(std::vector<Rational>(order + 1, Rational(1))); }
  static FormalSeries exponential(int order) {
    std::vector<Rational> a{Rational(1)};
    Integer fact = 1;
    for (int k = 1; k <= order; ++k) {
      fact *= k;
      a.emplace_back(Integer(1), fact);
    }
    return FormalSeries(std::move(a));
  }

  /// a_k, zero beyond the stored order.
  Rational operator[](int k) const {
    return k >= 0 && k < static_cast<int>(a_.size()) ? a_[k] : Rational(0);
  }
  int order() const { return static_cast<int>(a_.size()) - 1; }
  bool is_constant() const {
    for (int k = 1; k <= order(); ++k)
      if (!a_[k].is_zero()) return false;
    return true;
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < a_.size(); ++i) out += (i ? "," : "") + to_string(a_[i]);
    return out;
  }

 private:
  std::vector<Rational> a_;
};

/// "1,1,1", "geometric" or "exp" (the named series are expanded to `order`).
/// A trailing "..." repeats the last coefficient up to `order`.
inline FormalSeries parse_series(std::string_view text, int order) {
  if (text == "geometric") return FormalSeries::geometric(order);
  if (text == "exp" || text == "exponential") return FormalSeries::exponential(order);
  std::vector<Rational> a;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    std::string_view tok = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok == "..." && comma == std::string_view::npos && !a.empty()) {
      while (static_cast<int>(a.size()) <= order) a.push_back(a.back());
      break;
    }
    a.push_back(parse_rational(tok));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return FormalSeries(std::move(a));
}

/// Homogeneous components x_0..x_N; x_0 is 1 for equations with a constant
/// term on the right and 0 otherwise.
struct GradedSolution {
  Mode mode = Mode::nc;
  int cutoff = 0;
  std::vector<AlgebraElement> x;

  const AlgebraElement& operator[](int n) const { return x.at(n); }
  /// Sum of all components.
  AlgebraElement total() const {
    AlgebraElement out(mode);
    for (const auto& c : x) out += c;
    return out;
  }
};

namespace detail {

/// pw[k][n] = degree-n part of X^k (noncommutative product), for k <= kmax,
/// n <= nmax, where X = sum of comps (comps[0] may be nonzero).
inline std::vector<std::vector<AlgebraElement>> graded_powers(const std::vector<AlgebraElement>& comps, int kmax,
                                                              int nmax, Mode mode) {
  std::vector<std::vector<AlgebraElement>> pw(kmax + 1, std::vector<AlgebraElement>(nmax + 1, AlgebraElement(mode)));
  pw[0][0] = unit(mode);
  for (int k = 1; k <= kmax; ++k)
    for (int n = 0; n <= nmax; ++n)
      for (int j = 0; j <= n && j < static_cast<int>(comps.size()); ++j) {
        if (comps[j].is_zero() || pw[k - 1][n - j].is_zero()) continue;
        pw[k][n] += comps[j] * pw[k - 1][n - j];
      }
  return pw;
}

inline AlgebraElement p_of_x_component(const FormalSeries& P, const std::vector<AlgebraElement>& comps, int n,
                                       Mode mode) {
  // X has no constant term here, so X^k starts in degree k.
  const int kmax = std::min(n, P.order());
  auto pw = graded_powers(comps, kmax, n, mode);
  AlgebraElement out(mode);
  for (int k = 0; k <= kmax; ++k)
    if (!P[k].is_zero()) out += P[k] * pw[k][n];
  return out;
}

}  // namespace detail

/// Unique solution of X = B+(P(X)) through degree N:
///   x_1 = B+(1),  x_{n+1} = B+( sum_k a_k (X^k)_n ).
/// Powers are formed in the noncommutative algebra before grafting so that
/// every ordering of the factors is grafted; the result is then read in `mode`.
inline GradedSolution solve_dse(const FormalSeries& P, const GraftOperator& B, int N, Mode mode = Mode::nc) {
  if (N < 1) throw std::invalid_argument("solve_dse: cutoff must be >= 1");
  std::vector<AlgebraElement> comps{AlgebraElement(Mode::nc)};
  for (int n = 0; n < N; ++n) {
    AlgebraElement rhs = detail::p_of_x_component(P, comps, n, Mode::nc);
    comps.push_back(apply_graft(B, rhs));
  }
  GradedSolution sol{mode, N, {}};
  for (auto& c : comps) sol.x.push_back(c.as_mode(mode));
  return sol;
}

struct DegreeCheck {
  bool pass = true;
  int cutoff = 0;
  int failing_degree = 0;
  std::string detail;
};

/// Substitutes the components back into X = B+(P(X)) degree by degree.
inline DegreeCheck verify_dse(const GradedSolution& sol, const FormalSeries& P, const GraftOperator& B, int N) {
  if (static_cast<int>(sol.x.size()) <= N) throw std::invalid_argument("verify_dse: solution shorter than cutoff");
  std::vector<AlgebraElement> comps;
  for (const auto& c : sol.x) comps.push_back(c.as_mode(Mode::nc));
  DegreeCheck res{true, N, 0, ""};
  if (!comps[0].is_zero()) return {false, N, 0, "x_0 must vanish"};
  for (int n = 0; n < N; ++n) {
    const AlgebraElement rhs = apply_graft(B, detail::p_of_x_component(P, comps, n, Mode::nc)).as_mode(sol.mode);
    if (!(rhs == sol.x[n + 1])) {
      res.pass = false;
      res.failing_degree = n + 1;
      res.detail = "x_" + std::to_string(n + 1) + " = " + render(sol.x[n + 1]) + " but B+(P(X)) gives " + render(rhs);
      return res;
    }
  }
  return res;
}

/// X = 1 + sum_k c_k B+(X^{k+1}), graded by x_n = sum_k c_k B+((X^{k+1})_{n-1}).
inline GradedSolution solve_bk(const std::map<int, Rational>& c, const GraftOperator& B, int N, Mode mode = Mode::nc) {
  if (N < 0) throw std::invalid_argument("solve_bk: cutoff must be >= 0");
  int kmax = 0;
  for (const auto& [k, v] : c) {
    if (k < 1) throw std::invalid_argument("solve_bk: coefficients are indexed from 1");
    if (!v.is_zero()) kmax = std::max(kmax, k);
  }
  std::vector<AlgebraElement> comps{unit(Mode::nc)};
  for (int n = 1; n <= N; ++n) {
    auto pw = detail::graded_powers(comps, kmax + 1, n - 1, Mode::nc);
    AlgebraElement arg(Mode::nc);
    for (const auto& [k, v] : c)
      if (!v.is_zero()) arg += v * pw[k + 1][n - 1];
    comps.push_back(apply_graft(B, arg));
  }
  GradedSolution sol{mode, N, {}};
  for (auto& x : comps) sol.x.push_back(x.as_mode(mode));
  return sol;
}

inline DegreeCheck verify_bk(const GradedSolution& sol, const std::map<int, Rational>& c, const GraftOperator& B,
                             int N) {
  GradedSolution fresh = solve_bk(c, B, N, sol.mode);
  for (int n = 0; n <= N; ++n)
    if (!(fresh.x[n] == sol.x.at(n)))
      return {false, N, n, "component " + std::to_string(n) + " differs from B+(X^{k+1}) substitution"};
  return {true, N, 0, ""};
}

// ---------------------------------------------------------------------------
// Systems X_d = B+_d(F_d(X_b, X_c, X_r))

/// F(X) = sum a_{k1,k2,k3} X_b^k1 X_c^k2 X_r^k3.
struct MultiSeries {
  std::map<std::array<int, 3>, Rational> coeffs;

  bool is_constant() const {
    for (const auto& [k, v] : coeffs)
      if (!v.is_zero() && (k[0] || k[1] || k[2])) return false;
    return true;
  }
  int max_total_degree() const {
    int d = 0;
    for (const auto& [k, v] : coeffs) d = std::max(d, k[0] + k[1] + k[2]);
    return d;
  }
};

/// Parses e.g. "1 + X_c", "1 + 2 b^2 c + 1/3 r": terms joined by '+',
/// each an optional rational followed by factors b, c, r (or X_b, ...) with
/// optional exponents.
inline MultiSeries parse_multiseries(std::string_view text) {
  MultiSeries out;
  detail::Cursor in{text};
  do {
    Rational coef = 1;
    in.skip_ws();
    if (std::isdigit(static_cast<unsigned char>(in.peek()))) {
      const std::size_t start = in.pos;
      std::size_t end = start;
      while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '/')) ++end;
      coef = parse_rational(text.substr(start, end - start));
      in.pos = end;
    }
    std::array<int, 3> k{0, 0, 0};
    while (true) {
      in.consume('*');
      in.skip_ws();
      if (in.consume("X_")) {
      }
      const char ch = in.peek();
      int idx = ch == 'b' ? 0 : ch == 'c' ? 1 : ch == 'r' ? 2 : -1;
      if (idx < 0) break;
      ++in.pos;
      int e = 1;
      if (in.consume('^')) e = static_cast<int>(in.integer());
      k[idx] += e;
    }
    out.coeffs[k] += coef;
  } while (in.consume('+'));
  if (!in.at_end()) in.fail("unexpected input in series");
  std::erase_if(out.coeffs, [](const auto& kv) { return kv.second.is_zero(); });
  return out;
}

struct SystemSolution {
  Mode mode = Mode::nc;
  int cutoff = 0;
  std::array<std::vector<AlgebraElement>, 3> x;  // indexed b, c, r
};

namespace detail {

inline AlgebraElement multiseries_component(const MultiSeries& F, const std::array<std::vector<AlgebraElement>, 3>& X,
                                            int n) {
  const int kmax = std::min(n, F.max_total_degree());
  std::array<std::vector<std::vector<AlgebraElement>>, 3> pw;
  for (int d = 0; d < 3; ++d) pw[d] = graded_powers(X[d], kmax, n, Mode::nc);
  AlgebraElement out(Mode::nc);
  for (const auto& [k, a] : F.coeffs) {
    if (k[0] + k[1] + k[2] > n) continue;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const auto& A = pw[0][k[0]][i];
        const auto& Bc = pw[1][k[1]][j];
        const auto& C = pw[2][k[2]][n - i - j];
        if (A.is_zero() || Bc.is_zero() || C.is_zero()) continue;
        out += a * (A * Bc * C);
      }
  }
  return out;
}

}  // namespace detail

/// Degree-wise solution of X_d = B+_d(F_d(X)) for d in {b, c, r} with corolla
/// grafting. A constant F_d is accepted unless `strict` is set.
inline SystemSolution solve_dse_system(const std::array<MultiSeries, 3>& F, int N, Mode mode = Mode::nc,
                                       bool strict = false) {
  if (N < 1) throw std::invalid_argument("solve_dse_system: cutoff must be >= 1");
  if (strict)
    for (int d = 0; d < 3; ++d)
      if (F[d].is_constant())
        throw std::invalid_argument(std::string("solve_dse_system: F_") + "bcr"[d] + " is constant");
  const Label labels[3] = {Label::b, Label::c, Label::r};
  std::array<std::vector<AlgebraElement>, 3> X;
  for (auto& v : X) v.push_back(AlgebraElement(Mode::nc));
  for (int n = 0; n < N; ++n) {
    std::array<AlgebraElement, 3> next{AlgebraElement(Mode::nc), AlgebraElement(Mode::nc), AlgebraElement(Mode::nc)};
    for (int d = 0; d < 3; ++d)
      next[d] = bplus_corolla(labels[d], detail::multiseries_component(F[d], X, n));
    for (int d = 0; d < 3; ++d) X[d].push_back(std::move(next[d]));
  }
  SystemSolution sol{mode, N, {}};
  for (int d = 0; d < 3; ++d)
    for (auto& c : X[d]) sol.x[d].push_back(c.as_mode(mode));
  return sol;
}

inline DegreeCheck verify_dse_system(const SystemSolution& sol, const std::array<MultiSeries, 3>& F, int N) {
  const Label labels[3] = {Label::b, Label::c, Label::r};
  std::array<std::vector<AlgebraElement>, 3> X;
  for (int d = 0; d < 3; ++d)
    for (const auto& c : sol.x[d]) X[d].push_back(c.as_mode(Mode::nc));
  for (int n = 0; n < N; ++n)
    for (int d = 0; d < 3; ++d) {
      const AlgebraElement rhs = bplus_corolla(labels[d], detail::multiseries_component(F[d], X, n)).as_mode(sol.mode);
      if (!(rhs == sol.x[d].at(n + 1)))
        return {false, N, n + 1, std::string("component X_") + "bcr"[d] + " fails the substitution"};
    }
  return {true, N, 0, ""};
}

// ---------------------------------------------------------------------------
// Foissy's criterion

struct FoissyPair {
  Rational alpha;
  Rational beta;
};

/// (alpha, beta) with (1 - alpha beta t) P' = alpha P, checked through the
/// coefficient of t^(depth-1); nullopt if no such pair exists.
inline std::optional<FoissyPair> foissy_series_check(const FormalSeries& P, int depth) {
  if (depth < 3) throw std::invalid_argument("foissy_series_check: depth must be >= 3");
  const Rational alpha = P[1];
  Rational beta = 0;
  if (alpha.is_zero()) {
    for (int k = 1; k <= depth; ++k)
      if (!P[k].is_zero()) return std::nullopt;
    return FoissyPair{0, 0};
  }
  beta = (2 * P[2] - alpha * P[1]) / (alpha * P[1]);
  for (int k = 0; k < depth; ++k)
    if ((k + 1) * P[k + 1] != alpha * P[k] + k * alpha * beta * P[k]) return std::nullopt;
  return FoissyPair{alpha, beta};
}

// ---------------------------------------------------------------------------
// Subalgebra and ideal checks

namespace detail {

/// Spanning set of the degree-d part of the algebra generated by comps[1..].
inline std::vector<AlgebraElement> generated_degree(const std::vector<AlgebraElement>& comps, int d, Mode mode) {
  std::vector<AlgebraElement> out;
  std::vector<int> parts;
  auto rec = [&](auto&& self, int left, int floor) -> void {
    if (left == 0) {
      AlgebraElement p = unit(mode);
      for (int j : parts) p = p * comps[j];
      if (!p.is_zero()) out.push_back(std::move(p));
      return;
    }
    // in commutative mode multisets suffice
    for (int j = mode == Mode::comm ? floor : 1; j <= left && j < static_cast<int>(comps.size()); ++j) {
      parts.push_back(j);
      self(self, left - j, j);
      parts.pop_back();
    }
  };
  rec(rec, d, 1);
  return out;
}

inline std::vector<AlgebraElement> echelon_basis(const std::vector<AlgebraElement>& span) {
  SparseEliminator<Forest> elim(span.size());
  std::vector<AlgebraElement> out;
  for (std::size_t i = 0; i < span.size(); ++i)
    if (elim.add(span[i].terms(), i)) out.push_back(span[i]);
  return out;
}

}  // namespace detail

/// Whether Delta(x_n) lies in A (x) A for every n <= N, where A is the
/// algebra generated by the components. The verdict holds through degree N.
inline DegreeCheck subalgebra_closure_check(const GradedSolution& sol, int N) {
  const Mode mode = sol.mode;
  std::vector<AlgebraElement> comps(sol.x.begin(), sol.x.end());
  comps[0] = AlgebraElement(mode);
  std::vector<std::vector<AlgebraElement>> basis(N + 1);
  basis[0] = {unit(mode)};
  for (int d = 1; d <= N; ++d) basis[d] = detail::echelon_basis(detail::generated_degree(comps, d, mode));
  Hopf hopf(mode);
  for (int n = 1; n <= N; ++n) {
    const TensorElement d = hopf.coproduct(sol.x.at(n));
    for (int p = 0; p <= n; ++p) {
      const TensorElement part = [&] {
        TensorElement t(mode);
        for (const auto& [k, c] : d.terms())
          if (k.first.degree() == p) t.add_canonical(k, c);
        return t;
      }();
      if (part.is_zero()) continue;
      SparseEliminator<ForestPair> elim;
      std::size_t idx = 0;
      for (const auto& a : basis[p])
        for (const auto& b : basis[n - p]) elim.add(tensor(a, b).terms(), idx++);
      if (!elim.contains(part.terms()))
        return {false, N, n,
                "Delta(x_" + std::to_string(n) + ") has a bidegree (" + std::to_string(p) + "," +
                    std::to_string(n - p) + ") part outside A (x) A"};
    }
  }
  return {true, N, 0, ""};
}

/// Delta(x_n) = sum_{k=0}^n (X^{k+1})_{n-k} (x) x_k for every n <= N.
inline DegreeCheck bk_coproduct_formula_check(const GradedSolution& sol, int N) {
  const Mode mode = sol.mode;
  std::vector<AlgebraElement> comps(sol.x.begin(), sol.x.end());
  auto pw = detail::graded_powers(comps, N + 1, N, mode);
  Hopf hopf(mode);
  for (int n = 0; n <= N; ++n) {
    TensorElement rhs(mode);
    for (int k = 0; k <= n; ++k) rhs += tensor(pw[k + 1][n - k], comps[k]);
    if (!(hopf.coproduct(comps[n]) == rhs))
      return {false, N, n, "Delta(x_" + std::to_string(n) + ") differs from sum_k Pi^n_k (x) x_k"};
  }
  return {true, N, 0, ""};
}

/// Whether the ideal generated by the homogeneous elements `gens` satisfies
/// Delta(I) in I (x) H + H (x) I, truncated at degree N. Elements h of the
/// ideal spanning set h * g run over forests of the labels that occur in gens.
inline DegreeCheck hopf_ideal_check(const std::vector<AlgebraElement>& gens, int N, Mode mode = Mode::comm) {
  std::set<Label> labels;
  std::vector<AlgebraElement> gs;
  for (const auto& g : gens) {
    if (g.is_zero()) continue;
    const AlgebraElement h = g.as_mode(mode);
    const int d = h.max_degree();
    if (!(h.component(d) == h)) throw std::invalid_argument("hopf_ideal_check: generators must be homogeneous");
    for (const auto& [f, c] : h.terms())
      for (const auto& t : f.trees()) {
        auto scan = [&](auto&& self, const PlanarTree& s) -> void {
          if (!s.is_flag()) labels.insert(s.label());
          for (const auto& ch : s.children()) self(self, ch);
        };
        scan(scan, t);
      }
    gs.push_back(h);
  }
  if (gs.empty()) return {true, N, 0, ""};
  bool flags = false;
  for (const auto& g : gs)
    for (const auto& [f, c] : g.terms())
      for (const auto& t : f.trees()) flags = flags || t.has_flags();
  TreeEnumerator gen(flags ? Shape::binary : Shape::vertex, {labels.begin(), labels.end()});
  // Degree-wise eliminators for I_d.
  std::vector<SparseEliminator<Forest>> ideal(N + 1);
  for (int d = 1; d <= N; ++d) {
    std::size_t idx = 0;
    for (const auto& g : gs) {
      const int k = g.max_degree();
      if (k > d) continue;
      std::vector<Forest> hs = k == d ? std::vector<Forest>{Forest{}} : gen.forests(d - k, mode);
      for (const auto& h : hs) {
        ideal[d].add((element(h, mode) * g).terms(), idx++);
        if (mode == Mode::nc) ideal[d].add((g * element(h, mode)).terms(), idx++);
      }
    }
  }
  auto nf = [&](const Forest& f) {
    AlgebraElement out(mode);
    if (f.degree() == 0 || f.degree() > N) return element(f, mode);
    for (const auto& [k, c] : ideal[f.degree()].residual({{f, Rational(1)}})) out.add_canonical(k, c);
    return out;
  };
  Hopf hopf(mode);
  for (const auto& g : gs) {
    if (g.max_degree() > N) continue;
    const TensorElement red = hopf.reduced_coproduct(g);
    const TensorElement projected = map_tensor(red, nf, nf);
    if (!projected.is_zero())
      return {false, N, g.max_degree(),
              "Delta(" + render(g) + ") leaves " + render(projected) + " outside I (x) H + H (x) I"};
  }
  return {true, N, 0, ""};
}

inline DegreeCheck hopf_ideal_check(const GradedSolution& sol, int N) {
  std::vector<AlgebraElement> gens;
  for (int n = 1; n <= N && n < static_cast<int>(sol.x.size()); ++n) gens.push_back(sol.x[n]);
  return hopf_ideal_check(gens, N, sol.mode);
}

}  // namespace flowhopf
