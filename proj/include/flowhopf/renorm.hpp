#pragma once

// Rota-Baxter target algebra, the halting-problem Feynman rules and BPHZ.
//
// Target model: polynomials in w^{-1} (w = 1 - z) with real coefficients.
// A convergent factor sum z^n/(1+nm)^2, m >= 1, is recorded by its value at
// z = 1; the divergent one (m = 0) is the geometric series 1/(1-z) = w^{-1}.
// T keeps the polar part, 1 - T the constant.

#include "flowhopf/algebra.hpp"
#include "flowhopf/flowchart.hpp"
#include "flowhopf/hopf.hpp"
#include "flowhopf/recfun.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace flowhopf {

class LaurentElement {
 public:
  LaurentElement() = default;
  LaurentElement(double finite) : finite_(finite) {}  // NOLINT: constants embed
  static LaurentElement pole(int order, double c = 1) {
    LaurentElement x;
    x.set_polar(order, c);
    return x;
  }

  const std::map<int, double>& polar() const { return polar_; }
  double finite() const { return finite_; }
  void set_finite(double v) { finite_ = v; }
  void set_polar(int order, double c) {
    if (order < 1) throw std::invalid_argument("pole order must be >= 1");
    if (c == 0)
      polar_.erase(order);
    else
      polar_[order] = c;
  }
  /// Highest pole order, 0 when finite.
  int polar_order() const { return polar_.empty() ? 0 : polar_.rbegin()->first; }
  bool is_finite() const { return polar_.empty(); }

  LaurentElement& operator+=(const LaurentElement& o) {
    finite_ += o.finite_;
    for (const auto& [k, c] : o.polar_) set_polar(k, coef(k) + c);
    return *this;
  }
  LaurentElement& operator-=(const LaurentElement& o) {
    finite_ -= o.finite_;
    for (const auto& [k, c] : o.polar_) set_polar(k, coef(k) - c);
    return *this;
  }
  friend LaurentElement operator+(LaurentElement a, const LaurentElement& b) { return a += b; }
  friend LaurentElement operator-(LaurentElement a, const LaurentElement& b) { return a -= b; }
  friend LaurentElement operator-(LaurentElement a) {
    a.finite_ = -a.finite_;
    for (auto& [k, c] : a.polar_) c = -c;
    return a;
  }
  friend LaurentElement operator*(const LaurentElement& a, const LaurentElement& b) {
    LaurentElement out(a.finite_ * b.finite_);
    for (const auto& [k, c] : a.polar_) out.set_polar(k, out.coef(k) + c * b.finite_);
    for (const auto& [k, c] : b.polar_) out.set_polar(k, out.coef(k) + c * a.finite_);
    for (const auto& [i, c] : a.polar_)
      for (const auto& [j, d] : b.polar_) out.set_polar(i + j, out.coef(i + j) + c * d);
    return out;
  }
  friend LaurentElement operator*(double s, LaurentElement a) {
    a.finite_ *= s;
    for (auto& [k, c] : a.polar_) c *= s;
    std::erase_if(a.polar_, [](const auto& kv) { return kv.second == 0; });
    return a;
  }
  LaurentElement& operator*=(const LaurentElement& o) { return *this = *this * o; }

  double coef(int order) const {
    auto it = polar_.find(order);
    return it == polar_.end() ? 0.0 : it->second;
  }

  /// Largest coefficient difference.
  friend double distance(const LaurentElement& a, const LaurentElement& b) {
    double d = std::abs(a.finite_ - b.finite_);
    for (const auto& [k, c] : a.polar_) d = std::max(d, std::abs(c - b.coef(k)));
    for (const auto& [k, c] : b.polar_) d = std::max(d, std::abs(c - a.coef(k)));
    return d;
  }

  std::string str() const {
    std::string out;
    char buf[64];
    auto term = [&](double c, const char* fmt, int k) {
      const char* sign = out.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
      std::snprintf(buf, sizeof buf, fmt, sign, std::abs(c), k);
      out += buf;
    };
    for (auto it = polar_.rbegin(); it != polar_.rend(); ++it) term(it->second, "%s%.12g w^-%d", it->first);
    if (finite_ != 0 || out.empty()) term(finite_, "%s%.12g", 0);
    return out;
  }

 private:
  std::map<int, double> polar_;
  double finite_ = 0;
};

inline LaurentElement scale(const LaurentElement& v, const Rational& c) { return to_double(c) * v; }

/// Rota-Baxter operator: projection onto the polar part.
inline LaurentElement rb_T(const LaurentElement& x) {
  LaurentElement out;
  for (const auto& [k, c] : x.polar()) out.set_polar(k, c);
  return out;
}
inline LaurentElement rb_one_minus_T(const LaurentElement& x) { return LaurentElement(x.finite()); }

/// Number of terms so that sum_{n>=N} 1/(1+nm)^2 <= 1/(m(1+m(N-1))) <= eps.
inline std::uint64_t phi_series_terms(std::uint64_t m, double eps) {
  if (m < 1) throw std::invalid_argument("phi_series_terms: m must be >= 1");
  if (!(eps > 0)) throw std::invalid_argument("phi_series_terms: eps must be positive");
  const double md = static_cast<double>(m);
  // 1 + m(N-1) >= 1/(m eps)
  const double need = (1.0 / (md * eps) - 1.0) / md + 1.0;
  return static_cast<std::uint64_t>(std::ceil(std::max(need, 1.0)));
}

/// sum_{n>=0} 1/(1+nm)^2 within eps, summed from the small end.
inline double phi_series_value(std::uint64_t m, double eps) {
  thread_local std::map<std::pair<std::uint64_t, double>, double> cache;
  if (auto it = cache.find({m, eps}); it != cache.end()) return it->second;
  const std::uint64_t N = phi_series_terms(m, eps);
  double s = 0;
  for (std::uint64_t n = N; n-- > 0;) {
    const double d = 1.0 + static_cast<double>(n) * static_cast<double>(m);
    s += 1.0 / (d * d);
  }
  cache.emplace(std::make_pair(m, eps), s);
  return s;
}

enum class RuleMode { flagged, vertex };

struct FeynmanRule {
  RuleMode mode = RuleMode::flagged;
  std::vector<Nat> k;  // prefix of k in N^infinity; later entries are 1
  std::uint64_t fuel = 100000;
  double eps = 1e-7;
  std::size_t sigma_cap = 729;

  std::vector<Nat> args(int n) const {
    std::vector<Nat> a(k.begin(), k.begin() + std::min<std::size_t>(k.size(), n));
    a.resize(n, 1);
    return a;
  }
};

class SigmaCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phi(k, f) = prod over outputs j of sum_n z^n/(1+n fbar_j(k))^2; the empty
/// function (nullopt) gives 1.
inline LaurentElement feynman_function(const std::optional<RecFun>& f, const FeynmanRule& rule) {
  if (!f) return LaurentElement(1.0);
  const Signature sig = f->signature();
  const std::vector<Nat> a = rule.args(sig.inputs);
  LaurentElement out(1.0);
  for (int j = 1; j <= sig.outputs; ++j) {
    const Nat m = fbar(sig.outputs == 1 ? *f : output_component(*f, j), a, rule.fuel);
    out *= m == 0 ? LaurentElement::pole(1) : LaurentElement(phi_series_value(m, rule.eps));
  }
  return out;
}

/// Feynman rule phi: H -> B with BPHZ; caches per instance.
class Renormalizer {
 public:
  explicit Renormalizer(FeynmanRule rule) : rule_(std::move(rule)), hopf_(Mode::comm) {}

  const FeynmanRule& rule() const { return rule_; }
  Hopf& hopf() { return hopf_; }

  /// Phi(k, f) memoized by the function text.
  LaurentElement function_value(const std::optional<RecFun>& f) {
    const std::string key = f ? f->str() : std::string("empty");
    if (auto it = fvals_.find(key); it != fvals_.end()) return it->second;
    LaurentElement v = feynman_function(f, rule_);
    fvals_.emplace(key, v);
    return v;
  }

  /// Number of input assignments sigma in vertex mode.
  std::size_t sigma_count(const PlanarTree& t) const {
    const int flags = free_flag_count(pad_with_flags(t));
    std::size_t n = 1;
    for (int i = 0; i < flags; ++i) {
      n *= basic_inputs(1).size();
      if (n > rule_.sigma_cap) return n;
    }
    return n;
  }

  LaurentElement phi(const PlanarTree& t) {
    if (auto it = phi_.find(t); it != phi_.end()) return it->second;
    LaurentElement v = rule_.mode == RuleMode::flagged ? phi_flagged(t) : phi_vertex(t);
    phi_.emplace(t, v);
    return v;
  }
  LaurentElement phi(const Forest& f) {
    LaurentElement v(1.0);
    for (const auto& t : f.trees()) v *= phi(t);
    return v;
  }
  LaurentElement phi(const AlgebraElement& x) {
    LaurentElement v;
    for (const auto& [f, c] : x.terms()) v += scale(phi(f), c);
    return v;
  }

  /// phi(x) + sum phi_-(x') phi(x'') over the reduced coproduct of a tree.
  LaurentElement prepared(const PlanarTree& t) {
    LaurentElement bar = phi(t);
    for (const Cut& c : hopf_.admissible_cuts(t)) bar += phi_minus(c.pruned) * phi(c.trunk);
    return bar;
  }

  LaurentElement phi_minus(const PlanarTree& t) {
    if (auto it = minus_.find(t); it != minus_.end()) return it->second;
    LaurentElement v = -rb_T(prepared(t));
    minus_.emplace(t, v);
    return v;
  }
  LaurentElement phi_minus(const Forest& f) {
    LaurentElement v(1.0);
    for (const auto& t : f.trees()) v *= phi_minus(t);
    return v;
  }
  LaurentElement phi_minus(const AlgebraElement& x) {
    LaurentElement v;
    for (const auto& [f, c] : x.terms()) v += scale(phi_minus(f), c);
    return v;
  }

  LaurentElement phi_plus(const PlanarTree& t) { return rb_one_minus_T(prepared(t)); }
  LaurentElement phi_plus(const Forest& f) {
    LaurentElement v(1.0);
    for (const auto& t : f.trees()) v *= phi_plus(t);
    return v;
  }
  LaurentElement phi_plus(const AlgebraElement& x) {
    LaurentElement v;
    for (const auto& [f, c] : x.terms()) v += scale(phi_plus(f), c);
    return v;
  }

  /// The preparation formula applied directly to a forest (not through
  /// multiplicativity): returns (phi_-, phi_+).
  std::pair<LaurentElement, LaurentElement> bphz_direct(const Forest& f) {
    const Forest key = canonicalize(f, Mode::comm);
    if (key.empty()) return {LaurentElement(1.0), LaurentElement(1.0)};
    LaurentElement bar = phi(key);
    for (const auto& [p, c] : hopf_.reduced_coproduct(key).terms())
      bar += scale(bphz_direct(p.first).first * phi(p.second), c);
    return {-rb_T(bar), rb_one_minus_T(bar)};
  }

  /// (phi_- o S) * phi_+ evaluated on x; equals phi(x) when BPHZ is consistent.
  LaurentElement factorization_value(const AlgebraElement& x) {
    Functional<LaurentElement> minus = [this](const Forest& f) { return phi_minus(f); };
    Functional<LaurentElement> plus = [this](const Forest& f) { return phi_plus(f); };
    return convolution<LaurentElement>(compose_antipode<LaurentElement>(minus, hopf_, LaurentElement()), plus,
                                       x.as_mode(Mode::comm), hopf_, LaurentElement());
  }

  struct PhiSumC {
    LaurentElement coproduct_form;  // -T(phi(t) + sum_C phi_-(pi_C) phi(rho_C))
    LaurentElement factored_form;   // -T(phi(t) (1 + sum_C phi_-(pi_C)))
    double difference() const { return distance(coproduct_form, factored_form); }
  };

  PhiSumC phisumc(const PlanarTree& t) {
    LaurentElement sum_minus;
    for (const Cut& c : hopf_.admissible_cuts(t)) sum_minus += phi_minus(c.pruned);
    return {phi_minus(t), -rb_T(phi(t) * (LaurentElement(1.0) + sum_minus))};
  }

 private:
  LaurentElement phi_flagged(const PlanarTree& t) {
    AdmissibleResult r = admissible_check(t);
    return function_value(r ? std::optional<RecFun>(r.function()) : std::nullopt);
  }

  LaurentElement phi_vertex(const PlanarTree& t) {
    const PlanarTree padded = pad_with_flags(t);
    const int flags = free_flag_count(padded);
    const std::size_t count = sigma_count(t);
    if (count > rule_.sigma_cap)
      throw SigmaCapExceeded("tree " + render(t) + " has " + std::to_string(flags) + " inputs, more than " +
                             std::to_string(rule_.sigma_cap) + " input assignments (cap)");
    const std::vector<RecFun> basics = basic_inputs(1);
    std::vector<std::size_t> idx(flags, 0);
    std::vector<RecFun> sigma(flags, basics[0]);
    LaurentElement v(1.0);
    while (true) {
      for (int i = 0; i < flags; ++i) sigma[i] = basics[idx[i]];
      AdmissibleResult r = admissible_check(assign_inputs(padded, sigma));
      v *= function_value(r ? std::optional<RecFun>(r.function()) : std::nullopt);
      int i = flags - 1;
      while (i >= 0 && ++idx[i] == basics.size()) idx[i--] = 0;
      if (i < 0) break;
    }
    return v;
  }

  FeynmanRule rule_;
  Hopf hopf_;
  std::unordered_map<std::string, LaurentElement> fvals_;
  std::unordered_map<PlanarTree, LaurentElement, TreeHash> phi_, minus_;
};

}  // namespace flowhopf
