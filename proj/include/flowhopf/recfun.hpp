#pragma once

// Partial recursive functions: abstract syntax, arity signatures, the text DSL
// and fuel-bounded big-step evaluation.

#include "flowhopf/text.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace flowhopf {

using Nat = std::uint64_t;

struct Signature {
  int inputs = 0;
  int outputs = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Arity mismatch while building an expression; the message names the node.
class SignatureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RecKind { successor, constant, projection, compose, bracket, primrec, krec, mu, empty };

class RecFun {
 public:
  static RecFun successor() { return make(RecKind::successor, {}, 0, 0, {1, 1}); }

  /// c^n : N^n -> N, constantly 1.
  static RecFun constant(int n) {
    if (n < 0) throw SignatureError("C[" + std::to_string(n) + "]: arity must be >= 0");
    return make(RecKind::constant, {}, n, 0, {n, 1});
  }

  /// pi_i^n, 1 <= i <= n.
  static RecFun projection(int i, int n) {
    if (n < 1 || i < 1 || i > n)
      throw SignatureError("P[" + std::to_string(i) + "," + std::to_string(n) +
                           "]: need 1 <= i <= n");
    return make(RecKind::projection, {}, i, n, {n, 1});
  }

  /// comp(f1;...;fk) = fk o ... o f1 (f1 applied first).
  static RecFun compose(std::vector<RecFun> stages) {
    if (stages.size() < 2) throw SignatureError("comp: needs at least two functions");
    for (std::size_t i = 1; i < stages.size(); ++i) {
      if (stages[i].signature().inputs != stages[i - 1].signature().outputs)
        throw SignatureError("comp: stage " + std::to_string(i + 1) + " (" + stages[i].str() +
                             ") expects " + std::to_string(stages[i].signature().inputs) +
                             " inputs but stage " + std::to_string(i) + " produces " +
                             std::to_string(stages[i - 1].signature().outputs));
    }
    Signature sig{stages.front().signature().inputs, stages.back().signature().outputs};
    return make(RecKind::compose, std::move(stages), 0, 0, sig);
  }
  static RecFun compose(RecFun first, RecFun second) {
    return compose(std::vector<RecFun>{std::move(first), std::move(second)});
  }

  /// br(f1,...,fk) : N^m -> N^(n1+...+nk), all fi sharing the domain N^m.
  static RecFun bracket(std::vector<RecFun> parts) {
    if (parts.empty()) throw SignatureError("br: needs at least one function");
    const int m = parts.front().signature().inputs;
    int outs = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].signature().inputs != m)
        throw SignatureError("br: component " + std::to_string(i + 1) + " (" + parts[i].str() +
                             ") has domain arity " +
                             std::to_string(parts[i].signature().inputs) + ", expected " +
                             std::to_string(m));
      outs += parts[i].signature().outputs;
    }
    return make(RecKind::bracket, std::move(parts), 0, 0, {m, outs});
  }

  /// rec(f;g): h(x,1) = f(x), h(x,k+1) = g(x,k,h(x,k)).
  static RecFun primrec(RecFun base, RecFun step) {
    const Signature fb = base.signature(), gs = step.signature();
    if (fb.outputs != 1) throw SignatureError("rec: base function " + base.str() + " must have one output");
    if (gs.outputs != 1) throw SignatureError("rec: step function " + step.str() + " must have one output");
    if (gs.inputs != fb.inputs + 2)
      throw SignatureError("rec: step function " + step.str() + " must have arity " +
                           std::to_string(fb.inputs + 2) + " (n+2), got " +
                           std::to_string(gs.inputs));
    return make(RecKind::primrec, {std::move(base), std::move(step)}, 0, 0, {fb.inputs + 1, 1});
  }

  /// krec(f1,...,fk;g): order-k recursion with k initial conditions,
  ///   h(x,i)   = fi(x)                                   for i = 1..k
  ///   h(x,k+l) = g(x, k+l-1, h(x,l), ..., h(x,l+k-1))     for l >= 1
  /// so g : N^(n+k+1) -> N. For k = 1 this is exactly rec(f1;g).
  static RecFun krec(std::vector<RecFun> bases, RecFun step) {
    if (bases.empty()) throw SignatureError("krec: needs k >= 1 initial functions");
    const int n = bases.front().signature().inputs;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      const Signature s = bases[i].signature();
      if (s.inputs != n || s.outputs != 1)
        throw SignatureError("krec: initial function " + std::to_string(i + 1) + " (" +
                             bases[i].str() + ") must be N^" + std::to_string(n) + " -> N");
    }
    const int k = static_cast<int>(bases.size());
    const Signature gs = step.signature();
    if (gs.outputs != 1 || gs.inputs != n + k + 1)
      throw SignatureError("krec: step function " + step.str() + " must be N^" +
                           std::to_string(n + k + 1) + " -> N");
    bases.push_back(std::move(step));
    return make(RecKind::krec, std::move(bases), k, 0, {n + 1, 1});
  }

  /// mu(f): h(x) = min { y >= 1 | f(x,y) = 1 }, every probe required to halt.
  static RecFun mu(RecFun f) {
    const Signature s = f.signature();
    if (s.outputs != 1 || s.inputs < 1)
      throw SignatureError("mu: argument " + f.str() + " must be N^(n+1) -> N");
    return make(RecKind::mu, {std::move(f)}, 0, 0, {s.inputs - 1, 1});
  }

  /// The nowhere-defined function N^m -> N^n.
  static RecFun empty(int m, int n) {
    if (m < 0 || n < 1) throw SignatureError("empty: need m >= 0 and n >= 1");
    return make(RecKind::empty, {}, m, n, {m, n});
  }

  RecKind kind() const { return node_->kind; }
  Signature signature() const { return node_->sig; }
  std::span<const RecFun> parts() const { return node_->parts; }
  /// Constant arity, projection index, krec order, or empty domain arity.
  int first_index() const { return node_->i; }
  int second_index() const { return node_->j; }

  const std::string& str() const { return node_->text; }

  friend bool operator==(const RecFun& a, const RecFun& b) {
    return a.node_ == b.node_ || a.node_->text == b.node_->text;
  }
  friend std::strong_ordering operator<=>(const RecFun& a, const RecFun& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    return a.node_->text.compare(b.node_->text) <=> 0;
  }

 private:
  struct Node {
    RecKind kind;
    std::vector<RecFun> parts;
    int i = 0;
    int j = 0;
    Signature sig;
    std::string text;
  };

  explicit RecFun(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static RecFun make(RecKind kind, std::vector<RecFun> parts, int i, int j, Signature sig) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->parts = std::move(parts);
    node->i = i;
    node->j = j;
    node->sig = sig;
    node->text = render(*node);
    return RecFun(std::move(node));
  }

  static std::string join(std::span<const RecFun> xs, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += sep;
      out += xs[i].str();
    }
    return out;
  }

  static std::string render(const Node& n) {
    switch (n.kind) {
      case RecKind::successor: return "S";
      case RecKind::constant: return "C[" + std::to_string(n.i) + "]";
      case RecKind::projection: return "P[" + std::to_string(n.i) + "," + std::to_string(n.j) + "]";
      case RecKind::compose: return "comp(" + join(n.parts, ";") + ")";
      case RecKind::bracket: return "br(" + join(n.parts, ",") + ")";
      case RecKind::primrec: return "rec(" + n.parts[0].str() + ";" + n.parts[1].str() + ")";
      case RecKind::krec: {
        std::span<const RecFun> all(n.parts);
        return "krec(" + join(all.first(all.size() - 1), ",") + ";" + all.back().str() + ")";
      }
      case RecKind::mu: return "mu(" + n.parts[0].str() + ")";
      case RecKind::empty: return "empty[" + std::to_string(n.i) + "," + std::to_string(n.j) + "]";
    }
    return "?";
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Evaluation

struct Halted {
  std::vector<Nat> values;
  friend bool operator==(const Halted&, const Halted&) = default;
};
struct OutOfFuel {
  std::uint64_t consumed = 0;
  friend bool operator==(const OutOfFuel&, const OutOfFuel&) = default;
};

class EvalResult {
 public:
  EvalResult(Halted h, std::uint64_t consumed) : value_(std::move(h)), consumed_(consumed) {}
  explicit EvalResult(OutOfFuel o) : value_(o), consumed_(o.consumed) {}

  bool halted() const { return std::holds_alternative<Halted>(value_); }
  const std::vector<Nat>& values() const { return std::get<Halted>(value_).values; }
  std::uint64_t consumed() const { return consumed_; }

  std::string str() const {
    if (!halted()) return "OutOfFuel(" + std::to_string(consumed_) + ")";
    std::string out = "Halted(";
    for (std::size_t i = 0; i < values().size(); ++i) {
      if (i) out += ",";
      out += std::to_string(values()[i]);
    }
    return out + ")";
  }

 private:
  std::variant<Halted, OutOfFuel> value_;
  std::uint64_t consumed_;
};

namespace detail {

class Evaluator {
 public:
  explicit Evaluator(std::uint64_t fuel) : left_(fuel) {}
  std::uint64_t consumed() const { return used_; }

  std::optional<std::vector<Nat>> run(const RecFun& f, std::span<const Nat> x) {
    if (!tick()) return std::nullopt;
    switch (f.kind()) {
      case RecKind::successor:
        if (x[0] == std::numeric_limits<Nat>::max()) throw std::overflow_error("successor overflow");
        return std::vector<Nat>{x[0] + 1};
      case RecKind::constant: return std::vector<Nat>{1};
      case RecKind::projection: return std::vector<Nat>{x[f.first_index() - 1]};
      case RecKind::compose: {
        std::vector<Nat> v(x.begin(), x.end());
        for (const RecFun& stage : f.parts()) {
          auto next = run(stage, v);
          if (!next) return std::nullopt;
          v = std::move(*next);
        }
        return v;
      }
      case RecKind::bracket: {
        std::vector<Nat> out;
        for (const RecFun& part : f.parts()) {
          auto r = run(part, x);
          if (!r) return std::nullopt;
          out.insert(out.end(), r->begin(), r->end());
        }
        return out;
      }
      case RecKind::primrec: return run_primrec(f, x);
      case RecKind::krec: return run_krec(f, x);
      case RecKind::mu: return run_mu(f, x);
      case RecKind::empty:
        used_ += left_;
        left_ = 0;
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  bool tick() {
    if (left_ == 0) return false;
    --left_;
    ++used_;
    return true;
  }

  std::optional<std::vector<Nat>> run_primrec(const RecFun& f, std::span<const Nat> x) {
    const RecFun& base = f.parts()[0];
    const RecFun& step = f.parts()[1];
    const std::size_t n = x.size() - 1;
    const Nat y = x[n];
    std::span<const Nat> head = x.first(n);
    auto h = run(base, head);
    if (!h) return std::nullopt;
    std::vector<Nat> args(head.begin(), head.end());
    args.resize(n + 2);
    for (Nat k = 1; k < y; ++k) {
      args[n] = k;
      args[n + 1] = (*h)[0];
      h = run(step, args);
      if (!h) return std::nullopt;
    }
    return h;
  }

  std::optional<std::vector<Nat>> run_krec(const RecFun& f, std::span<const Nat> x) {
    const auto k = static_cast<std::size_t>(f.first_index());
    const std::size_t n = x.size() - 1;
    const Nat y = x[n];
    std::span<const Nat> head = x.first(n);
    if (y <= k) {
      auto v = run(f.parts()[y - 1], head);
      return v;
    }
    std::vector<Nat> window;
    for (std::size_t i = 0; i < k; ++i) {
      auto v = run(f.parts()[i], head);
      if (!v) return std::nullopt;
      window.push_back((*v)[0]);
    }
    const RecFun& step = f.parts()[k];
    std::vector<Nat> args(head.begin(), head.end());
    args.resize(n + 1 + k);
    for (Nat target = k + 1; target <= y; ++target) {
      args[n] = target - 1;
      std::copy(window.begin(), window.end(), args.begin() + static_cast<std::ptrdiff_t>(n + 1));
      auto v = run(step, args);
      if (!v) return std::nullopt;
      window.erase(window.begin());
      window.push_back((*v)[0]);
    }
    return std::vector<Nat>{window.back()};
  }

  std::optional<std::vector<Nat>> run_mu(const RecFun& f, std::span<const Nat> x) {
    std::vector<Nat> args(x.begin(), x.end());
    args.push_back(0);
    for (Nat y = 1;; ++y) {
      if (!tick()) return std::nullopt;
      args.back() = y;
      auto v = run(f.parts()[0], args);
      if (!v) return std::nullopt;
      if ((*v)[0] == 1) return std::vector<Nat>{y};
    }
  }

  std::uint64_t left_;
  std::uint64_t used_ = 0;
};

}  // namespace detail

/// Big-step evaluation with an explicit step budget: one unit per node visit
/// plus one per minimisation probe. Arguments are naturals >= 1.
inline EvalResult evaluate(const RecFun& f, std::span<const Nat> args, std::uint64_t fuel) {
  if (static_cast<int>(args.size()) != f.signature().inputs)
    throw std::invalid_argument("evaluate: " + f.str() + " expects " +
                                std::to_string(f.signature().inputs) + " arguments, got " +
                                std::to_string(args.size()));
  for (Nat a : args)
    if (a == 0) throw std::invalid_argument("evaluate: arguments are naturals >= 1");
  detail::Evaluator ev(fuel);
  auto out = ev.run(f, args);
  if (!out) return EvalResult(OutOfFuel{ev.consumed()});
  return EvalResult(Halted{std::move(*out)}, ev.consumed());
}

/// Totalisation: the value where evaluation halts within the budget, 0 otherwise.
inline Nat fbar(const RecFun& f, std::span<const Nat> args, std::uint64_t fuel) {
  if (f.signature().outputs != 1) throw std::invalid_argument("fbar: needs a single output");
  EvalResult r = evaluate(f, args, fuel);
  return r.halted() ? r.values()[0] : 0;
}

/// The j-th output (1-based) of f as a single-output function.
inline RecFun output_component(const RecFun& f, int j) {
  const Signature s = f.signature();
  if (j < 1 || j > s.outputs) throw std::out_of_range("output_component: index out of range");
  if (s.outputs == 1) return f;
  if (f.kind() == RecKind::bracket) {
    for (const RecFun& part : f.parts()) {
      const int w = part.signature().outputs;
      if (j <= w) return output_component(part, j);
      j -= w;
    }
  }
  return RecFun::compose(f, RecFun::projection(j, s.outputs));
}

// ---------------------------------------------------------------------------
// DSL: S, C[n], P[i,n], comp(f;g;...), br(f,...), rec(f;g), krec(f,...;g),
// mu(f), empty[m,n]

namespace detail {

inline RecFun parse_recfun(Cursor& in) {
  in.skip_ws();
  const std::size_t start = in.pos;
  const std::string word = in.identifier();
  auto guarded = [&](auto&& build) -> RecFun {
    try {
      return build();
    } catch (const SignatureError& e) {
      throw ParseError(start, e.what());
    }
  };
  auto list = [&](char sep) {
    std::vector<RecFun> xs;
    xs.push_back(parse_recfun(in));
    while (in.consume(sep)) xs.push_back(parse_recfun(in));
    return xs;
  };
  if (word == "S") return RecFun::successor();
  if (word == "C") {
    in.expect('[');
    const auto n = static_cast<int>(in.integer());
    in.expect(']');
    return guarded([&] { return RecFun::constant(n); });
  }
  if (word == "P") {
    in.expect('[');
    const auto i = static_cast<int>(in.integer());
    in.expect(',');
    const auto n = static_cast<int>(in.integer());
    in.expect(']');
    return guarded([&] { return RecFun::projection(i, n); });
  }
  if (word == "empty") {
    in.expect('[');
    const auto m = static_cast<int>(in.integer());
    in.expect(',');
    const auto n = static_cast<int>(in.integer());
    in.expect(']');
    return guarded([&] { return RecFun::empty(m, n); });
  }
  if (word == "comp") {
    in.expect('(');
    auto xs = list(';');
    in.expect(')');
    return guarded([&] { return RecFun::compose(std::move(xs)); });
  }
  if (word == "br") {
    in.expect('(');
    auto xs = list(',');
    in.expect(')');
    return guarded([&] { return RecFun::bracket(std::move(xs)); });
  }
  if (word == "rec") {
    in.expect('(');
    RecFun f = parse_recfun(in);
    in.expect(';');
    RecFun g = parse_recfun(in);
    in.expect(')');
    return guarded([&] { return RecFun::primrec(f, g); });
  }
  if (word == "krec") {
    in.expect('(');
    auto fs = list(',');
    in.expect(';');
    RecFun g = parse_recfun(in);
    in.expect(')');
    return guarded([&] { return RecFun::krec(std::move(fs), g); });
  }
  if (word == "mu") {
    in.expect('(');
    RecFun f = parse_recfun(in);
    in.expect(')');
    return guarded([&] { return RecFun::mu(f); });
  }
  throw ParseError(start, "unknown function '" + word + "'");
}

}  // namespace detail

inline RecFun parse_recfun(std::string_view text) {
  detail::Cursor in{text};
  RecFun f = detail::parse_recfun(in);
  if (!in.at_end()) in.fail("trailing input");
  return f;
}

}  // namespace flowhopf
