#pragma once

// The properad of flow charts on planar connected directed acyclic graphs and
// the properadic Dyson-Schwinger equation X = beta(P(X)).

#include "flowhopf/dse.hpp"
#include "flowhopf/operad.hpp"
#include "flowhopf/text.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowhopf {

/// Where a wire comes from: output `port` of vertex `vertex`, or graph input
/// `port` when vertex == -1. Ports are 0-based.
struct DagSource {
  int vertex = -1;
  int port = 0;
  bool is_input() const { return vertex < 0; }
  friend auto operator<=>(const DagSource&, const DagSource&) = default;
};

struct DagVertex {
  std::string label;  // b, c, r, m or a macro name
  int in = 0;
  int out = 1;
  std::vector<DagSource> sources;  // one per input port
  friend auto operator<=>(const DagVertex&, const DagVertex&) = default;
};

class DisconnectedDag : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool is_elementary_label(const std::string& s) { return s.size() == 1 && label_from_char(s[0]).has_value(); }

/// A planar connected acyclic graph with ordered input and output flags, kept
/// in a canonical vertex numbering so that structural equality is ==.
class FlowDag {
 public:
  /// The bare edge, identity of P(1,1).
  FlowDag() : m_(1), n_(1), outputs_{DagSource{-1, 0}} {}

  FlowDag(int m, int n, std::vector<DagVertex> vertices, std::vector<DagSource> outputs)
      : m_(m), n_(n), vertices_(std::move(vertices)), outputs_(std::move(outputs)) {
    canonicalize();
  }

  static FlowDag edge() { return FlowDag(); }

  /// A single vertex with its inputs and outputs as the graph flags.
  static FlowDag corolla(const std::string& label, int in, int out) {
    DagVertex v{label, in, out, {}};
    for (int p = 0; p < in; ++p) v.sources.push_back({-1, p});
    std::vector<DagSource> outs;
    for (int q = 0; q < out; ++q) outs.push_back({0, q});
    return FlowDag(in, out, {v}, outs);
  }

  int inputs() const { return m_; }
  int outputs() const { return n_; }
  const std::vector<DagVertex>& vertices() const { return vertices_; }
  const std::vector<DagSource>& output_sources() const { return outputs_; }
  int degree() const { return static_cast<int>(vertices_.size()); }
  bool is_edge() const { return vertices_.empty(); }

  friend bool operator==(const FlowDag& a, const FlowDag& b) {
    return a.m_ == b.m_ && a.n_ == b.n_ && a.vertices_ == b.vertices_ && a.outputs_ == b.outputs_;
  }
  friend std::strong_ordering operator<=>(const FlowDag& a, const FlowDag& b) {
    if (auto c = a.vertices_.size() <=> b.vertices_.size(); c != 0) return c;
    if (auto c = a.m_ <=> b.m_; c != 0) return c;
    if (auto c = a.n_ <=> b.n_; c != 0) return c;
    if (auto c = a.vertices_ <=> b.vertices_; c != 0) return c;
    return a.outputs_ <=> b.outputs_;
  }

 private:
  void canonicalize() {
    const int nv = static_cast<int>(vertices_.size());
    if (m_ < 0 || n_ < 0) throw std::invalid_argument("negative flag count");
    if (static_cast<int>(outputs_.size()) != n_) throw std::invalid_argument("output flag count mismatch");
    if (nv == 0) {
      if (m_ != 1 || n_ != 1 || !outputs_[0].is_input()) throw DisconnectedDag("a graph without vertices must be the edge");
      return;
    }
    // Every vertex output port and graph input is consumed exactly once.
    std::vector<std::vector<int>> used(nv);
    std::vector<int> used_in(m_, 0);
    // consumer[v][q]: (vertex, port) or (-1, output flag)
    std::vector<std::vector<std::pair<int, int>>> consumer(nv);
    std::vector<int> input_consumer_vertex(m_, -2), input_consumer_port(m_, -1);
    for (int v = 0; v < nv; ++v) {
      const auto& d = vertices_[v];
      if (d.in < 0 || d.out < 1) throw std::invalid_argument("vertex '" + d.label + "' needs out-arity >= 1");
      if (is_elementary_label(d.label) && d.out != 1)
        throw std::invalid_argument("elementary vertex '" + d.label + "' has one output");
      if (static_cast<int>(d.sources.size()) != d.in)
        throw std::invalid_argument("vertex '" + d.label + "' has the wrong number of input wires");
      used[v].assign(d.out, 0);
      consumer[v].assign(d.out, {-2, -1});
    }
    auto claim = [&](const DagSource& s, int cv, int cp) {
      if (s.is_input()) {
        if (s.port < 0 || s.port >= m_) throw std::invalid_argument("graph input out of range");
        if (used_in[s.port]++) throw std::invalid_argument("graph input used twice");
        input_consumer_vertex[s.port] = cv;
        input_consumer_port[s.port] = cp;
      } else {
        if (s.vertex >= nv || s.port < 0 || s.port >= vertices_[s.vertex].out)
          throw std::invalid_argument("wire source out of range");
        if (used[s.vertex][s.port]++) throw std::invalid_argument("vertex output used twice");
        consumer[s.vertex][s.port] = {cv, cp};
      }
    };
    for (int v = 0; v < nv; ++v)
      for (int p = 0; p < vertices_[v].in; ++p) claim(vertices_[v].sources[p], v, p);
    for (int q = 0; q < n_; ++q) claim(outputs_[q], -1, q);
    for (int i = 0; i < m_; ++i)
      if (!used_in[i]) throw std::invalid_argument("graph input " + std::to_string(i + 1) + " is dangling");
    for (int v = 0; v < nv; ++v)
      for (int q = 0; q < vertices_[v].out; ++q)
        if (!used[v][q]) throw std::invalid_argument("vertex output is dangling");
    for (int q = 0; q < n_; ++q)
      if (outputs_[q].is_input()) throw DisconnectedDag("a pass-through wire makes the graph disconnected");

    // Acyclicity.
    {
      std::vector<int> indeg(nv, 0);
      for (int v = 0; v < nv; ++v)
        for (const auto& s : vertices_[v].sources)
          if (!s.is_input()) ++indeg[v];
      std::vector<int> queue;
      for (int v = 0; v < nv; ++v)
        if (!indeg[v]) queue.push_back(v);
      for (std::size_t h = 0; h < queue.size(); ++h)
        for (const auto& [w, p] : consumer[queue[h]])
          if (w >= 0 && --indeg[w] == 0) queue.push_back(w);
      if (static_cast<int>(queue.size()) != nv) throw std::invalid_argument("graph has a directed cycle");
    }

    // Canonical numbering: depth-first from the first output flag (or the
    // first input flag), visiting input wires then output wires in port order.
    std::vector<int> id(nv, -1);
    std::vector<int> order;
    auto visit = [&](auto&& self, int v) -> void {
      if (v < 0 || id[v] >= 0) return;
      id[v] = static_cast<int>(order.size());
      order.push_back(v);
      for (const auto& s : vertices_[v].sources)
        if (!s.is_input()) self(self, s.vertex);
      for (const auto& [w, p] : consumer[v]) self(self, w);
    };
    if (n_ > 0)
      visit(visit, outputs_[0].vertex);
    else if (m_ > 0)
      visit(visit, input_consumer_vertex[0]);
    else
      visit(visit, 0);
    if (static_cast<int>(order.size()) != nv) throw DisconnectedDag("graph is disconnected");
    std::vector<DagVertex> vs;
    vs.reserve(nv);
    for (int v : order) {
      DagVertex d = vertices_[v];
      for (auto& s : d.sources)
        if (!s.is_input()) s.vertex = id[s.vertex];
      vs.push_back(std::move(d));
    }
    for (auto& s : outputs_)
      if (!s.is_input()) s.vertex = id[s.vertex];
    vertices_ = std::move(vs);
  }

  int m_, n_;
  std::vector<DagVertex> vertices_;
  std::vector<DagSource> outputs_;
};

namespace detail {
inline std::string source_text(const DagSource& s) {
  return s.is_input() ? "in" + std::to_string(s.port + 1)
                      : "v" + std::to_string(s.vertex + 1) + ".out" + std::to_string(s.port + 1);
}
}  // namespace detail

/// "v1: b(2->1); in1 -> v1.in1; in2 -> v1.in2; v1.out1 -> out1"
inline std::string render(const FlowDag& g) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += "; ";
  };
  for (std::size_t v = 0; v < g.vertices().size(); ++v) {
    const auto& d = g.vertices()[v];
    sep();
    out += "v" + std::to_string(v + 1) + ": " + d.label + "(" + std::to_string(d.in) + "->" + std::to_string(d.out) + ")";
  }
  for (std::size_t v = 0; v < g.vertices().size(); ++v)
    for (std::size_t p = 0; p < g.vertices()[v].sources.size(); ++p) {
      sep();
      out += detail::source_text(g.vertices()[v].sources[p]) + " -> v" + std::to_string(v + 1) + ".in" +
             std::to_string(p + 1);
    }
  for (std::size_t q = 0; q < g.output_sources().size(); ++q) {
    sep();
    out += detail::source_text(g.output_sources()[q]) + " -> out" + std::to_string(q + 1);
  }
  return out;
}

/// Parses the dag DSL. Statements are separated by ';' or newlines:
///   NAME: LABEL(IN->OUT)       vertex declaration
///   SRC -> DST                 wire
/// SRC is inK, in, NAME.outP; DST is NAME.inP, outK, out. A bare `in`/`out`
/// takes the next free flag number. "edge" alone is the identity of P(1,1).
inline FlowDag parse_flowdag(std::string_view text) {
  detail::Cursor in{text};
  in.skip_ws();
  if (text.find_first_not_of(" \t\n") != std::string_view::npos) {
    auto trimmed = text.substr(text.find_first_not_of(" \t\n"));
    trimmed = trimmed.substr(0, trimmed.find_last_not_of(" \t\n;") + 1);
    if (trimmed == "edge") return FlowDag::edge();
  }
  std::map<std::string, int> names;
  std::vector<DagVertex> vs;
  std::vector<std::vector<bool>> set;
  std::map<int, DagSource> outs;
  std::map<int, bool> ins;
  int next_in = 0, next_out = 0;
  struct Wire {
    std::size_t offset;
    std::string src, dst;
  };
  std::vector<Wire> wires;
  auto is_flag_name = [](const std::string& s, const char* base) {
    const std::string b(base);
    if (s.compare(0, b.size(), b) != 0) return false;
    return std::all_of(s.begin() + b.size(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
  };
  auto endpoint = [&]() {
    std::string s = in.identifier();
    if (in.consume('.')) s += "." + in.identifier();
    return s;
  };
  auto sep = [&] {
    while (true) {
      in.skip_ws();
      if (!in.consume(';') && !in.consume('\n')) break;
    }
  };
  sep();
  while (!in.at_end()) {
    const std::size_t start = in.pos;
    std::string a = endpoint();
    in.skip_ws();
    if (in.consume(':')) {
      in.skip_ws();
      if (is_flag_name(a, "in") || is_flag_name(a, "out") || a.find('.') != std::string::npos)
        throw ParseError(start, "reserved vertex name '" + a + "'");
      std::string label = in.identifier();
      in.expect('(');
      in.skip_ws();
      const int ni = static_cast<int>(in.integer());
      in.skip_ws();
      if (!in.consume("->")) in.fail("expected '->' in vertex arity");
      in.skip_ws();
      const int no = static_cast<int>(in.integer());
      in.skip_ws();
      in.expect(')');
      if (!names.emplace(a, static_cast<int>(vs.size())).second) throw ParseError(start, "duplicate vertex '" + a + "'");
      if (no < 1) throw ParseError(start, "vertex needs at least one output");
      if (is_elementary_label(label) && no != 1) throw ParseError(start, "elementary vertex has one output");
      vs.push_back(DagVertex{label, ni, no, std::vector<DagSource>(ni)});
      set.emplace_back(ni, false);
    } else {
      if (!in.consume("->")) in.fail("expected ':' or '->'");
      in.skip_ws();
      std::string b = endpoint();
      wires.push_back({start, a, b});
    }
    sep();
  }
  auto port_of = [&](const Wire& w, const std::string& e, const char* kind) -> std::pair<int, int> {
    const auto dot = e.find('.');
    if (dot == std::string::npos) throw ParseError(w.offset, "endpoint '" + e + "' needs a port");
    auto it = names.find(e.substr(0, dot));
    if (it == names.end()) throw ParseError(w.offset, "unknown vertex '" + e.substr(0, dot) + "'");
    const std::string port = e.substr(dot + 1);
    if (!is_flag_name(port, kind) || port.size() == std::string(kind).size())
      throw ParseError(w.offset, "expected ." + std::string(kind) + "N in '" + e + "'");
    return {it->second, std::stoi(port.substr(std::string(kind).size())) - 1};
  };
  for (const auto& w : wires) {
    DagSource src;
    if (is_flag_name(w.src, "in")) {
      const int k = w.src == "in" ? next_in++ : std::stoi(w.src.substr(2)) - 1;
      next_in = std::max(next_in, k + 1);
      if (ins[k]) throw ParseError(w.offset, "graph input " + std::to_string(k + 1) + " used twice");
      ins[k] = true;
      src = {-1, k};
    } else {
      auto [v, p] = port_of(w, w.src, "out");
      if (p < 0 || p >= vs[v].out) throw ParseError(w.offset, "output port out of range in '" + w.src + "'");
      src = {v, p};
    }
    if (is_flag_name(w.dst, "out")) {
      const int k = w.dst == "out" ? next_out++ : std::stoi(w.dst.substr(3)) - 1;
      next_out = std::max(next_out, k + 1);
      if (!outs.emplace(k, src).second) throw ParseError(w.offset, "graph output " + std::to_string(k + 1) + " set twice");
    } else {
      auto [v, p] = port_of(w, w.dst, "in");
      if (p < 0 || p >= vs[v].in) throw ParseError(w.offset, "input port out of range in '" + w.dst + "'");
      if (set[v][p]) throw ParseError(w.offset, "input port '" + w.dst + "' wired twice");
      set[v][p] = true;
      vs[v].sources[p] = src;
    }
  }
  for (std::size_t v = 0; v < vs.size(); ++v)
    for (std::size_t p = 0; p < set[v].size(); ++p)
      if (!set[v][p]) throw ParseError(text.size(), "input port " + std::to_string(p + 1) + " of a '" + vs[v].label + "' vertex is not wired");
  const int m = ins.empty() ? 0 : ins.rbegin()->first + 1;
  const int n = outs.empty() ? 0 : outs.rbegin()->first + 1;
  std::vector<DagSource> outputs;
  for (int q = 0; q < n; ++q) {
    auto it = outs.find(q);
    if (it == outs.end()) throw ParseError(text.size(), "graph output " + std::to_string(q + 1) + " missing");
    outputs.push_back(it->second);
  }
  try {
    return FlowDag(m, n, std::move(vs), std::move(outputs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

/// A planar tree with free input flags as a dag (elementary vertices, one output).
inline FlowDag to_flowdag(const PlanarTree& t) {
  if (t.is_flag()) return FlowDag::edge();
  std::vector<DagVertex> vs;
  int next_in = 0;
  auto build = [&](auto&& self, const PlanarTree& s) -> int {
    const int id = static_cast<int>(vs.size());
    vs.push_back(DagVertex{std::string(1, label_char(s.label())), static_cast<int>(s.arity()), 1, {}});
    std::vector<DagSource> src;
    for (const auto& ch : s.children()) {
      if (ch.is_flag()) {
        if (ch.flag_kind() != FlagKind::free) throw std::invalid_argument("to_flowdag: labeled flags are not inputs");
        src.push_back({-1, next_in++});
      } else {
        src.push_back({self(self, ch), 0});
      }
    }
    vs[id].sources = std::move(src);
    return id;
  };
  build(build, t);
  return FlowDag(next_in, 1, std::move(vs), {DagSource{0, 0}});
}

class ProperadElement {
 public:
  using Map = std::map<FlowDag, Rational>;

  ProperadElement(int m = 1, int n = 1) : m_(m), n_(n) {}
  ProperadElement(const FlowDag& g, Rational c = 1) : m_(g.inputs()), n_(g.outputs()) { add_term(g, c); }

  static ProperadElement identity(Rational c = 1) { return ProperadElement(FlowDag::edge(), std::move(c)); }

  int inputs() const { return m_; }
  int outputs() const { return n_; }
  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Rational coefficient(const FlowDag& g) const {
    auto it = terms_.find(g);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add_term(const FlowDag& g, const Rational& c) {
    if (g.inputs() != m_ || g.outputs() != n_)
      throw std::invalid_argument("properad term has bi-arity (" + std::to_string(g.inputs()) + "," +
                                  std::to_string(g.outputs()) + "), expected (" + std::to_string(m_) + "," +
                                  std::to_string(n_) + ")");
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(g, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }
  ProperadElement& operator+=(const ProperadElement& o) {
    check(o);
    for (const auto& [g, c] : o.terms_) add_term(g, c);
    return *this;
  }
  ProperadElement& operator-=(const ProperadElement& o) {
    check(o);
    for (const auto& [g, c] : o.terms_) add_term(g, -c);
    return *this;
  }
  ProperadElement& operator*=(const Rational& s) {
    if (s.is_zero()) terms_.clear();
    for (auto& [g, c] : terms_) c *= s;
    return *this;
  }
  friend ProperadElement operator+(ProperadElement a, const ProperadElement& b) { return a += b; }
  friend ProperadElement operator-(ProperadElement a, const ProperadElement& b) { return a -= b; }
  friend ProperadElement operator*(const Rational& s, ProperadElement a) { return a *= s; }
  friend bool operator==(const ProperadElement& a, const ProperadElement& b) {
    return a.m_ == b.m_ && a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  /// Terms with at most / exactly d vertices.
  ProperadElement truncate(int d) const {
    ProperadElement out(m_, n_);
    for (const auto& [g, c] : terms_)
      if (g.degree() <= d) out.terms_.emplace(g, c);
    return out;
  }
  ProperadElement component(int d) const {
    ProperadElement out(m_, n_);
    for (const auto& [g, c] : terms_)
      if (g.degree() == d) out.terms_.emplace(g, c);
    return out;
  }
  int max_degree() const {
    int d = -1;
    for (const auto& [g, c] : terms_) d = std::max(d, g.degree());
    return d;
  }

 private:
  void check(const ProperadElement& o) const {
    if (o.m_ != m_ || o.n_ != n_) throw std::invalid_argument("properad bi-arity mismatch in sum");
  }
  int m_, n_;
  Map terms_;
};

inline std::string render(const ProperadElement& x) {
  if (x.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [g, c] : x.terms()) {
    out += render_coef_term(c, "[" + render(g) + "]", first);
    first = false;
  }
  return out;
}

inline ProperadElement to_properad(const OperadElement& x) {
  ProperadElement out(x.arity(), 1);
  for (const auto& [t, c] : x.terms()) out.add_term(to_flowdag(t), c);
  return out;
}

/// f o (g_1, ..., g_l): the outputs of g_1, then g_2, ... are wired blockwise
/// onto the inputs of f; inputs of the result are those of g_1, g_2, ... in
/// order. nullopt when the composite is disconnected.
inline std::optional<FlowDag> properad_compose(const FlowDag& f, const std::vector<const FlowDag*>& gs) {
  int k = 0, inputs = 0;
  for (const auto* g : gs) {
    k += g->outputs();
    inputs += g->inputs();
  }
  if (k != f.inputs())
    throw std::invalid_argument("properad composition: outputs sum to " + std::to_string(k) + ", f has " +
                                std::to_string(f.inputs()) + " inputs");
  // f input q -> (block, output of that block)
  std::vector<std::pair<int, int>> block_of(f.inputs());
  std::vector<int> voff(gs.size()), ioff(gs.size());
  int nv = f.degree(), q = 0, io = 0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    voff[i] = nv;
    ioff[i] = io;
    nv += gs[i]->degree();
    io += gs[i]->inputs();
    for (int r = 0; r < gs[i]->outputs(); ++r) block_of[q++] = {static_cast<int>(i), r};
  }
  auto lift_g = [&](std::size_t i, const DagSource& s) -> DagSource {
    return s.is_input() ? DagSource{-1, ioff[i] + s.port} : DagSource{voff[i] + s.vertex, s.port};
  };
  auto lift_f = [&](const DagSource& s) -> DagSource {
    if (!s.is_input()) return s;
    const auto [i, r] = block_of[s.port];
    return lift_g(i, gs[i]->output_sources()[r]);
  };
  std::vector<DagVertex> vs;
  vs.reserve(nv);
  for (const auto& v : f.vertices()) {
    DagVertex d = v;
    for (auto& s : d.sources) s = lift_f(s);
    vs.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (const auto& v : gs[i]->vertices()) {
      DagVertex d = v;
      for (auto& s : d.sources) s = lift_g(i, s);
      vs.push_back(std::move(d));
    }
  std::vector<DagSource> outs;
  for (const auto& s : f.output_sources()) outs.push_back(lift_f(s));
  if (vs.empty()) {
    if (inputs == 1 && outs.size() == 1) return FlowDag::edge();
    return std::nullopt;
  }
  try {
    return FlowDag(inputs, f.outputs(), std::move(vs), std::move(outs));
  } catch (const DisconnectedDag&) {
    return std::nullopt;
  }
}

/// Multilinear composition; disconnected composites contribute zero.
inline ProperadElement properad_compose(const ProperadElement& f, const std::vector<ProperadElement>& gs) {
  int k = 0, inputs = 0;
  for (const auto& g : gs) {
    k += g.outputs();
    inputs += g.inputs();
  }
  if (k != f.inputs())
    throw std::invalid_argument("properad composition: outputs sum to " + std::to_string(k) + ", f has " +
                                std::to_string(f.inputs()) + " inputs");
  ProperadElement out(inputs, f.outputs());
  std::vector<const FlowDag*> pick(gs.size());
  std::vector<Rational> coef(gs.size() + 1);
  for (const auto& [t, c] : f.terms()) {
    coef[0] = c;
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == gs.size()) {
        if (auto g = properad_compose(t, pick)) out.add_term(*g, coef[i]);
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

/// beta_{l,n} in P(l, n), keyed by (l, n).
using ProperadBeta = std::map<std::pair<int, int>, ProperadElement>;

/// (Lambda_n v)_i = sum_j a_j beta_{j,i} o v_j for v_j in P(n, j), i, j = 1..n.
inline std::vector<ProperadElement> lambda_apply(const FormalSeries& P, const ProperadBeta& beta, int n,
                                                 const std::vector<ProperadElement>& v) {
  if (static_cast<int>(v.size()) != n) throw std::invalid_argument("lambda_apply: vector length must be n");
  for (int j = 1; j <= n; ++j)
    if (v[j - 1].inputs() != n || v[j - 1].outputs() != j)
      throw std::invalid_argument("lambda_apply: component " + std::to_string(j) + " must lie in P(n," +
                                  std::to_string(j) + ")");
  std::vector<ProperadElement> out;
  for (int i = 1; i <= n; ++i) {
    ProperadElement s(n, i);
    for (int j = 1; j <= n; ++j) {
      auto it = beta.find({j, i});
      if (it == beta.end() || P[j].is_zero() || v[j - 1].is_zero()) continue;
      ProperadElement t = properad_compose(it->second, {v[j - 1]});
      t *= P[j];
      s += t;
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct ProperadSolution {
  int cutoff = 0;  // vertex count
  std::map<std::pair<int, int>, ProperadElement> x;
  ProperadElement at(int m, int n) const {
    auto it = x.find({m, n});
    return it == x.end() ? ProperadElement(m, n) : it->second;
  }
};

namespace detail {

using GradedPieces = std::vector<std::map<std::pair<int, int>, ProperadElement>>;  // [degree][(m,n)]

/// Degree-d part of sum_l a_l beta_{l,n} o (sum over tuples with output sum l),
/// using the pieces computed so far. The scalar edge of beta_{1,1} is skipped
/// unless with_scalar is set.
inline std::map<std::pair<int, int>, ProperadElement> properad_rhs(const FormalSeries& P, const ProperadBeta& beta,
                                                                  const GradedPieces& pieces, int d,
                                                                  bool with_scalar) {
  std::map<std::pair<int, int>, ProperadElement> out;
  auto add = [&](const ProperadElement& e) {
    auto key = std::make_pair(e.inputs(), e.outputs());
    auto it = out.find(key);
    if (it == out.end())
      out.emplace(key, e);
    else
      it->second += e;
  };
  for (const auto& [key, b] : beta) {
    const auto [l, n] = key;
    if (P[l].is_zero()) continue;
    for (const auto& [g, gc] : b.terms()) {
      if (g.is_edge() && !with_scalar) continue;
      const int budget = d - g.degree();
      if (budget < 0) continue;
      const ProperadElement single(g, gc * P[l]);
      std::vector<ProperadElement> args;
      auto rec = [&](auto&& self, int outs_left, int deg_left) -> void {
        if (outs_left == 0) {
          if (deg_left != 0) return;
          ProperadElement r = properad_compose(single, args);
          if (!r.is_zero()) add(r);
          return;
        }
        for (int dd = 0; dd <= deg_left && dd < static_cast<int>(pieces.size()); ++dd)
          for (const auto& [mn, x] : pieces[dd]) {
            if (mn.second > outs_left || x.is_zero()) continue;
            args.push_back(x);
            self(self, outs_left - mn.second, deg_left - dd);
            args.pop_back();
          }
      };
      rec(rec, l, budget);
    }
  }
  return out;
}

}  // namespace detail

/// Solves X = beta(P(X)) through `vertex_cutoff` vertices. The edge part
/// lambda of beta_{1,1} is inverted exactly as (1 - a_1 lambda)^{-1} on the
/// (m,1) components; every other beta term must carry at least one vertex, so
/// (I - Lambda_n)^{-1} reduces to a graded Neumann series.
inline ProperadSolution solve_properad_dse(const FormalSeries& P, const ProperadBeta& beta, int vertex_cutoff) {
  if (vertex_cutoff < 0) throw std::invalid_argument("solve_properad_dse: cutoff must be >= 0");
  Rational lambda = 0;
  for (const auto& [key, b] : beta) {
    if (b.inputs() != key.first || b.outputs() != key.second)
      throw std::invalid_argument("beta component stored under the wrong bi-arity");
    if (key.first < 1 || key.second < 1) throw std::invalid_argument("beta components need inputs and outputs");
    for (const auto& [g, c] : b.terms())
      if (g.is_edge()) lambda = c;
  }
  const Rational denom = 1 - P[1] * lambda;
  if (denom.is_zero()) throw NonInvertible("non-invertible: 1 - a_1 lambda = 0 on P(1,1)");
  const Rational inv = 1 / denom;
  detail::GradedPieces pieces(vertex_cutoff + 1);
  pieces[0].emplace(std::make_pair(1, 1), ProperadElement::identity(inv));
  for (int d = 1; d <= vertex_cutoff; ++d) {
    auto rhs = detail::properad_rhs(P, beta, pieces, d, false);
    for (auto& [key, e] : rhs) {
      if (key.second == 1) e *= inv;
      if (!e.is_zero()) pieces[d].emplace(key, std::move(e));
    }
  }
  ProperadSolution sol{vertex_cutoff, {}};
  for (const auto& layer : pieces)
    for (const auto& [key, e] : layer) {
      auto it = sol.x.find(key);
      if (it == sol.x.end())
        sol.x.emplace(key, e);
      else
        it->second += e;
    }
  return sol;
}

/// Substitutes into X = beta(P(X)) with the scalar term included, comparing
/// every bi-arity up to the vertex cutoff.
inline DegreeCheck verify_properad_dse(const ProperadSolution& sol, const FormalSeries& P, const ProperadBeta& beta,
                                       int vertex_cutoff) {
  detail::GradedPieces pieces(vertex_cutoff + 1);
  for (const auto& [key, e] : sol.x)
    for (int d = 0; d <= vertex_cutoff; ++d) {
      ProperadElement c = e.component(d);
      if (!c.is_zero()) pieces[d].emplace(key, std::move(c));
    }
  for (int d = 0; d <= vertex_cutoff; ++d) {
    auto rhs = detail::properad_rhs(P, beta, pieces, d, true);
    if (d == 0) {
      ProperadElement unit = ProperadElement::identity();
      auto it = rhs.find({1, 1});
      if (it == rhs.end())
        rhs.emplace(std::make_pair(1, 1), unit);
      else
        it->second += unit;
    }
    std::set<std::pair<int, int>> keys;
    for (const auto& [k, e] : rhs) keys.insert(k);
    for (const auto& [k, e] : pieces[d]) keys.insert(k);
    for (const auto& k : keys) {
      const ProperadElement lhs = pieces[d].count(k) ? pieces[d].at(k) : ProperadElement(k.first, k.second);
      const ProperadElement r = rhs.count(k) ? rhs.at(k) : ProperadElement(k.first, k.second);
      if (!(lhs == r))
        return {false, vertex_cutoff, d,
                "component (" + std::to_string(k.first) + "," + std::to_string(k.second) + ") fails at " +
                    std::to_string(d) + " vertices"};
    }
  }
  return {true, vertex_cutoff, 0, ""};
}

/// x_{k,n} o (x_{j_1,i_1} (x) ... (x) x_{j_l,i_l}) with j-sum m and i-sum k.
inline std::vector<ProperadElement> subproperad_span(const ProperadSolution& sol, int m, int n) {
  std::vector<ProperadElement> out;
  for (const auto& [key, top] : sol.x) {
    if (key.second != n || top.is_zero()) continue;
    const int k = key.first;
    std::vector<ProperadElement> args;
    auto rec = [&](auto&& self, int ins_left, int outs_left) -> void {
      if (outs_left == 0) {
        if (ins_left != 0) return;
        ProperadElement r = properad_compose(top, args);
        if (!r.is_zero()) out.push_back(std::move(r));
        return;
      }
      for (const auto& [mn, x] : sol.x) {
        if (mn.first > ins_left || mn.second > outs_left || x.is_zero()) continue;
        args.push_back(x);
        self(self, ins_left - mn.first, outs_left - mn.second);
        args.pop_back();
      }
    };
    rec(rec, m, k);
  }
  return out;
}

/// Properad beta text: entries "L,N: ELEMENT" separated by '|', where
/// ELEMENT is terms "[q] DAG" joined by '+' and DAG is either "edge", a single
/// vertex "LABEL(L->N)", or a bracketed dag DSL "{...}".
inline ProperadBeta parse_properad_beta(std::string_view text) {
  ProperadBeta beta;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto bar = text.find('|', pos);
    std::string_view entry = text.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos);
    pos = bar == std::string_view::npos ? text.size() + 1 : bar + 1;
    detail::Cursor in{entry};
    in.skip_ws();
    if (in.at_end()) continue;
    const int l = static_cast<int>(in.integer());
    in.skip_ws();
    in.expect(',');
    in.skip_ws();
    const int n = static_cast<int>(in.integer());
    in.skip_ws();
    in.expect(':');
    ProperadElement e(l, n);
    do {
      in.skip_ws();
      Rational c = 1;
      if (std::isdigit(static_cast<unsigned char>(in.peek()))) {
        std::size_t end = in.pos;
        while (end < entry.size() && (std::isdigit(static_cast<unsigned char>(entry[end])) || entry[end] == '/')) ++end;
        c = parse_rational(entry.substr(in.pos, end - in.pos));
        in.pos = end;
        in.skip_ws();
        in.consume('*');
        in.skip_ws();
      }
      if (in.consume('{')) {
        const std::size_t close = entry.find('}', in.pos);
        if (close == std::string_view::npos) in.fail("missing '}'");
        e.add_term(parse_flowdag(entry.substr(in.pos, close - in.pos)), c);
        in.pos = close + 1;
      } else {
        const std::string word = in.identifier();
        if (word == "edge") {
          e.add_term(FlowDag::edge(), c);
        } else {
          in.expect('(');
          in.skip_ws();
          const int a = static_cast<int>(in.integer());
          in.skip_ws();
          if (!in.consume("->")) in.fail("expected '->'");
          in.skip_ws();
          const int b = static_cast<int>(in.integer());
          in.skip_ws();
          in.expect(')');
          e.add_term(FlowDag::corolla(word, a, b), c);
        }
      }
      in.skip_ws();
    } while (in.consume('+'));
    if (!in.at_end()) in.fail("unexpected input in beta entry");
    auto [it, fresh] = beta.emplace(std::make_pair(l, n), e);
    if (!fresh) it->second += e;
  }
  return beta;
}

}  // namespace flowhopf
