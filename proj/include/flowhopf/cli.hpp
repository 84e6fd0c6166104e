#pragma once

// Command-line front end. run() never exits the process; it returns
// 0 on success, 1 when a check fails and 2 on usage or input errors.

#include "flowhopf/dse.hpp"
#include "flowhopf/enumerate.hpp"
#include "flowhopf/flowchart.hpp"
#include "flowhopf/grafting.hpp"
#include "flowhopf/hopf.hpp"
#include "flowhopf/operad.hpp"
#include "flowhopf/parse.hpp"
#include "flowhopf/properad.hpp"
#include "flowhopf/recfun.hpp"
#include "flowhopf/renorm.hpp"
#include "flowhopf/serialize.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace flowhopf::cli {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shared {
  int cutoff = -1;
  std::string mode;
  bool json = false;
  std::uint64_t seed = 1;
};

namespace detail {

inline Mode parse_mode(const std::string& s, Mode fallback) {
  if (s.empty()) return fallback;
  if (s == "nc") return Mode::nc;
  if (s == "comm") return Mode::comm;
  throw UsageError("--mode must be nc or comm, got '" + s + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto a = cur.find_first_not_of(" \t");
    const auto b = cur.find_last_not_of(" \t");
    out.push_back(a == std::string::npos ? "" : cur.substr(a, b - a + 1));
  }
  return out;
}

inline std::vector<Nat> parse_nats(const std::string& s) {
  std::vector<Nat> out;
  if (s.empty()) return out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError("expected a comma separated list of naturals, got '" + s + "'");
    out.push_back(std::stoull(tok));
  }
  return out;
}

/// "1:1,2:1/2" -> {1: 1, 2: 1/2}
inline std::map<int, Rational> parse_bk(const std::string& s) {
  std::map<int, Rational> out;
  for (const auto& tok : split(s, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw UsageError("--bk entries look like k:c, got '" + tok + "'");
    out[std::stoi(tok.substr(0, colon))] += parse_rational(tok.substr(colon + 1));
  }
  return out;
}

inline std::string double_text(double v) {
  std::ostringstream o;
  o << std::setprecision(12) << v;
  return o.str();
}

inline void print_meta(std::ostream& out, const Json& meta) {
  out << "#";
  for (const auto& [k, v] : meta.items()) out << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
  out << '\n';
}

inline std::string check_text(const DegreeCheck& c) {
  if (c.pass) return "pass through degree " + std::to_string(c.cutoff);
  return "FAIL at degree " + std::to_string(c.failing_degree) + ": " + c.detail;
}

inline Json check_json(const DegreeCheck& c) {
  return {{"pass", c.pass}, {"cutoff", c.cutoff}, {"failing_degree", c.failing_degree}, {"detail", c.detail}};
}

}  // namespace detail

/// One leaf subcommand: its CLI11 node and the action run after parsing.
struct Command {
  CLI::App* app;
  std::function<int()> action;
};

class Runner {
 public:
  explicit Runner(std::ostream& out) : out_(out), app_("flowhopf", "flowhopf") {
    app_.require_subcommand(1);
    app_.set_help_all_flag("--help-all", "Print help for all subcommands");
    add_parse();
    add_coproduct();
    add_antipode();
    add_cocycle();
    add_dse();
    add_operad();
    add_properad();
    add_eval();
    add_flowchart();
    add_renorm();
  }

  int run(std::vector<std::string> args, std::ostream& err) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp&) {
      out_ << app_.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app_.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << "\n";
      return 2;
    }
    for (const auto& c : commands_) {
      if (!c.app->parsed()) continue;
      try {
        return c.action();
      } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
      }
      return 2;
    }
    err << "usage error: no subcommand\n";
    return 2;
  }

 private:
  void shared(CLI::App* sub, bool with_cutoff = true, bool with_mode = true) {
    if (with_cutoff) sub->add_option("--cutoff", opt_.cutoff, "Degree, arity or vertex cutoff");
    if (with_mode) sub->add_option("--mode", opt_.mode, "nc or comm");
    sub->add_flag("--json", opt_.json, "JSON output");
    sub->add_option("--seed", opt_.seed, "Seed for randomized runs");
  }

  int cutoff_or(int fallback) const {
    if (opt_.cutoff == -1) return fallback;
    if (opt_.cutoff < 0) throw UsageError("--cutoff must be >= 0");
    return opt_.cutoff;
  }

  void emit(Json meta, const Json& body, const std::vector<std::string>& lines) {
    if (opt_.json) {
      Json doc{{"meta", std::move(meta)}};
      for (const auto& [k, v] : body.items()) doc[k] = v;
      out_ << doc.dump(2) << "\n";
      return;
    }
    detail::print_meta(out_, meta);
    for (const auto& l : lines) out_ << l << "\n";
  }

  AlgebraElement input_element(const std::string& tree, const std::string& elem, Mode mode) const {
    if (!tree.empty() && !elem.empty()) throw UsageError("give --tree or --element, not both");
    if (!tree.empty()) return element(parse_tree(tree), mode);
    if (!elem.empty()) return parse_element(elem, mode);
    throw UsageError("missing --tree or --element");
  }

  // ---- parse / coproduct / antipode / cocycle-check

  void add_parse() {
    auto* sub = app_.add_subcommand("parse", "Parse and print a tree or element in canonical form");
    sub->add_option("--tree", tree_);
    sub->add_option("--element", elem_);
    shared(sub, false);
    commands_.push_back({sub, [this] {
                           const Mode mode = detail::parse_mode(opt_.mode, Mode::nc);
                           Json meta{{"command", "parse"}, {"mode", mode_name(mode)}, {"cutoff", "exact"}};
                           if (!tree_.empty() && elem_.empty()) {
                             const PlanarTree t = parse_tree(tree_);
                             emit(meta, {{"tree", to_json(t)}, {"text", render(t)}, {"degree", t.degree()}},
                                  {"tree: " + render(t), "degree: " + std::to_string(t.degree()),
                                   "flags: " + std::to_string(t.flag_count())});
                             return 0;
                           }
                           const AlgebraElement x = input_element(tree_, elem_, mode);
                           emit(meta, {{"element", to_json(x)}, {"text", render(x)}},
                                {"element: " + render(x), "max degree: " + std::to_string(x.max_degree()),
                                 "terms: " + std::to_string(x.size())});
                           return 0;
                         }});
  }

  void add_coproduct() {
    auto* sub = app_.add_subcommand("coproduct", "Coproduct over admissible cuts");
    sub->add_option("--tree", tree_);
    sub->add_option("--element", elem_);
    sub->add_flag("--reduced", reduced_, "Drop the primitive terms");
    shared(sub, false);
    commands_.push_back({sub, [this] {
                           const Mode mode = detail::parse_mode(opt_.mode, Mode::nc);
                           const AlgebraElement x = input_element(tree_, elem_, mode);
                           const TensorElement d = reduced_ ? reduced_coproduct(x) : coproduct(x);
                           Json meta{{"command", "coproduct"}, {"mode", mode_name(mode)}, {"cutoff", "exact"},
                                     {"reduced", reduced_}};
                           std::vector<std::string> lines{"input: " + render(x), "terms: " + std::to_string(d.size())};
                           for (const auto& [k, c] : d.terms())
                             lines.push_back("  " + render_coef_term(c, render(k.first) + " (x) " + render(k.second), true));
                           emit(meta, {{"input", render(x)}, {"coproduct", to_json(d)}}, lines);
                           return 0;
                         }});
  }

  void add_antipode() {
    auto* sub = app_.add_subcommand("antipode", "Antipode of a tree or element");
    sub->add_option("--tree", tree_);
    sub->add_option("--element", elem_);
    shared(sub, false);
    commands_.push_back({sub, [this] {
                           const Mode mode = detail::parse_mode(opt_.mode, Mode::nc);
                           const AlgebraElement x = input_element(tree_, elem_, mode);
                           Hopf hopf(mode);
                           const AlgebraElement s = hopf.antipode(x);
                           // m (S (x) id) Delta = unit counit
                           const AlgebraElement check = multiply(map_tensor(
                               hopf.coproduct(x), [&](const Forest& f) { return hopf.antipode(element(f, mode)); },
                               [&](const Forest& f) { return element(f, mode); }));
                           const bool ok = check == element(Forest{}, mode, counit(x));
                           Json meta{{"command", "antipode"}, {"mode", mode_name(mode)}, {"cutoff", "exact"}};
                           emit(meta, {{"input", render(x)}, {"antipode", to_json(s)}, {"axiom", ok}},
                                {"input: " + render(x), "S = " + render(s),
                                 std::string("m(S (x) id)Delta = unit counit: ") + (ok ? "pass" : "FAIL")});
                           return ok ? 0 : 1;
                         }});
  }

  void add_cocycle() {
    auto* sub = app_.add_subcommand("cocycle-check", "Exhaustive 1-cocycle check of a grafting operator");
    sub->add_option("--op", graft_, "corolla:b, binary:r, binary:b:zero, ...");
    sub->add_option("--max-degree", opt_.cutoff, "Largest forest degree checked");
    shared(sub);
    commands_.push_back({sub, [this] {
                           const Mode mode = detail::parse_mode(opt_.mode, Mode::nc);
                           const GraftOperator op = parse_graft(graft_);
                           const int N = cutoff_or(3);
                           const CocycleResult r = cocycle_check(op, N, mode);
                           Json meta{{"command", "cocycle-check"}, {"op", op.str()}, {"mode", mode_name(mode)},
                                     {"cutoff", N}};
                           Json body{{"pass", r.pass}, {"checked", r.checked}};
                           std::vector<std::string> lines{std::string(r.pass ? "pass" : "FAIL") + ": " +
                                                          std::to_string(r.checked) + " forests checked"};
                           if (r.witness) {
                             const TensorElement res = r.witness->residual();
                             body["witness"] = {{"forest", to_json(r.witness->forest)}, {"residual", to_json(res)}};
                             lines.push_back("witness: " + render(r.witness->forest));
                             lines.push_back("lhs - rhs = " + render(res));
                           }
                           emit(meta, body, lines);
                           return r.pass ? 0 : 1;
                         }});
  }

  // ---- dse

  struct DseSetup {
    GradedSolution sol;
    FormalSeries P;
    std::map<int, Rational> bk;
    GraftOperator op;
    Json meta;
  };

  DseSetup dse_setup(const std::string& command, Mode fallback_mode) {
    std::string series = series_, graft = graft_, bk = bk_;
    int fallback_cutoff = 4;
    if (preset_ == "bk-binary") {
      bk = "1:1";
      graft = "binary:bcr";
      fallback_cutoff = 2;
    } else if (preset_ == "foissy-geometric") {
      series = "geometric";
      graft = "corolla:b";
    } else if (!preset_.empty()) {
      throw UsageError("unknown dse preset '" + preset_ + "'");
    }
    DseSetup s;
    const Mode mode = detail::parse_mode(opt_.mode, fallback_mode);
    const int N = cutoff_or(fallback_cutoff);
    s.op = parse_graft(graft);
    s.meta = {{"command", command}, {"mode", mode_name(mode)}, {"cutoff", N}, {"graft", s.op.str()}};
    if (!preset_.empty()) s.meta["preset"] = preset_;
    if (!bk.empty()) {
      s.bk = detail::parse_bk(bk);
      s.sol = solve_bk(s.bk, s.op, N, mode);
      s.meta["bk"] = bk;
    } else {
      s.P = parse_series(series, std::max(N, 1));
      s.sol = solve_dse(s.P, s.op, N, mode);
      s.meta["series"] = s.P.str();
    }
    return s;
  }

  void print_components(const GradedSolution& sol, Json meta, Json extra, std::vector<std::string> tail) {
    Json comps = Json::array();
    std::vector<std::string> lines;
    for (int n = 0; n < static_cast<int>(sol.x.size()); ++n) {
      comps.push_back(to_json(sol.x[n], n));
      lines.push_back("x_" + std::to_string(n) + " [" + std::to_string(sol.x[n].size()) + " terms] = " +
                      render(sol.x[n]));
    }
    lines.insert(lines.end(), tail.begin(), tail.end());
    extra["components"] = std::move(comps);
    emit(std::move(meta), extra, lines);
  }

  void dse_options(CLI::App* sub) {
    sub->add_option("--series", series_, "Comma separated a_k, 'geometric' or 'exp'");
    sub->add_option("--graft", graft_, "Grafting operator, e.g. corolla:b or binary:bcr");
    sub->add_option("--bk", bk_, "Coupling form x = 1 + sum_k c_k B(X^(k+1)), e.g. 1:1,2:1/2");
    sub->add_option("--preset", preset_, "bk-binary or foissy-geometric");
    shared(sub);
  }

  void add_dse() {
    auto* dse = app_.add_subcommand("dse", "Combinatorial Dyson-Schwinger equations");
    dse->require_subcommand(1);

    auto* solve = dse->add_subcommand("solve", "Homogeneous components x_0..x_N");
    dse_options(solve);
    commands_.push_back({solve, [this] {
                           DseSetup s = dse_setup("dse solve", Mode::nc);
                           print_components(s.sol, s.meta, Json::object(), {});
                           return 0;
                         }});

    auto* verify = dse->add_subcommand("verify", "Substitute the solution back into the equation");
    dse_options(verify);
    commands_.push_back({verify, [this] {
                           DseSetup s = dse_setup("dse verify", Mode::nc);
                           const int N = s.sol.cutoff;
                           const DegreeCheck c = s.bk.empty() ? verify_dse(s.sol, s.P, s.op, N)
                                                              : verify_bk(s.sol, s.bk, s.op, N);
                           emit(s.meta, {{"verify", detail::check_json(c)}}, {"verify: " + detail::check_text(c)});
                           return c.pass ? 0 : 1;
                         }});

    auto* hopf = dse->add_subcommand("check-hopf", "Whether the components generate a Hopf subalgebra");
    dse_options(hopf);
    commands_.push_back({hopf, [this] {
                           DseSetup s = dse_setup("dse check-hopf", Mode::nc);
                           const int N = s.sol.cutoff;
                           Json body;
                           std::vector<std::string> lines;
                           if (s.bk.empty()) {
                             const auto fp = foissy_series_check(s.P, std::max(3, s.P.order()));
                             body["foissy"] = fp ? Json{{"alpha", to_string(fp->alpha)}, {"beta", to_string(fp->beta)}}
                                                 : Json(nullptr);
                             lines.push_back("series condition: " +
                                             (fp ? "(alpha, beta) = (" + to_string(fp->alpha) + ", " +
                                                       to_string(fp->beta) + ")"
                                                 : std::string("none")));
                           }
                           const DegreeCheck closure = subalgebra_closure_check(s.sol, N);
                           body["closure"] = detail::check_json(closure);
                           lines.push_back("subalgebra closure: " + detail::check_text(closure));
                           bool pass = closure.pass;
                           if (!s.bk.empty()) {
                             const DegreeCheck f = bk_coproduct_formula_check(s.sol, N);
                             body["coproduct_formula"] = detail::check_json(f);
                             lines.push_back("coproduct formula: " + detail::check_text(f));
                             pass = pass && f.pass;
                           }
                           emit(s.meta, body, lines);
                           return pass ? 0 : 1;
                         }});

    auto* ideal = dse->add_subcommand("check-ideal", "Hopf ideal test for the components or given generators");
    dse_options(ideal);
    ideal->add_option("--gens", gens_, "Generators separated by ';' instead of the solution components");
    commands_.push_back({ideal, [this] {
                           DegreeCheck c;
                           Json meta;
                           if (!gens_.empty()) {
                             const Mode mode = detail::parse_mode(opt_.mode, Mode::comm);
                             const int N = cutoff_or(4);
                             std::vector<AlgebraElement> gs;
                             for (const auto& g : detail::split(gens_, ';')) gs.push_back(parse_element(g, mode));
                             meta = {{"command", "dse check-ideal"}, {"mode", mode_name(mode)}, {"cutoff", N},
                                     {"gens", gens_}};
                             c = hopf_ideal_check(gs, N, mode);
                           } else {
                             DseSetup s = dse_setup("dse check-ideal", Mode::comm);
                             meta = s.meta;
                             c = hopf_ideal_check(s.sol, s.sol.cutoff);
                           }
                           emit(meta, {{"ideal", detail::check_json(c)}}, {"hopf ideal: " + detail::check_text(c)});
                           return c.pass ? 0 : 1;
                         }});

    auto* system = dse->add_subcommand("system", "System X_d = B_d(F_d(X_b, X_c, X_r))");
    system->add_option("--fb", fb_, "F_b, e.g. '1 + X_c'");
    system->add_option("--fc", fc_, "F_c");
    system->add_option("--fr", fr_, "F_r");
    system->add_flag("--strict", strict_, "Reject constant right-hand sides");
    shared(system);
    commands_.push_back({system, [this] {
                           const Mode mode = detail::parse_mode(opt_.mode, Mode::nc);
                           const int N = cutoff_or(3);
                           const std::array<MultiSeries, 3> F{parse_multiseries(fb_), parse_multiseries(fc_),
                                                              parse_multiseries(fr_)};
                           const SystemSolution sol = solve_dse_system(F, N, mode, strict_);
                           const DegreeCheck c = verify_dse_system(sol, F, N);
                           Json meta{{"command", "dse system"}, {"mode", mode_name(mode)}, {"cutoff", N},
                                     {"fb", fb_}, {"fc", fc_}, {"fr", fr_}};
                           Json body = Json::object();
                           std::vector<std::string> lines;
                           const char* names[] = {"X_b", "X_c", "X_r"};
                           for (int d = 0; d < 3; ++d) {
                             Json comps = Json::array();
                             for (int n = 0; n < static_cast<int>(sol.x[d].size()); ++n) {
                               comps.push_back(to_json(sol.x[d][n], n));
                               lines.push_back(std::string(names[d]) + "_" + std::to_string(n) + " = " +
                                               render(sol.x[d][n]));
                             }
                             body[names[d]] = std::move(comps);
                           }
                           body["verify"] = detail::check_json(c);
                           lines.push_back("verify: " + detail::check_text(c));
                           emit(meta, body, lines);
                           return c.pass ? 0 : 1;
                         }});
  }

  // ---- operad

  void add_operad() {
    auto* op = app_.add_subcommand("operad", "Dyson-Schwinger equations in the operad of flow charts");
    op->require_subcommand(1);
    auto options = [this](CLI::App* sub) {
      sub->add_option("--series", series_, "Comma separated a_k, 'geometric' or 'exp'");
      sub->add_option("--beta", beta_, "e.g. '2:b,3:b', '1:1/2', '3:b(#1,c(#2,#3))'");
      shared(sub, true, false);
    };
    auto* solve = op->add_subcommand("solve", "Arity components x_1..x_N");
    options(solve);
    commands_.push_back({solve, [this] {
                           const int N = cutoff_or(4);
                           const FormalSeries P = parse_series(series_, std::max(N, 1));
                           const OperadSolution sol = solve_operad_dse(P, parse_operad_beta(beta_), N);
                           Json meta{{"command", "operad solve"}, {"cutoff", N}, {"series", P.str()}, {"beta", beta_}};
                           Json comps = Json::array();
                           std::vector<std::string> lines;
                           for (int n = 1; n <= N; ++n) {
                             comps.push_back(to_json(sol[n]));
                             lines.push_back("x_" + std::to_string(n) + " [" + std::to_string(sol[n].terms().size()) +
                                             " terms] = " + render(sol[n]));
                           }
                           emit(meta, {{"components", comps}}, lines);
                           return 0;
                         }});
    auto* verify = op->add_subcommand("verify", "Substitution check, plus closure of the one-level span");
    options(verify);
    commands_.push_back({verify, [this] {
                           const int N = cutoff_or(4);
                           const FormalSeries P = parse_series(series_, std::max(N, 1));
                           const OperadBeta beta = parse_operad_beta(beta_);
                           const OperadSolution sol = solve_operad_dse(P, beta, N);
                           const DegreeCheck v = verify_operad_dse(sol, P, beta, N);
                           const DegreeCheck c = suboperad_closure_check(sol, N);
                           Json meta{{"command", "operad verify"}, {"cutoff", N}, {"series", P.str()}, {"beta", beta_}};
                           emit(meta, {{"verify", detail::check_json(v)}, {"closure", detail::check_json(c)}},
                                {"verify: " + detail::check_text(v), "span closure (informational): " + detail::check_text(c)});
                           // the one-level span is not closed in general, so only
                           // the substitution check decides the exit code
                           return v.pass ? 0 : 1;
                         }});
  }

  // ---- properad

  void add_properad() {
    auto* pr = app_.add_subcommand("properad", "Dyson-Schwinger equations in the properad of flow charts");
    pr->require_subcommand(1);
    auto options = [this](CLI::App* sub) {
      sub->add_option("--series", series_, "Comma separated a_k, 'geometric' or 'exp'");
      sub->add_option("--beta", beta_, "e.g. '1,1: 1/2 edge + U(1->1) | 2,2: M(2->2)'");
      sub->add_option("--preset", preset_, "properad-diagonal");
      shared(sub, true, false);
    };
    auto setup = [this](const std::string& command, FormalSeries& P, ProperadBeta& beta, Json& meta) {
      std::string series = series_, b = beta_;
      if (preset_ == "properad-diagonal") {
        series = "geometric";
        b = "1,1: 1/2 edge + U(1->1) | 2,2: M(2->2)";
      } else if (!preset_.empty()) {
        throw UsageError("unknown properad preset '" + preset_ + "'");
      }
      if (b.empty()) throw UsageError("missing --beta");
      const int N = cutoff_or(3);
      P = parse_series(series, N + 2);
      beta = parse_properad_beta(b);
      meta = {{"command", command}, {"cutoff", N}, {"series", P.str()}, {"beta", b}};
      if (!preset_.empty()) meta["preset"] = preset_;
      return N;
    };
    auto* solve = pr->add_subcommand("solve", "Components x_{m,n} up to a vertex count");
    options(solve);
    commands_.push_back({solve, [this, setup] {
                           FormalSeries P;
                           ProperadBeta beta;
                           Json meta;
                           const int N = setup("properad solve", P, beta, meta);
                           const ProperadSolution sol = solve_properad_dse(P, beta, N);
                           Json comps = Json::array();
                           std::vector<std::string> lines;
                           for (const auto& [key, x] : sol.x) {
                             if (x.terms().empty()) continue;
                             comps.push_back(to_json(x));
                             lines.push_back("x_{" + std::to_string(key.first) + "," + std::to_string(key.second) +
                                             "} [" + std::to_string(x.terms().size()) + " terms] = " + render(x));
                           }
                           emit(meta, {{"components", comps}}, lines);
                           return 0;
                         }});
    auto* verify = pr->add_subcommand("verify", "Substitute the solution back into the equation");
    options(verify);
    commands_.push_back({verify, [this, setup] {
                           FormalSeries P;
                           ProperadBeta beta;
                           Json meta;
                           const int N = setup("properad verify", P, beta, meta);
                           const ProperadSolution sol = solve_properad_dse(P, beta, N);
                           const DegreeCheck v = verify_properad_dse(sol, P, beta, N);
                           emit(meta, {{"verify", detail::check_json(v)}}, {"verify: " + detail::check_text(v)});
                           return v.pass ? 0 : 1;
                         }});
  }

  // ---- eval / flowchart

  void add_eval() {
    auto* sub = app_.add_subcommand("eval", "Fuel-bounded evaluation of a recursive function");
    sub->add_option("--expr", expr_)->required();
    sub->add_option("--args", args_, "Comma separated naturals");
    sub->add_option("--fuel", fuel_, "Step budget");
    shared(sub, false, false);
    commands_.push_back({sub, [this] {
                           const RecFun f = parse_recfun(expr_);
                           const std::vector<Nat> a = detail::parse_nats(args_);
                           if (static_cast<int>(a.size()) != f.signature().inputs)
                             throw UsageError(f.str() + " takes " + std::to_string(f.signature().inputs) +
                                              " arguments, got " + std::to_string(a.size()));
                           const EvalResult r = evaluate(f, a, fuel_);
                           Json meta{{"command", "eval"}, {"fuel", fuel_}, {"consumed", r.consumed()}};
                           Json body{{"expr", f.str()}, {"halted", r.halted()}, {"result", r.str()}};
                           if (r.halted()) body["values"] = r.values();
                           emit(meta, body, {r.str()});
                           return 0;
                         }});
  }

  void add_flowchart() {
    auto* sub = app_.add_subcommand("flowchart", "Admissibility and output function of a flow chart");
    sub->add_option("--tree", tree_, "Flagged tree, or a vertex tree together with --sigma");
    sub->add_option("--sigma", sigma_, "Inputs for the free flags, e.g. 'S;C[1]' (vertex trees)");
    sub->add_flag("--binarize", binarize_, "Also print the binary form");
    sub->add_option("--random", random_, "Check binarization on this many seeded random flagged trees");
    sub->add_option("--args", args_, "Arguments for evaluating the output function");
    sub->add_option("--fuel", fuel_, "Step budget for evaluation");
    shared(sub, true, false);
    commands_.push_back({sub, [this] {
                           if (random_ > 0) return random_binarize();
                           if (tree_.empty()) throw UsageError("missing --tree");
                           PlanarTree t = parse_tree(tree_);
                           Json meta{{"command", "flowchart"}, {"fuel", fuel_}};
                           Json body{{"tree", render(t)}};
                           std::vector<std::string> lines{"tree: " + render(t)};
                           if (binarize_) {
                             const PlanarTree b = binarize(t);
                             body["binarized"] = render(b);
                             lines.push_back("binarized: " + render(b));
                           }
                           std::optional<RecFun> f;
                           std::string why;
                           if (!sigma_.empty()) {
                             std::vector<RecFun> sigma;
                             for (const auto& s : detail::split(sigma_, ';')) sigma.push_back(parse_recfun(s));
                             f = flowchart_output_vertexmode(t, sigma);
                             if (!f) why = "inadmissible under sigma (empty function)";
                           } else {
                             const AdmissibleResult r = admissible_check(t);
                             if (r) f = r.function(); else why = r.rejection().str();
                           }
                           body["admissible"] = f.has_value();
                           if (!f) {
                             body["rejection"] = why;
                             lines.push_back("rejected: " + why);
                             emit(meta, body, lines);
                             return 1;
                           }
                           body["function"] = f->str();
                           lines.push_back("function: " + f->str());
                           if (!args_.empty()) {
                             const EvalResult r = evaluate(*f, detail::parse_nats(args_), fuel_);
                             body["eval"] = r.str();
                             lines.push_back("eval: " + r.str());
                           }
                           emit(meta, body, lines);
                           return 0;
                         }});
  }

  /// Random flagged trees with k-ary b and c vertices: binarization keeps
  /// admissibility and the value on (1,...,1), (2,...,2) and (3,...,3).
  int random_binarize() {
    const int N = cutoff_or(4);
    std::mt19937_64 rng(opt_.seed);
    const std::vector<RecFun> palette{parse_recfun("S"), parse_recfun("P[1,1]"), parse_recfun("C[1]")};
    const std::vector<Label> labels{Label::b, Label::c, Label::r, Label::m};
    int checked = 0, admissible = 0;
    std::string witness;
    for (int i = 0; i < random_ && witness.empty(); ++i) {
      const int n = std::uniform_int_distribution<int>(1, std::max(1, N))(rng);
      const PlanarTree t = random_tree(rng, n, labels, palette, 4);
      const AdmissibleResult a = admissible_check(t), b = admissible_check(binarize(t));
      ++checked;
      if (a.ok() != b.ok()) {
        witness = render(t) + ": admissibility changes";
        break;
      }
      if (!a) continue;
      ++admissible;
      const int arity = a.function().signature().inputs;
      for (Nat v = 1; v <= 3; ++v) {
        const std::vector<Nat> args(arity, v);
        const EvalResult x = evaluate(a.function(), args, fuel_), y = evaluate(b.function(), args, fuel_);
        if (x.halted() && y.halted() && x.values() != y.values()) {
          witness = render(t) + ": " + x.str() + " vs " + y.str();
          break;
        }
        if (x.halted() != y.halted()) {
          // fuel exhaustion differs between the two shapes; rerun with more fuel
          const EvalResult x2 = evaluate(a.function(), args, fuel_ * 10), y2 = evaluate(b.function(), args, fuel_ * 10);
          if (x2.halted() && y2.halted() && x2.values() != y2.values()) {
            witness = render(t) + ": " + x2.str() + " vs " + y2.str();
            break;
          }
        }
      }
    }
    Json meta{{"command", "flowchart --random"}, {"seed", opt_.seed}, {"cutoff", N}, {"fuel", fuel_}};
    std::vector<std::string> lines{"binarize: " + std::string(witness.empty() ? "pass" : "FAIL") + " (" +
                                   std::to_string(checked) + " trees, " + std::to_string(admissible) + " admissible)"};
    if (!witness.empty()) lines.push_back("witness: " + witness);
    emit(meta, {{"checked", checked}, {"admissible", admissible}, {"pass", witness.empty()}, {"witness", witness}},
         lines);
    return witness.empty() ? 0 : 1;
  }

  // ---- renorm

  void add_renorm() {
    auto* sub = app_.add_subcommand("renorm", "BPHZ renormalization of the halting Feynman rule");
    sub->add_option("--tree", tree_);
    sub->add_option("--k", k_, "Prefix of k, e.g. 3,1 (later entries are 1)");
    sub->add_option("--fuel", fuel_, "Step budget per evaluation");
    sub->add_option("--eps", eps_, "Tail tolerance of the series values");
    sub->add_option("--rule", rule_mode_, "flagged or vertex");
    sub->add_option("--mode", rule_mode_, "flagged or vertex");
    sub->add_option("--sigma-cap", sigma_cap_, "Largest number of input assignments in vertex mode");
    sub->add_option("--preset", preset_, "halting-demo");
    shared(sub, false, false);
    commands_.push_back({sub, [this] {
                           std::string tree = tree_, k = k_, mode = rule_mode_;
                           std::uint64_t fuel = fuel_;
                           if (preset_ == "halting-demo") {
                             if (tree.empty()) tree = "c(m)";
                             if (k.empty()) k = "3,1";
                             if (mode.empty()) mode = "vertex";
                             fuel = std::min<std::uint64_t>(fuel, 10000);
                           } else if (!preset_.empty()) {
                             throw UsageError("unknown renorm preset '" + preset_ + "'");
                           }
                           if (tree.empty()) throw UsageError("missing --tree");
                           if (mode.empty()) mode = "flagged";
                           if (mode != "flagged" && mode != "vertex")
                             throw UsageError("--mode must be flagged or vertex for renorm");
                           FeynmanRule rule;
                           rule.mode = mode == "vertex" ? RuleMode::vertex : RuleMode::flagged;
                           rule.k = detail::parse_nats(k);
                           rule.fuel = fuel;
                           rule.eps = eps_;
                           rule.sigma_cap = sigma_cap_;
                           const PlanarTree t = parse_tree(tree);
                           Renormalizer R(rule);
                           const LaurentElement phi = R.phi(t), minus = R.phi_minus(t), plus = R.phi_plus(t);
                           const auto sc = R.phisumc(t);
                           const double fact = distance(R.factorization_value(element(t, Mode::comm)), phi);
                           Json meta{{"command", "renorm"}, {"rule", mode}, {"k", k.empty() ? "1" : k},
                                     {"fuel", fuel}, {"eps", eps_}, {"sigma-cap", sigma_cap_}};
                           Json body{{"tree", render(t)},
                                     {"phi", to_json(phi)},
                                     {"phi_minus", to_json(minus)},
                                     {"phi_plus", to_json(plus)},
                                     {"fuel", fuel},
                                     {"eps", eps_},
                                     {"factorization_error", fact},
                                     {"phisumc", {{"coproduct_form", to_json(sc.coproduct_form)},
                                                  {"factored_form", to_json(sc.factored_form)},
                                                  {"difference", sc.difference()}}}};
                           const bool finite = plus.is_finite();
                           emit(meta, body,
                                {"tree: " + render(t), "phi = " + phi.str(), "phi_minus = " + minus.str(),
                                 "phi_plus = " + plus.str(),
                                 "factorization |(phi_- o S) * phi_+ - phi| = " + detail::double_text(fact),
                                 "PhisumC: coproduct form " + sc.coproduct_form.str() + ", factored form " +
                                     sc.factored_form.str() + ", difference " + detail::double_text(sc.difference()),
                                 std::string("phi_plus finite: ") + (finite ? "yes" : "NO")});
                           return finite ? 0 : 1;
                         }});
  }

  std::ostream& out_;
  CLI::App app_;
  std::vector<Command> commands_;
  Shared opt_;
  std::string tree_, elem_, graft_ = "corolla:b", series_ = "geometric", bk_, preset_, gens_, beta_ = "2:b";
  std::string fb_ = "1", fc_ = "1", fr_ = "1", expr_, args_, sigma_, k_, rule_mode_;
  bool reduced_ = false, strict_ = false, binarize_ = false;
  int random_ = 0;
  std::uint64_t fuel_ = 100000;
  double eps_ = 1e-7;
  std::size_t sigma_cap_ = 729;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Runner(out).run(args, err);
}

inline int run(const std::vector<std::string>& args, std::ostream& out) { return run(args, out, out); }

}  // namespace flowhopf::cli
