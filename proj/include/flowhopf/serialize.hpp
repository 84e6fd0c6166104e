#pragma once

// JSON views of the algebraic objects (nlohmann::json).

#include "flowhopf/algebra.hpp"
#include "flowhopf/operad.hpp"
#include "flowhopf/properad.hpp"
#include "flowhopf/renorm.hpp"

#include <json.hpp>

#include <string>

namespace flowhopf {

using Json = nlohmann::ordered_json;

inline Json to_json(const PlanarTree& t) {
  Json j;
  if (t.is_flag()) {
    j["label"] = render(t);
    j["children"] = Json::array();
    return j;
  }
  j["label"] = std::string(1, label_char(t.label()));
  Json kids = Json::array();
  for (const auto& ch : t.children()) kids.push_back(to_json(ch));
  j["children"] = std::move(kids);
  return j;
}

inline Json to_json(const Forest& f) {
  Json a = Json::array();
  for (const auto& t : f.trees()) a.push_back(to_json(t));
  return a;
}

inline Json to_json(const AlgebraElement& x, int cutoff = -1) {
  Json j;
  j["mode"] = mode_name(x.mode());
  j["cutoff"] = cutoff < 0 ? x.max_degree() : cutoff;
  Json terms = Json::array();
  for (const auto& [f, c] : x.terms()) terms.push_back({{"coef", to_string(c)}, {"forest", to_json(f)}});
  j["terms"] = std::move(terms);
  return j;
}

inline Json to_json(const TensorElement& x) {
  Json terms = Json::array();
  for (const auto& [p, c] : x.terms())
    terms.push_back({{"coef", to_string(c)}, {"left", to_json(p.first)}, {"right", to_json(p.second)}});
  return {{"mode", mode_name(x.mode())}, {"terms", std::move(terms)}};
}

inline Json to_json(const OperadElement& x) {
  Json terms = Json::array();
  for (const auto& [t, c] : x.terms()) terms.push_back({{"coef", to_string(c)}, {"tree", to_json(t)}});
  return {{"arity", x.arity()}, {"terms", std::move(terms)}};
}

/// Mirror of the dag DSL: vertices with ids, wires as endpoint strings.
inline Json to_json(const FlowDag& g) {
  Json vs = Json::array();
  for (std::size_t v = 0; v < g.vertices().size(); ++v) {
    const auto& d = g.vertices()[v];
    vs.push_back({{"id", "v" + std::to_string(v + 1)}, {"label", d.label}, {"in", d.in}, {"out", d.out}});
  }
  Json wires = Json::array();
  for (std::size_t v = 0; v < g.vertices().size(); ++v)
    for (std::size_t p = 0; p < g.vertices()[v].sources.size(); ++p)
      wires.push_back({{"from", detail::source_text(g.vertices()[v].sources[p])},
                       {"to", "v" + std::to_string(v + 1) + ".in" + std::to_string(p + 1)}});
  for (std::size_t q = 0; q < g.output_sources().size(); ++q)
    wires.push_back({{"from", detail::source_text(g.output_sources()[q])}, {"to", "out" + std::to_string(q + 1)}});
  return {{"inputs", g.inputs()}, {"outputs", g.outputs()}, {"vertices", std::move(vs)}, {"wires", std::move(wires)}};
}

/// Inverse of to_json(FlowDag), going through the DSL.
inline FlowDag flowdag_from_json(const Json& j) {
  std::string text;
  for (const auto& v : j.at("vertices"))
    text += v.at("id").get<std::string>() + ": " + v.at("label").get<std::string>() + "(" +
            std::to_string(v.at("in").get<int>()) + "->" + std::to_string(v.at("out").get<int>()) + ");";
  for (const auto& w : j.at("wires"))
    text += w.at("from").get<std::string>() + " -> " + w.at("to").get<std::string>() + ";";
  if (j.at("vertices").empty()) return FlowDag::edge();
  return parse_flowdag(text);
}

inline Json to_json(const ProperadElement& x) {
  Json terms = Json::array();
  for (const auto& [g, c] : x.terms()) terms.push_back({{"coef", to_string(c)}, {"dag", to_json(g)}});
  return {{"inputs", x.inputs()}, {"outputs", x.outputs()}, {"terms", std::move(terms)}};
}

inline Json to_json(const LaurentElement& x) {
  Json polar = Json::object();
  for (const auto& [k, c] : x.polar()) polar[std::to_string(k)] = c;
  return {{"polar", std::move(polar)}, {"finite", x.finite()}};
}

}  // namespace flowhopf
