#pragma once

// Text syntax for trees, forests and algebra elements.
//
//   tree    := '#' [index] | 'in(' recfun ')' | 'in(?)' | label [ '(' tree {',' tree} ')' ]
//   forest  := '1' | tree {'*' tree}
//   element := ['-'] term {('+'|'-') term},   term := [rational] forest

#include "flowhopf/algebra.hpp"
#include "flowhopf/recfun.hpp"
#include "flowhopf/text.hpp"
#include "flowhopf/tree.hpp"

#include <string>
#include <string_view>

namespace flowhopf {

namespace detail {

struct TreeParser {
  Cursor& in;
  int flags_seen = 0;

  PlanarTree tree() {
    in.skip_ws();
    const std::size_t start = in.pos;
    if (in.consume('#')) {
      ++flags_seen;
      if (in.pos < in.text.size() && std::isdigit(static_cast<unsigned char>(in.text[in.pos]))) {
        const auto idx = in.integer();
        if (idx != static_cast<std::uint64_t>(flags_seen))
          throw ParseError(start, "flag index #" + std::to_string(idx) + " out of order, expected #" +
                                      std::to_string(flags_seen));
      }
      return PlanarTree::flag();
    }
    const std::string word = in.identifier();
    if (word == "in") {
      ++flags_seen;
      in.expect('(');
      if (in.consume('?')) {
        in.expect(')');
        return PlanarTree::invalid_flag();
      }
      RecFun f = parse_recfun(in);
      in.expect(')');
      return PlanarTree::flag(std::move(f));
    }
    if (word.size() != 1 || !label_from_char(word[0]))
      throw ParseError(start, "unknown label '" + word + "'");
    const Label label = *label_from_char(word[0]);
    std::vector<PlanarTree> kids;
    if (in.consume('(')) {
      kids.push_back(tree());
      while (in.consume(',')) kids.push_back(tree());
      in.expect(')');
    }
    return PlanarTree::vertex(label, std::move(kids));
  }

  Forest forest() {
    in.skip_ws();
    if (in.peek() == '1') {
      ++in.pos;
      return Forest{};
    }
    std::vector<PlanarTree> ts;
    ts.push_back(tree());
    while (in.consume('*')) ts.push_back(tree());
    return Forest(std::move(ts));
  }
};

inline bool starts_forest(Cursor& in) {
  const char c = in.peek();
  return c == '#' || (c >= 'a' && c <= 'z');
}

}  // namespace detail

inline PlanarTree parse_tree(std::string_view text) {
  detail::Cursor in{text};
  detail::TreeParser p{in};
  PlanarTree t = p.tree();
  if (!in.at_end()) in.fail("trailing input");
  return t;
}

inline Forest parse_forest(std::string_view text, Mode mode = Mode::nc) {
  detail::Cursor in{text};
  detail::TreeParser p{in};
  Forest f = p.forest();
  if (!in.at_end()) in.fail("trailing input");
  return canonicalize(std::move(f), mode);
}

inline AlgebraElement parse_element(std::string_view text, Mode mode = Mode::nc) {
  detail::Cursor in{text};
  AlgebraElement out(mode);
  bool first = true;
  while (true) {
    Rational sign = 1;
    if (in.consume('-')) {
      sign = -1;
    } else if (!first && !in.consume('+')) {
      break;
    }
    first = false;
    in.skip_ws();
    Rational coef = 1;
    bool have_coef = false;
    if (std::isdigit(static_cast<unsigned char>(in.peek()))) {
      const std::size_t start = in.pos;
      std::size_t end = start;
      while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '/'))
        ++end;
      std::string_view tok = text.substr(start, end - start);
      try {
        coef = parse_rational(tok);
      } catch (const std::invalid_argument& e) {
        throw ParseError(start, e.what());
      }
      in.pos = end;
      have_coef = true;
    }
    Forest f;
    if (!have_coef || detail::starts_forest(in)) {
      detail::TreeParser p{in};
      f = p.forest();
    }
    out.add_term(f, sign * coef);
    if (in.at_end()) break;
  }
  if (!in.at_end()) in.fail("trailing input");
  return out;
}

}  // namespace flowhopf
