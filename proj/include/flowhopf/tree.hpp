#pragma once

// Decorated planar rooted trees and forests.
//
// A tree node is either a vertex (label b, c, r or m, ordered children) or an
// external input flag. Flags carry no vertex, so they do not count towards the
// degree; they are either free, labeled by a recursive function, or marked
// invalid (the output of a pruned piece that computes nothing).

#include "flowhopf/recfun.hpp"

#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowhopf {

enum class Label : unsigned char { b = 0, c = 1, r = 2, m = 3 };

inline constexpr Label all_labels[] = {Label::b, Label::c, Label::r, Label::m};

inline char label_char(Label l) { return "bcrm"[static_cast<int>(l)]; }

inline std::optional<Label> label_from_char(char ch) {
  switch (ch) {
    case 'b': return Label::b;
    case 'c': return Label::c;
    case 'r': return Label::r;
    case 'm': return Label::m;
    default: return std::nullopt;
  }
}

enum class FlagKind : unsigned char { free = 0, labeled = 1, invalid = 2 };

class PlanarTree {
 public:
  static PlanarTree vertex(Label label, std::vector<PlanarTree> children = {}) {
    auto n = std::make_shared<Node>();
    n->label = label;
    n->degree = 1;
    n->has_flags = false;
    for (const auto& ch : children) {
      n->degree += ch.degree();
      n->has_flags = n->has_flags || ch.has_flags();
    }
    n->children = std::move(children);
    n->hash = compute_hash(*n);
    return PlanarTree(std::move(n));
  }
  static PlanarTree flag() { return make_flag(FlagKind::free, std::nullopt); }
  static PlanarTree flag(RecFun f) { return make_flag(FlagKind::labeled, std::move(f)); }
  static PlanarTree invalid_flag() { return make_flag(FlagKind::invalid, std::nullopt); }

  bool is_flag() const { return node_->is_flag; }
  bool is_vertex() const { return !node_->is_flag; }
  Label label() const { return node_->label; }
  FlagKind flag_kind() const { return node_->flag_kind; }
  const std::optional<RecFun>& flag_function() const { return node_->fn; }
  std::span<const PlanarTree> children() const { return node_->children; }
  std::size_t arity() const { return node_->children.size(); }
  int degree() const { return node_->degree; }
  bool has_flags() const { return node_->has_flags; }
  std::size_t hash() const { return node_->hash; }

  /// Number of external input flags (leaves that are flags).
  int flag_count() const {
    if (is_flag()) return 1;
    int n = 0;
    for (const auto& ch : children()) n += ch.flag_count();
    return n;
  }

  /// Replaces the child at position i.
  PlanarTree with_child(std::size_t i, PlanarTree child) const {
    std::vector<PlanarTree> kids(children().begin(), children().end());
    kids.at(i) = std::move(child);
    return vertex(label(), std::move(kids));
  }

  friend std::strong_ordering compare(const PlanarTree& a, const PlanarTree& b);
  friend bool operator==(const PlanarTree& a, const PlanarTree& b) {
    return compare(a, b) == std::strong_ordering::equal;
  }
  friend std::strong_ordering operator<=>(const PlanarTree& a, const PlanarTree& b) {
    return compare(a, b);
  }

 private:
  struct Node {
    bool is_flag = false;
    Label label = Label::b;
    FlagKind flag_kind = FlagKind::free;
    std::optional<RecFun> fn;
    std::vector<PlanarTree> children;
    int degree = 0;
    bool has_flags = true;
    std::size_t hash = 0;
  };

  explicit PlanarTree(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static PlanarTree make_flag(FlagKind kind, std::optional<RecFun> fn) {
    auto n = std::make_shared<Node>();
    n->is_flag = true;
    n->flag_kind = kind;
    n->fn = std::move(fn);
    n->degree = 0;
    n->has_flags = true;
    n->hash = compute_hash(*n);
    return PlanarTree(std::move(n));
  }

  static std::size_t compute_hash(const Node& n) {
    std::size_t h = n.is_flag ? 0x9e3779b97f4a7c15ULL : 0x51ed270b27ULL;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::size_t>(n.label));
    mix(static_cast<std::size_t>(n.flag_kind));
    if (n.fn) mix(std::hash<std::string>{}(n.fn->str()));
    for (const auto& ch : n.children) mix(ch.hash());
    return h;
  }

  std::shared_ptr<const Node> node_;
};

/// Total order: degree, then flags before vertices, then label (b<c<r<m) or
/// flag kind and function text, then the child sequences lexicographically.
inline std::strong_ordering compare(const PlanarTree& a, const PlanarTree& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  if (auto c = b.is_flag() <=> a.is_flag(); c != 0) return c;
  if (a.is_flag()) {
    if (auto c = a.flag_kind() <=> b.flag_kind(); c != 0) return c;
    if (a.flag_kind() == FlagKind::labeled) return *a.flag_function() <=> *b.flag_function();
    return std::strong_ordering::equal;
  }
  if (auto c = a.label() <=> b.label(); c != 0) return c;
  const auto ka = a.children(), kb = b.children();
  const std::size_t n = std::min(ka.size(), kb.size());
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = compare(ka[i], kb[i]); c != 0) return c;
  return ka.size() <=> kb.size();
}

inline std::string render(const PlanarTree& t) {
  if (t.is_flag()) {
    switch (t.flag_kind()) {
      case FlagKind::free: return "#";
      case FlagKind::labeled: return "in(" + t.flag_function()->str() + ")";
      case FlagKind::invalid: return "in(?)";
    }
  }
  std::string out(1, label_char(t.label()));
  if (t.arity() == 0) return out;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    out += render(t.children()[i]);
  }
  return out + ')';
}

enum class Mode { nc, comm };

inline const char* mode_name(Mode m) { return m == Mode::nc ? "nc" : "comm"; }

/// An ordered sequence of trees; the empty forest is the unit.
class Forest {
 public:
  Forest() = default;
  explicit Forest(std::vector<PlanarTree> trees) : trees_(std::move(trees)) {
    for (const auto& t : trees_) degree_ += t.degree();
  }
  explicit Forest(PlanarTree t) : Forest(std::vector<PlanarTree>{std::move(t)}) {}

  std::span<const PlanarTree> trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  bool empty() const { return trees_.empty(); }
  int degree() const { return degree_; }
  const PlanarTree& operator[](std::size_t i) const { return trees_[i]; }

  friend Forest operator*(const Forest& a, const Forest& b) {
    std::vector<PlanarTree> ts;
    ts.reserve(a.size() + b.size());
    ts.insert(ts.end(), a.trees_.begin(), a.trees_.end());
    ts.insert(ts.end(), b.trees_.begin(), b.trees_.end());
    Forest f;
    f.trees_ = std::move(ts);
    f.degree_ = a.degree_ + b.degree_;
    return f;
  }

  friend bool operator==(const Forest& a, const Forest& b) {
    return a.degree_ == b.degree_ && a.trees_ == b.trees_;
  }
  /// Degree first, then lexicographic in the tree order.
  friend std::strong_ordering operator<=>(const Forest& a, const Forest& b) {
    if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
    return std::lexicographical_compare_three_way(a.trees_.begin(), a.trees_.end(),
                                                  b.trees_.begin(), b.trees_.end());
  }

  std::size_t hash() const {
    std::size_t h = trees_.size();
    for (const auto& t : trees_) h = h * 1000003u ^ t.hash();
    return h;
  }

 private:
  std::vector<PlanarTree> trees_;
  int degree_ = 0;
};

/// Identity in noncommutative mode; sorts the trees in commutative mode.
inline Forest canonicalize(Forest f, Mode mode) {
  if (mode == Mode::nc || f.size() < 2) return f;
  std::vector<PlanarTree> ts(f.trees().begin(), f.trees().end());
  std::stable_sort(ts.begin(), ts.end());
  return Forest(std::move(ts));
}

inline std::string render(const Forest& f) {
  if (f.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out += '*';
    out += render(f[i]);
  }
  return out;
}

inline int degree(const Forest& f) { return f.degree(); }

struct TreeHash {
  std::size_t operator()(const PlanarTree& t) const { return t.hash(); }
};
struct ForestHash {
  std::size_t operator()(const Forest& f) const { return f.hash(); }
};

}  // namespace flowhopf
