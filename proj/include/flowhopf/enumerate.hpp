#pragma once

// Exhaustive generation of basis trees and forests by degree.

#include "flowhopf/recfun.hpp"
#include "flowhopf/tree.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <map>
#include <random>
#include <vector>

namespace flowhopf {

enum class Shape {
  vertex,   // any number of children, no flags
  binary,   // b, c, r with two input slots, m with one; empty slots are free flags
  flagged,  // as binary, with empty slots labeled from a palette of functions
};

class TreeEnumerator {
 public:
  TreeEnumerator(Shape shape, std::vector<Label> labels, std::vector<RecFun> palette = {})
      : shape_(shape), labels_(std::move(labels)), palette_(std::move(palette)) {
    if (shape_ == Shape::flagged && palette_.empty())
      throw std::invalid_argument("flagged enumeration needs a nonempty palette");
  }

  /// All trees with exactly n vertices, in increasing tree order.
  const std::vector<PlanarTree>& trees(int n) {
    if (auto it = trees_.find(n); it != trees_.end()) return it->second;
    std::vector<PlanarTree> out;
    if (n >= 1) {
      for (Label l : labels_) {
        if (shape_ == Shape::vertex) {
          for (const Forest& kids : forests(n - 1, Mode::nc))
            out.push_back(PlanarTree::vertex(l, {kids.trees().begin(), kids.trees().end()}));
        } else {
          const int slots = l == Label::m ? 1 : 2;
          for (auto& kids : slot_fillings(slots, n - 1)) out.push_back(PlanarTree::vertex(l, std::move(kids)));
        }
      }
    }
    std::sort(out.begin(), out.end());
    return trees_.emplace(n, std::move(out)).first->second;
  }

  /// Forests of total degree n: sequences (nc) or sorted multisets (comm).
  std::vector<Forest> forests(int n, Mode mode) {
    std::vector<Forest> out;
    std::vector<PlanarTree> cur;
    build_forests(n, mode, cur, std::nullopt, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// All forests of degree 1..max_degree, ordered by degree then forest order.
  std::vector<Forest> forests_up_to(int max_degree, Mode mode) {
    std::vector<Forest> out;
    for (int d = 1; d <= max_degree; ++d) {
      auto f = forests(d, mode);
      out.insert(out.end(), f.begin(), f.end());
    }
    return out;
  }

  std::vector<PlanarTree> trees_up_to(int max_degree) {
    std::vector<PlanarTree> out;
    for (int d = 1; d <= max_degree; ++d) {
      const auto& t = trees(d);
      out.insert(out.end(), t.begin(), t.end());
    }
    return out;
  }

 private:
  std::vector<PlanarTree> leaves() const {
    std::vector<PlanarTree> out;
    if (shape_ == Shape::binary) {
      out.push_back(PlanarTree::flag());
    } else {
      for (const auto& f : palette_) out.push_back(PlanarTree::flag(f));
    }
    return out;
  }

  std::vector<std::vector<PlanarTree>> slot_fillings(int slots, int n) {
    std::vector<std::vector<PlanarTree>> out;
    if (slots == 0) {
      if (n == 0) out.emplace_back();
      return out;
    }
    for (int d = 0; d <= n; ++d) {
      const std::vector<PlanarTree> heads = d == 0 ? leaves() : trees(d);
      if (heads.empty()) continue;
      auto tails = slot_fillings(slots - 1, n - d);
      for (const auto& h : heads)
        for (const auto& tail : tails) {
          std::vector<PlanarTree> row{h};
          row.insert(row.end(), tail.begin(), tail.end());
          out.push_back(std::move(row));
        }
    }
    return out;
  }

  void build_forests(int n, Mode mode, std::vector<PlanarTree>& cur, const std::optional<PlanarTree>& floor,
                     std::vector<Forest>& out) {
    if (n == 0) {
      out.emplace_back(cur);
      return;
    }
    for (int d = 1; d <= n; ++d)
      for (const PlanarTree& t : trees(d)) {
        if (mode == Mode::comm && floor && t < *floor) continue;
        cur.push_back(t);
        build_forests(n - d, mode, cur, t, out);
        cur.pop_back();
      }
  }

  Shape shape_;
  std::vector<Label> labels_;
  std::vector<RecFun> palette_;
  std::map<int, std::vector<PlanarTree>> trees_;
};

/// Random tree with n vertices. Each vertex gets a random label and arity
/// (m is unary, others take 2..max_arity inputs); the n-1 remaining vertices
/// are spread over the input slots and empty slots become flags drawn from
/// the palette, or free flags when it is empty.
inline PlanarTree random_tree(std::mt19937_64& rng, int n, const std::vector<Label>& labels,
                              const std::vector<RecFun>& palette = {}, int max_arity = 2) {
  auto pick = [&rng](std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };
  if (n <= 0) return palette.empty() ? PlanarTree::flag() : PlanarTree::flag(palette[pick(palette.size())]);
  const Label l = labels[pick(labels.size())];
  const int k = l == Label::m ? 1 : std::uniform_int_distribution<int>(2, std::max(2, max_arity))(rng);
  std::vector<int> sizes(k, 0);
  for (int i = 0; i < n - 1; ++i) ++sizes[pick(k)];
  std::vector<PlanarTree> kids;
  for (int s : sizes) kids.push_back(random_tree(rng, s, labels, palette, max_arity));
  return PlanarTree::vertex(l, std::move(kids));
}

}  // namespace flowhopf
