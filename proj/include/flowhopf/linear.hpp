#pragma once

// Sparse exact Gaussian elimination over a basis indexed by arbitrary ordered
// keys (forests, forest pairs, operad trees, ...).

#include "flowhopf/rational.hpp"

#include <map>
#include <optional>
#include <vector>

namespace flowhopf {

/// Incremental row-echelon basis. Each stored row is a vector in the key
/// basis together with its expression in the original generators, so that a
/// reduction certificate is available for membership queries.
template <class Key>
class SparseEliminator {
 public:
  using Vec = std::map<Key, Rational>;

  explicit SparseEliminator(std::size_t generators = 0) : ngen_(generators) {}

  /// Adds generator number `index` (indices need not be dense but must be
  /// < the declared count). Returns false if it was dependent.
  bool add(const Vec& v, std::size_t index) {
    Vec row = v;
    std::map<std::size_t, Rational> combo{{index, Rational(1)}};
    reduce(row, combo);
    if (row.empty()) return false;
    const Key pivot = row.begin()->first;
    const Rational lead = row.begin()->second;
    for (auto& [k, c] : row) c /= lead;
    for (auto& [k, c] : combo) c /= lead;
    rows_.emplace(pivot, Row{std::move(row), std::move(combo)});
    return true;
  }

  std::size_t rank() const { return rows_.size(); }

  /// Coefficients c with sum c_i g_i = target, or nullopt if the residual is
  /// nonzero.
  std::optional<std::vector<Rational>> solve(const Vec& target) const {
    Vec row = target;
    std::map<std::size_t, Rational> combo;
    reduce(row, combo);
    if (!row.empty()) return std::nullopt;
    std::vector<Rational> out(ngen_);
    for (auto& [i, c] : combo) {
      if (i >= out.size()) out.resize(i + 1);
      out[i] = -c;
    }
    return out;
  }

  /// Residual of target modulo the span; zero iff target is in the span.
  Vec residual(const Vec& target) const {
    Vec row = target;
    std::map<std::size_t, Rational> combo;
    reduce(row, combo);
    return row;
  }

  bool contains(const Vec& target) const { return residual(target).empty(); }

 private:
  struct Row {
    Vec vec;
    std::map<std::size_t, Rational> combo;
  };

  // Eliminates every pivot occurring in row; combo tracks the subtracted
  // generator combination.
  void reduce(Vec& row, std::map<std::size_t, Rational>& combo) const {
    auto it = row.begin();
    while (it != row.end()) {
      auto piv = rows_.find(it->first);
      if (piv == rows_.end()) {
        ++it;
        continue;
      }
      const Rational f = it->second;
      const Key key = it->first;
      for (const auto& [k, c] : piv->second.vec) axpy(row, k, -f * c);
      for (const auto& [i, c] : piv->second.combo) axpy(combo, i, -f * c);
      it = row.upper_bound(key);
    }
  }

  template <class M, class K>
  static void axpy(M& m, const K& k, const Rational& c) {
    if (c.is_zero()) return;
    auto [pos, fresh] = m.try_emplace(k, c);
    if (!fresh) {
      pos->second += c;
      if (pos->second.is_zero()) m.erase(pos);
    }
  }

  std::size_t ngen_;
  std::map<Key, Row> rows_;
};

/// One-shot membership: coefficients expressing target in the generators or
/// nullopt ("not in span").
template <class Key>
std::optional<std::vector<Rational>> solve_linear_membership(
    const std::map<Key, Rational>& target, const std::vector<std::map<Key, Rational>>& gens) {
  SparseEliminator<Key> elim(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) elim.add(gens[i], i);
  return elim.solve(target);
}

}  // namespace flowhopf
