#pragma once

#include "hoz/hoz_graph.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Node similarity
// ---------------------------------------------------------------------------

/// Distance between zone centers: Euclidean separation plus a reciprocal
/// dot-product term so that overlapping supports count as near even when
/// magnitudes differ. alpha keeps the reciprocal finite on disjoint supports.
inline double node_distance(std::span<const double> a, std::span<const double> b,
                            double alpha) {
  if (a.size() != b.size())
    throw Error("node_distance: dimension mismatch " + std::to_string(a.size()) +
                " vs " + std::to_string(b.size()));
  if (alpha <= 0.0) throw Error("node_distance: alpha must be positive");
  double sep = 0.0, dp = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sep += d * d;
    dp += a[i] * b[i];
  }
  return std::sqrt(sep) + 1.0 / (dp + alpha);
}

/// Matching weight between zone centers: reciprocal of node_distance.
inline double match_weight(std::span<const double> a, std::span<const double> b,
                           double alpha) {
  return 1.0 / node_distance(a, b, alpha);
}

// ---------------------------------------------------------------------------
// Maximum-weight perfect matching
// ---------------------------------------------------------------------------

struct Matching {
  std::vector<int> permutation;  // row k matched to column permutation[k]
  double total_weight = 0.0;
};

namespace detail {

/// Hungarian algorithm (potential form), maximizing. Returns the best total
/// over perfect assignments of the given rows to the given columns, summing
/// matched weights in ascending row order.
inline double hungarian_best(const Mat& w, const std::vector<int>& rows,
                             const std::vector<int>& cols,
                             std::vector<int>* assignment = nullptr) {
  int n = static_cast<int>(rows.size());
  if (n == 0) {
    if (assignment) assignment->clear();
    return 0.0;
  }
  const double inf = std::numeric_limits<double>::infinity();
  // minimize negated weights; 1-based arrays per the classic formulation
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  auto cost = [&](int i, int j) { return -w(rows[i - 1], cols[j - 1]); };

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += w(rows[i], cols[row_to_col[i]]);
  if (assignment) {
    assignment->resize(n);
    for (int i = 0; i < n; ++i) (*assignment)[i] = cols[row_to_col[i]];
  }
  return total;
}

}  // namespace detail

/// Maximum-weight perfect matching with a deterministic tie-break: among all
/// maximizing permutations, the lexicographically smallest. Found by fixing
/// each row's column greedily, keeping a candidate only when the reduced
/// problem still attains the full optimum.
inline Matching kuhn_munkres(const Mat& weights) {
  if (weights.rows != weights.cols) throw Error("kuhn_munkres: matrix not square");
  if (weights.rows < 1) throw Error("kuhn_munkres: empty matrix");
  for (double v : weights.a)
    if (!std::isfinite(v)) throw Error("kuhn_munkres: non-finite weight");

  int n = weights.rows;
  std::vector<int> rows, cols;
  for (int i = 0; i < n; ++i) { rows.push_back(i); cols.push_back(i); }

  Matching m;
  m.permutation.assign(n, -1);
  for (int level = 0; level < n; ++level) {
    int r = rows.front();
    std::vector<int> rest_rows(rows.begin() + 1, rows.end());
    int best_col = -1;
    double best_total = -std::numeric_limits<double>::infinity();
    for (int ci = 0; ci < static_cast<int>(cols.size()); ++ci) {
      std::vector<int> rest_cols = cols;
      rest_cols.erase(rest_cols.begin() + ci);
      double total = weights(r, cols[ci]) +
                     detail::hungarian_best(weights, rest_rows, rest_cols);
      if (total > best_total) {  // strict: first (lowest) column wins ties
        best_total = total;
        best_col = cols[ci];
      }
    }
    m.permutation[r] = best_col;
    rows.erase(rows.begin());
    cols.erase(std::find(cols.begin(), cols.end(), best_col));
  }
  m.total_weight = 0.0;
  for (int i = 0; i < n; ++i) m.total_weight += weights(i, m.permutation[i]);
  return m;
}

// ---------------------------------------------------------------------------
// Graph merging
// ---------------------------------------------------------------------------

/// Average-pool two graphs under a zone matching; the result keeps g1's node
/// indexing: node'_k = (n1_k + n2_{m(k)})/2, edge'(k,j) = mean of the matched
/// edges.
inline HozGraph merge_pair(const HozGraph& g1, const HozGraph& g2, const Matching& m) {
  if (g1.k() != g2.k() || g1.n() != g2.n())
    throw Error("merge_pair: graph shapes differ");
  int k = g1.k();
  if (static_cast<int>(m.permutation.size()) != k)
    throw Error("merge_pair: matching size mismatch");
  std::vector<char> seen(k, 0);
  for (int c : m.permutation) {
    if (c < 0 || c >= k || seen[c]) throw Error("merge_pair: matching not a bijection");
    seen[c] = 1;
  }

  HozGraph out = g1;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < g1.n(); ++j)
      out.nodes(i, j) = (g1.nodes(i, j) + g2.nodes(m.permutation[i], j)) / 2.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      out.edges(i, j) =
          (g1.edges(i, j) + g2.edges(m.permutation[i], m.permutation[j])) / 2.0;
  out.sample_count = g1.sample_count + g2.sample_count;
  return out;
}

/// Fold room graphs into one scene graph in the order given: each next room
/// is matched against the accumulator (match_weight + kuhn_munkres), then
/// average-pooled in. The order used is recorded in the result's metadata.
inline HozGraph build_scene_graph(const std::vector<HozGraph>& rooms, double alpha) {
  if (rooms.empty()) throw Error("build_scene_graph: no room graphs");
  HozGraph acc = rooms[0];
  std::vector<std::string> order = {rooms[0].room_id};
  for (size_t i = 1; i < rooms.size(); ++i) {
    const HozGraph& next = rooms[i];
    if (next.k() != acc.k() || next.n() != acc.n())
      throw Error("build_scene_graph: graph shapes differ at " + next.room_id);
    Mat w(acc.k(), acc.k());
    for (int a = 0; a < acc.k(); ++a)
      for (int b = 0; b < acc.k(); ++b)
        w(a, b) = match_weight(acc.nodes.row(a), next.nodes.row(b), alpha);
    Matching m = kuhn_munkres(w);
    acc = merge_pair(acc, next, m);
    order.push_back(next.room_id);
  }
  acc.scope = "scene";
  acc.room_id.clear();
  acc.alpha = alpha;
  acc.merge_order = std::move(order);
  validate_graph(acc);
  return acc;
}

// ---------------------------------------------------------------------------
// Global composite
// ---------------------------------------------------------------------------

/// The final navigation graph: one scene graph per scene category, keyed by
/// label. Scene graphs are never merged across scenes.
struct GraphSet {
  std::vector<HozGraph> graphs;  // ascending scene label

  bool has_scene(int scene_label) const {
    for (const auto& g : graphs)
      if (g.scene_label == scene_label) return true;
    return false;
  }
  const HozGraph& by_scene(int scene_label) const {
    for (const auto& g : graphs)
      if (g.scene_label == scene_label) return g;
    throw Error("graph set: no graph for scene " + std::to_string(scene_label));
  }
};

inline GraphSet build_global_graph(std::vector<HozGraph> scene_graphs) {
  GraphSet set;
  set.graphs = std::move(scene_graphs);
  std::sort(set.graphs.begin(), set.graphs.end(),
            [](const HozGraph& a, const HozGraph& b) {
              return a.scene_label < b.scene_label;
            });
  for (size_t i = 1; i < set.graphs.size(); ++i)
    if (set.graphs[i].scene_label == set.graphs[i - 1].scene_label)
      throw Error("graph set: duplicate scene label " +
                  std::to_string(set.graphs[i].scene_label));
  return set;
}

}  // namespace hoz
