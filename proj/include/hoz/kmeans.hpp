#pragma once

#include "hoz/core.hpp"

namespace hoz {

struct ClusterAssignment {
  std::vector<int> assignment;  // sample index -> cluster 0..K-1
  Mat centers;                  // K x dim, member means
};

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Sum of squared distances of each sample to its assigned center.
inline double kmeans_cost(const std::vector<Feature>& features,
                          const std::vector<int>& assignment, const Mat& centers) {
  double cost = 0.0;
  for (size_t i = 0; i < features.size(); ++i)
    cost += sq_dist(features[i], centers.row(assignment[i]));
  return cost;
}

namespace detail {

/// k-means++ seeding: first center uniform, then each next center drawn with
/// probability proportional to squared distance from the nearest chosen one.
/// All-zero weight mass (duplicate-heavy inputs) falls back to the lowest
/// unchosen index.
inline Mat seed_centers(const std::vector<Feature>& features, int k, SeededRng& rng) {
  size_t n = features.size();
  int dim = static_cast<int>(features[0].size());
  Mat centers(k, dim);
  std::vector<char> chosen(n, 0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  size_t first = rng.uniform_index(n);
  chosen[first] = 1;
  for (int j = 0; j < dim; ++j) centers(0, j) = features[first][j];

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(features[i], centers.row(c - 1)));
      if (!chosen[i]) total += d2[i];
    }
    size_t pick = n;
    if (total > 0.0) {
      double r = rng.next_double() * total;
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += d2[i];
        if (acc >= r) { pick = i; break; }
      }
    }
    if (pick == n)  // numeric tail or zero mass
      for (size_t i = 0; i < n; ++i)
        if (!chosen[i]) { pick = i; break; }
    chosen[pick] = 1;
    for (int j = 0; j < dim; ++j) centers(c, j) = features[pick][j];
  }
  return centers;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Deterministic given the rng
/// stream: nearest-center ties break to the lowest cluster index, empty
/// clusters seize the globally farthest sample (lowest sample index on
/// ties), and iteration stops when assignments are stable or after 300
/// rounds. Centers in the result are exact member means.
inline ClusterAssignment kmeans(const std::vector<Feature>& features, int k,
                                SeededRng& rng) {
  if (k < 1) throw Error("kmeans: k must be >= 1");
  if (features.size() < static_cast<size_t>(k))
    throw Error("kmeans: " + std::to_string(features.size()) + " samples < k=" +
                std::to_string(k));
  size_t n = features.size();
  int dim = static_cast<int>(features[0].size());
  for (const auto& f : features)
    if (static_cast<int>(f.size()) != dim) throw Error("kmeans: ragged features");

  Mat centers = detail::seed_centers(features, k, rng);
  std::vector<int> assignment(n, -1);
  std::vector<int> count(k, 0);

  auto assign_all = [&]() {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(features[i], centers.row(0));
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(features[i], centers.row(c));
        if (d < best_d) { best_d = d; best = c; }
      }
      if (assignment[i] != best) { assignment[i] = best; changed = true; }
    }
    return changed;
  };

  auto repair_and_count = [&]() {
    bool repaired = false;
    std::fill(count.begin(), count.end(), 0);
    for (int a : assignment) ++count[a];
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // seize the sample farthest from its current center, from a cluster
      // that can spare one
      size_t victim = n;
      double worst = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (count[assignment[i]] < 2) continue;
        double d = sq_dist(features[i], centers.row(assignment[i]));
        if (d > worst) { worst = d; victim = i; }
      }
      if (victim == n) throw Error("kmeans: cannot repair empty cluster");
      --count[assignment[victim]];
      assignment[victim] = c;
      ++count[c];
      repaired = true;
    }
    return repaired;
  };

  auto recompute_centers = [&]() {
    centers = Mat(k, dim);
    for (size_t i = 0; i < n; ++i)
      for (int j = 0; j < dim; ++j) centers(assignment[i], j) += features[i][j];
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < dim; ++j) centers(c, j) /= count[c];
  };

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = assign_all();
    changed |= repair_and_count();
    recompute_centers();
    if (!changed) break;
  }
  return {assignment, centers};
}

}  // namespace hoz
