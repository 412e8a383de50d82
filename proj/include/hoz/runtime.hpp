#pragma once

#include "hoz/matching.hpp"

#include <queue>

namespace hoz {

// ---------------------------------------------------------------------------
// Per-episode graph state
// ---------------------------------------------------------------------------

/// Working copy of a scene graph for one episode. Node rows drift toward the
/// agent's observations; edges stay frozen. reset() restores the pre-learned
/// graph bit-for-bit.
struct EpisodeGraphState {
  HozGraph graph;
  HozGraph pristine;
  double lambda = 0.5;
  int step = 0;

  EpisodeGraphState() = default;
  EpisodeGraphState(const HozGraph& base, double lambda_)
      : graph(base), pristine(base), lambda(lambda_) {
    if (lambda < 0.0 || lambda > 1.0)
      throw Error("episode state: lambda must be in [0,1]");
  }
  void reset() {
    graph = pristine;
    step = 0;
  }
};

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

/// Current zone = node whose center is closest to the live bag feature.
inline int localize_current_zone(const Feature& f_t, const HozGraph& graph,
                                 double alpha) {
  if (graph.k() < 1) throw Error("localize: empty graph");
  int best = 0;
  double best_d = node_distance(f_t, graph.nodes.row(0), alpha);
  for (int k = 1; k < graph.k(); ++k) {
    double d = node_distance(f_t, graph.nodes.row(k), alpha);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = k;
    }
  }
  return best;
}

struct TargetZone {
  int zone = 0;
  bool supported = false;  // false when no node carries any mass for the category
};

/// Target zone = node with the largest coordinate for the goal category.
inline TargetZone localize_target_zone(int category, const HozGraph& graph) {
  if (category < 0 || category >= graph.n())
    throw Error("localize: bad category index " + std::to_string(category));
  if (graph.k() < 1) throw Error("localize: empty graph");
  TargetZone out;
  double best = graph.nodes(0, category);
  for (int k = 1; k < graph.k(); ++k) {
    double v = graph.nodes(k, category);
    if (v > best) {
      best = v;
      out.zone = k;
    }
  }
  out.supported = best > 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Online update
// ---------------------------------------------------------------------------

/// Blend the live observation into the current zone's row; every other row
/// (and all edges) stays bit-identical.
inline void update_graph(EpisodeGraphState& state, int current_zone,
                         const Feature& f_t) {
  if (current_zone < 0 || current_zone >= state.graph.k())
    throw Error("update: zone index out of range");
  if (static_cast<int>(f_t.size()) != state.graph.n())
    throw Error("update: feature dimension mismatch");
  double lam = state.lambda;
  for (int j = 0; j < state.graph.n(); ++j) {
    double& cell = state.graph.nodes(current_zone, j);
    cell = lam * f_t[j] + (1.0 - lam) * cell;
  }
  ++state.step;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

struct PlanResult {
  std::vector<int> path;  // zone indices, current first, target last
  int sub_goal = 0;
  double product = 0.0;  // product of edge probabilities along the path
  bool unreachable = false;
};

/// Most-reliable route between zones: maximize the product of edge
/// probabilities over simple paths, i.e. a shortest path under -log(e) with
/// zero-probability edges dropped. Disconnection degrades to a direct hop
/// with product 0, flagged.
inline PlanResult plan_path(const HozGraph& graph, int current, int target) {
  int k = graph.k();
  if (current < 0 || current >= k || target < 0 || target >= k)
    throw Error("plan: zone index out of range");

  PlanResult out;
  if (current == target) {
    out.path = {current};
    out.sub_goal = current;
    out.product = 1.0;
    return out;
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(k, inf);
  std::vector<int> parent(k, -1);
  std::vector<char> done(k, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[current] = 0.0;
  heap.push({0.0, current});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (int v = 0; v < k; ++v) {
      double e = graph.edges(u, v);
      if (e <= 0.0 || done[v]) continue;
      double nd = d - std::log(e);
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
        heap.push({nd, v});
      }
    }
  }

  if (dist[target] == inf) {
    out.path = {current, target};
    out.sub_goal = target;
    out.product = 0.0;
    out.unreachable = true;
    return out;
  }

  for (int v = target; v != -1; v = parent[v]) out.path.push_back(v);
  std::reverse(out.path.begin(), out.path.end());
  out.product = 1.0;
  for (size_t i = 1; i < out.path.size(); ++i)
    out.product *= graph.edges(out.path[i - 1], out.path[i]);
  out.sub_goal = out.path.size() >= 2 ? out.path[1] : current;
  return out;
}

inline int select_sub_goal(const PlanResult& plan) {
  if (plan.path.empty()) throw Error("sub-goal: empty plan");
  return plan.path.size() >= 2 ? plan.path[1] : plan.path[0];
}

// ---------------------------------------------------------------------------
// Scene recognition
// ---------------------------------------------------------------------------

enum class SceneRecognition { Oracle, Nearest };

inline SceneRecognition scene_recognition_from_name(const std::string& name) {
  if (name == "oracle") return SceneRecognition::Oracle;
  if (name == "nearest") return SceneRecognition::Nearest;
  throw Error("unknown scene recognition mode: " + name);
}

/// Pick which scene graph to navigate with. Oracle mode trusts the
/// environment's label; nearest mode scores each scene by the best
/// node-to-sample distance across the exploration sweep.
inline int recognize_scene(const std::vector<Feature>& samples, const GraphSet& set,
                           SceneRecognition mode, int true_label, double alpha) {
  if (set.graphs.empty()) throw Error("recognize: empty graph collection");
  if (mode == SceneRecognition::Oracle) {
    if (!set.has_scene(true_label))
      throw Error("recognize: no graph for scene " + std::to_string(true_label));
    return true_label;
  }
  if (samples.empty()) throw Error("recognize: no samples");
  int best_scene = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& g : set.graphs) {
    double scene_d = std::numeric_limits<double>::infinity();
    for (const auto& f : samples)
      for (int k = 0; k < g.k(); ++k)
        scene_d = std::min(scene_d, node_distance(f, g.nodes.row(k), alpha));
    if (scene_d < best_d) {  // strict: ties keep the lowest label (sorted set)
      best_d = scene_d;
      best_scene = g.scene_label;
    }
  }
  return best_scene;
}

}  // namespace hoz
