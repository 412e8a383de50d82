#pragma once

#include "hoz/gcn.hpp"
#include "hoz/metrics.hpp"
#include "hoz/runtime.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class PolicyMode {
  Hoz,           // guide = updated embedding of the planned sub-goal zone
  HozTarget,     // guide = updated embedding of the target zone (no sub-goals)
  GreedyTarget,  // guide = one-hot of the target category (no graph guidance)
  Random,        // uniform over all actions
};

inline const char* policy_mode_name(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Hoz: return "hoz";
    case PolicyMode::HozTarget: return "hoz-target";
    case PolicyMode::GreedyTarget: return "greedy-target";
    case PolicyMode::Random: return "random";
  }
  throw Error("bad policy mode");
}

inline PolicyMode policy_mode_from_name(const std::string& name) {
  if (name == "hoz") return PolicyMode::Hoz;
  if (name == "hoz-target") return PolicyMode::HozTarget;
  if (name == "greedy-target") return PolicyMode::GreedyTarget;
  if (name == "random") return PolicyMode::Random;
  throw Error("unknown policy mode: " + name);
}

/// Deterministic stand-in for a trained action policy. Non-stop actions are
/// scored by one-step lookahead: similarity of the next view to a guide
/// vector, a bonus for bringing the target into view, and a penalty for
/// walking into walls. Stopping is scored by target proximity plus the done
/// reminder and wins only past a confidence threshold.
struct PolicyConfig {
  PolicyMode mode = PolicyMode::Hoz;
  double beta = 0.6;            // done-reminder gain
  double done_threshold = 0.3;  // minimum adjusted score for stopping
  double w_target = 0.5;        // bonus when the target is visible after a move
  double wall_penalty = 1.25;   // exceeds max cosine so blocked moves never win
  double w_near = 2.0;          // stop score when the target looks close
  double near_h = 0.6;          // box height at the success boundary
  double forward_bias = 0.05;   // nudge toward actual progress on weak signal
  double reverse_penalty = 0.5; // discourage undoing the previous rotation
  double alpha = 0.1;           // localization distance regularizer
  double lambda = 0.5;          // online update rate
  int lookahead_depth = 1;      // documented; only depth 1 is implemented
  bool loop_escape = true;      // break rotation loops with a forward move
  VisibilityParams visibility;
};

// ---------------------------------------------------------------------------
// Action scoring
// ---------------------------------------------------------------------------

/// Lookahead order doubles as the tie-break order.
inline const std::array<Action, 5>& lookahead_order() {
  static const std::array<Action, 5> order = {
      Action::MoveAhead, Action::RotateLeft, Action::RotateRight, Action::LookUp,
      Action::LookDown};
  return order;
}

/// Add the reminder term to the stop action's score; everything else is
/// untouched.
inline std::array<double, kActionCount> done_reminder(
    std::array<double, kActionCount> scores, int target, const Feature& confidences,
    double beta) {
  if (beta < 0.0) throw Error("done_reminder: beta must be non-negative");
  if (target < 0 || target >= static_cast<int>(confidences.size()))
    throw Error("done_reminder: bad target index");
  scores[static_cast<int>(Action::Done)] += beta * confidences[target];
  return scores;
}

namespace detail {

inline double box_height(const DetectionFrame& frame, int category) {
  return frame.boxes(category, 3) - frame.boxes(category, 1);
}

/// The action that exactly undoes another, if any.
inline bool undoes(Action a, Action b) {
  return (a == Action::RotateLeft && b == Action::RotateRight) ||
         (a == Action::RotateRight && b == Action::RotateLeft) ||
         (a == Action::LookUp && b == Action::LookDown) ||
         (a == Action::LookDown && b == Action::LookUp);
}

}  // namespace detail

/// Pick the next action. The guide vector is the policy's only steering
/// input; modes differ solely in what they pass here.
inline Action decide_action(const Observation& obs, const AgentState& state,
                            const Feature& guide, int target,
                            const PolicyConfig& cfg,
                            std::span<const Action> history, SeededRng& rng) {
  if (cfg.mode == PolicyMode::Random)
    return static_cast<Action>(rng.uniform_index(kActionCount));

  std::array<double, kActionCount> scores{};
  for (Action a : lookahead_order()) {
    AgentState next = step(state, a);
    Observation look = observe(*state.env, next.pose, cfg.visibility);
    double s = cosine(look.bag, guide);
    if (look.frame.conf[target] > 0.0) s += cfg.w_target;
    if (next.pose == state.pose)
      s -= cfg.wall_penalty;
    else if (a == Action::MoveAhead)
      s += cfg.forward_bias;
    if (!history.empty() && detail::undoes(a, history.back()))
      s -= cfg.reverse_penalty;  // no rotate/look dithering
    scores[static_cast<int>(a)] = s;
  }
  bool near = obs.frame.conf[target] > 0.0 &&
              detail::box_height(obs.frame, target) >= cfg.near_h;
  scores[static_cast<int>(Action::Done)] = near ? cfg.w_near : 0.0;
  scores = done_reminder(scores, target, obs.frame.conf, cfg.beta);

  double best_move = -std::numeric_limits<double>::infinity();
  Action best_action = Action::MoveAhead;
  for (Action a : lookahead_order()) {
    double s = scores[static_cast<int>(a)];
    if (s > best_move) {  // strict: earlier actions win ties
      best_move = s;
      best_action = a;
    }
  }
  double done_score = scores[static_cast<int>(Action::Done)];
  if (done_score >= cfg.done_threshold && done_score > best_move)
    return Action::Done;

  if (cfg.loop_escape && history.size() >= 8) {
    bool stalled = true;
    for (size_t i = history.size() - 8; i < history.size(); ++i)
      stalled &= history[i] != Action::MoveAhead;
    if (stalled && step(state, Action::MoveAhead).pose != state.pose)
      return Action::MoveAhead;
  }
  return best_action;
}

// ---------------------------------------------------------------------------
// Episode loop
// ---------------------------------------------------------------------------

/// Planner state recorded at every step.
struct StepTrace {
  int step = 0;
  int current_zone = 0;
  int target_zone = 0;
  int sub_goal = 0;
  double product = 0.0;
  bool target_supported = false;
  bool unreachable = false;
  std::vector<int> path;
  double zone_norm = 0.0;  // magnitude of the selected zone encoding
};

struct EpisodeResult {
  EpisodeRecord record;
  std::vector<StepTrace> trace;
};

/// One navigation episode: observe, localize, blend the observation into the
/// graph, re-plan on zone changes, score actions, step — until the policy
/// stops or the budget runs out.
inline EpisodeResult run_episode(const GridEnvironment& env, int target,
                                 const HozGraph& scene_graph,
                                 const GcnParams& params, const PolicyConfig& cfg,
                                 SeededRng& rng, int budget = 100) {
  if (budget < 0) throw Error("run_episode: negative budget");
  AgentState agent = reset(env, target, rng, cfg.visibility);

  EpisodeResult out;
  out.record.env_id = env.room_id;
  out.record.target = target;
  out.record.poses.push_back(agent.pose);
  out.record.optimal_length =
      shortest_path_length(env, agent.pose, target, cfg.visibility);

  EpisodeGraphState graph_state(scene_graph, cfg.lambda);
  Mat e_hat = normalize_edges(scene_graph.edges);
  PlanResult plan;
  int planned_current = -1, planned_target = -1;

  for (int t = 0; t < budget; ++t) {
    Observation obs = observe(env, agent.pose, cfg.visibility);
    int zc = localize_current_zone(obs.bag, graph_state.graph, cfg.alpha);
    update_graph(graph_state, zc, obs.bag);
    TargetZone zt = localize_target_zone(target, graph_state.graph);
    if (zc != planned_current || zt.zone != planned_target) {
      plan = plan_path(graph_state.graph, zc, zt.zone);
      planned_current = zc;
      planned_target = zt.zone;
    }
    int sub = select_sub_goal(plan);
    ZoneEncoding enc = zone_forward(e_hat, graph_state.graph.nodes, params, sub);

    Feature guide;
    switch (cfg.mode) {
      case PolicyMode::Hoz: {
        auto row = graph_state.graph.nodes.row(sub);
        guide.assign(row.begin(), row.end());
        break;
      }
      case PolicyMode::HozTarget: {
        auto row = graph_state.graph.nodes.row(zt.zone);
        guide.assign(row.begin(), row.end());
        break;
      }
      case PolicyMode::GreedyTarget:
        guide = one_hot(target, graph_state.graph.n());
        break;
      case PolicyMode::Random:
        guide.assign(graph_state.graph.n(), 0.0);
        break;
    }

    StepTrace trace;
    trace.step = t;
    trace.current_zone = zc;
    trace.target_zone = zt.zone;
    trace.sub_goal = sub;
    trace.product = plan.product;
    trace.target_supported = zt.supported;
    trace.unreachable = plan.unreachable;
    trace.path = plan.path;
    trace.zone_norm = l2_norm(enc.selected);
    out.trace.push_back(std::move(trace));

    Action action = decide_action(obs, agent, guide, target, cfg,
                                  out.record.actions, rng);
    out.record.actions.push_back(action);
    agent = step(agent, action);
    out.record.poses.push_back(agent.pose);
    if (agent.terminated) break;
  }

  out.record.success = !out.record.actions.empty() &&
                       out.record.actions.back() == Action::Done &&
                       success_check(env, agent.pose, target, cfg.visibility);
  int moved = 0;
  for (size_t i = 0; i < out.record.actions.size(); ++i) {
    const Pose& a = out.record.poses[i];
    const Pose& b = out.record.poses[i + 1];
    if (out.record.actions[i] == Action::MoveAhead && (a.x != b.x || a.z != b.z))
      ++moved;
  }
  out.record.actual_length = moved;
  validate_record(out.record);
  return out;
}

}  // namespace hoz
