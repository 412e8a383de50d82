#pragma once

#include <map>
#include <optional>

#include "hoz/core.hpp"
#include "hoz/environment.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// What the agent can see, plus the success radius used by success_check.
struct VisibilityParams {
  int max_range = 5;          // grid units, inclusive
  int fov_half_angle = 45;    // degrees either side of facing, inclusive
  double success_radius = 1.5;
  // Which height bands each camera pitch exposes. The environment model has
  // no real vertical geometry, so this map IS the pitch semantics: looking
  // down reveals only low objects, level gaze sees low+mid, looking up sees
  // only high ones.
  std::map<int, std::vector<HeightBand>> pitch_band_map = {
      {-30, {HeightBand::Low}},
      {0, {HeightBand::Low, HeightBand::Mid}},
      {30, {HeightBand::High}},
  };

  bool band_visible(int pitch, HeightBand band) const {
    auto it = pitch_band_map.find(pitch);
    if (it == pitch_band_map.end()) return false;
    for (HeightBand b : it->second)
      if (b == band) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Observation types
// ---------------------------------------------------------------------------

/// Ground-truth detector output for one view. `appearance` is only
/// materialized when requested (it is a large constant-per-category matrix).
struct DetectionFrame {
  Mat boxes;       // N x 4, rows [x_min, y_min, x_max, y_max] in [0,1]; zero when invisible
  Feature conf;    // N, 1.0 for visible categories else 0.0
  Mat appearance;  // N x 512 when materialized, 0 x 0 otherwise
};

inline constexpr int kAppearanceDim = 512;

/// Fixed per-category appearance rows (unit L2 norm), independent of any run
/// seed so detector identity is stable across the whole corpus.
inline const Mat& appearance_table() {
  static const Mat table = [] {
    Mat t(kCategoryCount, kAppearanceDim);
    for (int c = 0; c < kCategoryCount; ++c) {
      SeededRng rng = SeededRng(0xA99EA7ULL).derive("appearance", static_cast<uint64_t>(c));
      double norm2 = 0.0;
      for (int j = 0; j < kAppearanceDim; ++j) {
        double v = rng.next_double();
        t(c, j) = v;
        norm2 += v * v;
      }
      double inv = 1.0 / std::sqrt(norm2);
      for (int j = 0; j < kAppearanceDim; ++j) t(c, j) *= inv;
    }
    return t;
  }();
  return table;
}

struct ObservationSample {
  Feature feature;  // bag-of-objects, entries in {0,1}
  Pose location;
};

struct Observation {
  Feature bag;  // length N, {0,1}
  DetectionFrame frame;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Rotate an (dx, dz) offset into the frame of a yaw so that facing becomes
/// +z. Exact for the four compass yaws.
inline std::pair<int, int> rotate_to_facing(int dx, int dz, int yaw) {
  switch (((yaw % 360) + 360) % 360) {
    case 0:   return {dx, dz};
    case 90:  return {-dz, dx};
    case 180: return {-dx, -dz};
    case 270: return {dz, -dx};
  }
  throw Error("yaw must be a multiple of 90");
}

/// True when the offset lies inside the horizontal field of view. The default
/// 45-degree half angle and the 90-degree case use exact integer tests; other
/// angles fall back to a cosine comparison.
inline bool in_fov(int dx, int dz, int yaw, int fov_half_angle) {
  auto [rx, rz] = rotate_to_facing(dx, dz, yaw);
  if (rx == 0 && rz == 0) return true;  // own cell
  if (fov_half_angle == 45) return rz >= std::abs(rx);
  if (fov_half_angle == 90) return rz >= 0;
  double cos_fov = std::cos(fov_half_angle * std::acos(-1.0) / 180.0);
  return rz >= cos_fov * std::sqrt(double(rx) * rx + double(rz) * rz) - 1e-12;
}

/// All cells a segment between the centers of two cells passes through,
/// including both side cells when it crosses exactly through a corner
/// (supercover traversal, integer arithmetic throughout).
inline std::vector<std::pair<int, int>> supercover_cells(int x0, int z0, int x1, int z1) {
  std::vector<std::pair<int, int>> cells;
  int x = x0, y = z0;
  int dx = x1 - x0, dy = z1 - z0;
  cells.push_back({x, y});
  int xstep = (dx > 0) ? 1 : -1;
  int ystep = (dy > 0) ? 1 : -1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  int ddx = 2 * dx, ddy = 2 * dy;
  if (ddx >= ddy) {
    int error = dx, errorprev = dx;
    for (int i = 0; i < dx; ++i) {
      x += xstep;
      error += ddy;
      if (error > ddx) {
        y += ystep;
        error -= ddx;
        if (error + errorprev < ddx) cells.push_back({x, y - ystep});
        else if (error + errorprev > ddx) cells.push_back({x - xstep, y});
        else { cells.push_back({x, y - ystep}); cells.push_back({x - xstep, y}); }
      }
      cells.push_back({x, y});
      errorprev = error;
    }
  } else {
    int error = dy, errorprev = dy;
    for (int i = 0; i < dy; ++i) {
      y += ystep;
      error += ddx;
      if (error > ddy) {
        x += xstep;
        error -= ddy;
        if (error + errorprev < ddy) cells.push_back({x - xstep, y});
        else if (error + errorprev > ddy) cells.push_back({x, y - ystep});
        else { cells.push_back({x - xstep, y}); cells.push_back({x, y - ystep}); }
      }
      cells.push_back({x, y});
      errorprev = error;
    }
  }
  return cells;
}

/// Line of sight from the agent cell to a target cell: blocked when any
/// intermediate supercover cell is non-walkable. The endpoints never block
/// (objects may sit on furniture cells).
inline bool line_of_sight(const GridEnvironment& env, int x0, int z0, int x1, int z1) {
  auto cells = supercover_cells(x0, z0, x1, z1);
  for (const auto& [cx, cz] : cells) {
    if (cx == x0 && cz == z0) continue;
    if (cx == x1 && cz == z1) continue;
    if (!env.is_walkable(cx, cz)) return false;
  }
  return true;
}

/// Full per-instance visibility test: range, field of view, height band at
/// the current pitch, and line of sight.
inline bool instance_visible(const GridEnvironment& env, const Pose& pose,
                             const ObjectInstance& obj, const VisibilityParams& params) {
  int dx = obj.x - pose.x, dz = obj.z - pose.z;
  if (dx * dx + dz * dz > params.max_range * params.max_range) return false;
  if (!in_fov(dx, dz, pose.yaw, params.fov_half_angle)) return false;
  if (!params.band_visible(pose.pitch, obj.band)) return false;
  return line_of_sight(env, pose.x, pose.z, obj.x, obj.z);
}

// ---------------------------------------------------------------------------
// Agent dynamics
// ---------------------------------------------------------------------------

struct AgentState {
  Pose pose;
  const GridEnvironment* env = nullptr;
  int steps_taken = 0;
  bool terminated = false;
};

/// Apply one action. Illegal moves (blocked MoveAhead, pitch at its limit)
/// are silent no-ops. Done leaves the pose unchanged and terminates.
inline AgentState step(const AgentState& state, Action action) {
  AgentState next = state;
  next.steps_taken = state.steps_taken + 1;
  switch (action) {
    case Action::MoveAhead: {
      auto [dx, dz] = yaw_delta(state.pose.yaw);
      int nx = state.pose.x + dx, nz = state.pose.z + dz;
      if (state.env->is_walkable(nx, nz)) {
        next.pose.x = nx;
        next.pose.z = nz;
      }
      break;
    }
    case Action::RotateLeft:
      next.pose.yaw = ((state.pose.yaw - 90) % 360 + 360) % 360;
      break;
    case Action::RotateRight:
      next.pose.yaw = (state.pose.yaw + 90) % 360;
      break;
    case Action::LookUp:
      next.pose.pitch = std::min(30, state.pose.pitch + 30);
      break;
    case Action::LookDown:
      next.pose.pitch = std::max(-30, state.pose.pitch - 30);
      break;
    case Action::Done:
      next.terminated = true;
      break;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Observation
// ---------------------------------------------------------------------------

/// Bag-of-objects vector for a pose: bit c set iff some instance of category
/// c is visible. Cheap path used by sweeps and action lookahead.
inline Feature observe_bag(const GridEnvironment& env, const Pose& pose,
                           const VisibilityParams& params) {
  Feature bag(kCategoryCount, 0.0);
  for (const auto& obj : env.objects) {
    if (bag[obj.category] != 0.0) continue;  // recorded once per category
    if (instance_visible(env, pose, obj, params)) bag[obj.category] = 1.0;
  }
  return bag;
}

/// Full observation: bag plus detection frame. When several instances of one
/// category are visible, the frame keeps the nearest one (ground-truth
/// confidences are all 1, so nearest stands in for highest-scoring).
/// `with_appearance` materializes the N x 512 appearance matrix.
inline Observation observe(const GridEnvironment& env, const Pose& pose,
                           const VisibilityParams& params,
                           bool with_appearance = false) {
  Observation obs;
  obs.bag.assign(kCategoryCount, 0.0);
  obs.frame.boxes = Mat(kCategoryCount, 4);
  obs.frame.conf.assign(kCategoryCount, 0.0);

  std::vector<double> best_d2(kCategoryCount, -1.0);
  std::vector<const ObjectInstance*> best(kCategoryCount, nullptr);
  for (const auto& obj : env.objects) {
    if (!instance_visible(env, pose, obj, params)) continue;
    double dx = obj.x - pose.x, dz = obj.z - pose.z;
    double d2 = dx * dx + dz * dz;
    if (best[obj.category] == nullptr || d2 < best_d2[obj.category]) {
      best[obj.category] = &obj;
      best_d2[obj.category] = d2;
    }
  }

  for (int c = 0; c < kCategoryCount; ++c) {
    if (best[c] == nullptr) continue;
    obs.bag[c] = 1.0;
    obs.frame.conf[c] = 1.0;
    const ObjectInstance& obj = *best[c];
    auto [rx, rz] = rotate_to_facing(obj.x - pose.x, obj.z - pose.z, pose.yaw);
    double dist = std::sqrt(best_d2[c]);
    // azimuth in [-fov, +fov] maps linearly onto [0, 1] horizontally
    double azimuth = (rx == 0 && rz == 0) ? 0.0
                     : std::atan2(double(rx), double(rz)) * 180.0 / std::acos(-1.0);
    double cx = 0.5 + azimuth / (2.0 * params.fov_half_angle);
    // nearer objects project taller: h = 1/max(dist,1), in (0,1]
    double h = 1.0 / std::max(dist, 1.0);
    // band sets the vertical center: low objects sit lower in the image
    double cy = obj.band == HeightBand::Low ? 0.75 : obj.band == HeightBand::High ? 0.25 : 0.5;
    obs.frame.boxes(c, 0) = std::clamp(cx - h / 2.0, 0.0, 1.0);
    obs.frame.boxes(c, 1) = std::clamp(cy - h / 2.0, 0.0, 1.0);
    obs.frame.boxes(c, 2) = std::clamp(cx + h / 2.0, 0.0, 1.0);
    obs.frame.boxes(c, 3) = std::clamp(cy + h / 2.0, 0.0, 1.0);
  }

  if (with_appearance) {
    obs.frame.appearance = Mat(kCategoryCount, kAppearanceDim);
    const Mat& table = appearance_table();
    for (int c = 0; c < kCategoryCount; ++c) {
      if (best[c] == nullptr) continue;
      for (int j = 0; j < kAppearanceDim; ++j)
        obs.frame.appearance(c, j) = table(c, j);
    }
  }
  return obs;
}

inline Observation observe(const AgentState& state, const VisibilityParams& params,
                           bool with_appearance = false) {
  return observe(*state.env, state.pose, params, with_appearance);
}

// ---------------------------------------------------------------------------
// Success and shortest paths
// ---------------------------------------------------------------------------

/// True iff some instance of the target category is visible from the pose
/// and lies within the success radius.
inline bool success_check(const GridEnvironment& env, const Pose& pose, int target,
                          const VisibilityParams& params) {
  double r2 = params.success_radius * params.success_radius;
  for (const auto& obj : env.objects) {
    if (obj.category != target) continue;
    double dx = obj.x - pose.x, dz = obj.z - pose.z;
    if (dx * dx + dz * dz > r2) continue;
    if (instance_visible(env, pose, obj, params)) return true;
  }
  return false;
}

inline bool success_check(const AgentState& state, int target,
                          const VisibilityParams& params) {
  return success_check(*state.env, state.pose, target, params);
}

/// True iff the cell satisfies success_check for some yaw and pitch.
inline bool cell_satisfies(const GridEnvironment& env, int x, int z, int target,
                           const VisibilityParams& params) {
  for (int yaw : {0, 90, 180, 270})
    for (int pitch : {-30, 0, 30})
      if (success_check(env, Pose{x, z, yaw, pitch}, target, params)) return true;
  return false;
}

/// Minimal MoveAhead count from the start cell to any cell from which the
/// target can be captured (some yaw/pitch). Rotations are free. Empty when
/// the target is unreachable from the start cell.
inline std::optional<int> shortest_path_length(const GridEnvironment& env,
                                               const Pose& start, int target,
                                               const VisibilityParams& params) {
  if (!env.has_category(target)) return std::nullopt;
  std::vector<int> dist(env.walkable.size(), -1);
  std::queue<std::pair<int, int>> q;
  dist[static_cast<size_t>(start.z) * env.width + start.x] = 0;
  q.push({start.x, start.z});
  const int dxs[4] = {1, -1, 0, 0};
  const int dzs[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [x, z] = q.front();
    q.pop();
    int d = dist[static_cast<size_t>(z) * env.width + x];
    if (cell_satisfies(env, x, z, target, params)) return d;
    for (int k = 0; k < 4; ++k) {
      int nx = x + dxs[k], nz = z + dzs[k];
      if (!env.is_walkable(nx, nz)) continue;
      size_t idx = static_cast<size_t>(nz) * env.width + nx;
      if (dist[idx] >= 0) continue;
      dist[idx] = d + 1;
      q.push({nx, nz});
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Spawning and exploration
// ---------------------------------------------------------------------------

/// Uniform spawn over walkable cells x 4 yaws, pitch 0, rejecting poses that
/// already satisfy success for the target.
inline AgentState reset(const GridEnvironment& env, int target, SeededRng& rng,
                        const VisibilityParams& params = {}) {
  if (!env.has_category(target))
    throw Error("reset: target " + category_name(target) + " absent from " + env.room_id);
  std::vector<std::pair<int, int>> cells;
  for (int z = 0; z < env.depth; ++z)
    for (int x = 0; x < env.width; ++x)
      if (env.is_walkable(x, z)) cells.push_back({x, z});
  static const int yaws[4] = {0, 90, 180, 270};
  for (int attempt = 0; attempt < 100000; ++attempt) {
    auto [x, z] = cells[rng.uniform_index(cells.size())];
    int yaw = yaws[rng.uniform_index(4)];
    AgentState state{Pose{x, z, yaw, 0}, &env, 0, false};
    if (!success_check(state, target, params)) return state;
  }
  throw Error("reset: no spawn avoids immediate success in " + env.room_id);
}

/// Exhaustive deterministic exploration: one sample per walkable cell x 4
/// yaws at pitch 0, row-major over z then x, yaw ascending. All-zero
/// features are retained.
inline std::vector<ObservationSample> sweep_observations(const GridEnvironment& env,
                                                         const VisibilityParams& params = {}) {
  std::vector<ObservationSample> samples;
  for (int z = 0; z < env.depth; ++z)
    for (int x = 0; x < env.width; ++x) {
      if (!env.is_walkable(x, z)) continue;
      for (int yaw : {0, 90, 180, 270}) {
        Pose pose{x, z, yaw, 0};
        samples.push_back({observe_bag(env, pose, params), pose});
      }
    }
  return samples;
}

// ---------------------------------------------------------------------------
// Episode record
// ---------------------------------------------------------------------------

/// Result of one navigation episode, the unit all metrics consume.
struct EpisodeRecord {
  std::string env_id;
  int target = 0;
  std::vector<Action> actions;
  std::vector<Pose> poses;  // length = actions.size() + 1
  bool success = false;
  std::optional<int> optimal_length;  // L*, empty when unreachable
  int actual_length = 0;              // position-changing MoveAhead count
};

/// Recompute actual_length from the pose trace and check structural
/// invariants; throws on violation.
inline void validate_record(const EpisodeRecord& rec) {
  if (rec.poses.size() != rec.actions.size() + 1)
    throw Error("episode record: pose/action length mismatch");
  int moved = 0;
  for (size_t i = 0; i < rec.actions.size(); ++i)
    if (rec.actions[i] == Action::MoveAhead &&
        !(rec.poses[i + 1].x == rec.poses[i].x && rec.poses[i + 1].z == rec.poses[i].z))
      ++moved;
  if (moved != rec.actual_length)
    throw Error("episode record: actual_length " + std::to_string(rec.actual_length) +
                " != recomputed " + std::to_string(moved));
}

}  // namespace hoz
