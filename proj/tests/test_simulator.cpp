#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "hoz/simulator.hpp"
#include "support/oracles.hpp"

using namespace hoz;

namespace {

GridEnvironment open_room(int w, int d) {
  GridEnvironment env;
  env.room_id = "open";
  env.scene_label = 0;
  env.width = w;
  env.depth = d;
  env.walkable.assign(static_cast<size_t>(w) * d, 1);
  return env;
}

ObjectInstance obj(std::string_view cat, int x, int z, HeightBand b = HeightBand::Mid) {
  return {category_index(cat), x, z, b};
}

bool room_connected(GridEnvironment env) {
  env.objects = {obj("Fridge", 0, 0), obj("Sink", 0, 0), obj("Pan", 0, 0),
                 obj("Pot", 0, 0)};
  try {
    validate_environment(env);
    return true;
  } catch (const Error&) {
    return false;
  }
}

GridEnvironment random_room(SeededRng& rng, int w, int d) {
  GridEnvironment env = open_room(w, d);
  env.room_id = "rand";
  int knock = w * d / 4;
  for (int i = 0; i < knock; ++i) {
    int x = static_cast<int>(rng.uniform_int(0, w - 1));
    int z = static_cast<int>(rng.uniform_int(0, d - 1));
    if (!env.is_walkable(x, z)) continue;
    env.set_walkable(x, z, false);
    if (!room_connected(env)) env.set_walkable(x, z, true);
  }
  for (int c = 0; c < 5; ++c)
    env.objects.push_back({c, static_cast<int>(rng.uniform_int(0, w - 1)),
                           static_cast<int>(rng.uniform_int(0, d - 1)), HeightBand::Mid});
  return env;
}

}  // namespace

TEST_CASE("step dynamics", "[simulator]") {
  GridEnvironment env = open_room(3, 3);
  AgentState s{Pose{1, 1, 0, 0}, &env, 0, false};

  SECTION("MoveAhead advances along yaw 0 (+z)") {
    AgentState n = step(s, Action::MoveAhead);
    REQUIRE(n.pose == Pose{1, 2, 0, 0});
    REQUIRE(n.steps_taken == 1);
    REQUIRE_FALSE(n.terminated);
  }
  SECTION("MoveAhead into wall is a no-op") {
    env.set_walkable(1, 2, false);
    AgentState n = step(s, Action::MoveAhead);
    REQUIRE(n.pose == s.pose);
    REQUIRE(n.steps_taken == 1);
  }
  SECTION("MoveAhead off the edge is a no-op") {
    s.pose = Pose{1, 2, 0, 0};
    AgentState n = step(s, Action::MoveAhead);
    REQUIRE(n.pose == Pose{1, 2, 0, 0});
  }
  SECTION("rotations wrap modulo 360") {
    s.pose.yaw = 270;
    REQUIRE(step(s, Action::RotateRight).pose.yaw == 0);
    s.pose.yaw = 0;
    REQUIRE(step(s, Action::RotateLeft).pose.yaw == 270);
    AgentState back = step(step(s, Action::RotateLeft), Action::RotateRight);
    REQUIRE(back.pose == s.pose);
  }
  SECTION("pitch clamps to [-30, 30]") {
    AgentState up = step(s, Action::LookUp);
    REQUIRE(up.pose.pitch == 30);
    REQUIRE(step(up, Action::LookUp).pose.pitch == 30);
    AgentState down = step(s, Action::LookDown);
    REQUIRE(down.pose.pitch == -30);
    REQUIRE(step(down, Action::LookDown).pose.pitch == -30);
  }
  SECTION("Done terminates without moving") {
    AgentState n = step(s, Action::Done);
    REQUIRE(n.pose == s.pose);
    REQUIRE(n.terminated);
  }
}

TEST_CASE("field of view is an exact closed 45-degree cone", "[simulator]") {
  // straight ahead for each yaw
  REQUIRE(in_fov(0, 2, 0, 45));
  REQUIRE(in_fov(2, 0, 90, 45));
  REQUIRE(in_fov(0, -2, 180, 45));
  REQUIRE(in_fov(-2, 0, 270, 45));
  // behind
  REQUIRE_FALSE(in_fov(0, -2, 0, 45));
  REQUIRE_FALSE(in_fov(-2, 0, 90, 45));
  // exact 45-degree boundary is included, for every yaw
  REQUIRE(in_fov(1, 1, 0, 45));
  REQUIRE(in_fov(-1, 1, 0, 45));
  REQUIRE(in_fov(1, 1, 90, 45));
  REQUIRE(in_fov(1, -1, 90, 45));
  REQUIRE(in_fov(-1, -1, 180, 45));
  REQUIRE(in_fov(-1, 1, 270, 45));
  // just outside the cone
  REQUIRE_FALSE(in_fov(2, 1, 0, 45));
  REQUIRE_FALSE(in_fov(-2, 1, 0, 45));
  // own cell always visible
  REQUIRE(in_fov(0, 0, 0, 45));
  // half angle 90 admits sideways but not behind
  REQUIRE(in_fov(2, 0, 0, 90));
  REQUIRE(in_fov(-2, 0, 0, 90));
  REQUIRE_FALSE(in_fov(0, -1, 0, 90));
}

TEST_CASE("supercover traversal enumerates crossed cells", "[simulator]") {
  auto cells = supercover_cells(0, 0, 3, 0);
  REQUIRE(cells == std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});

  // exact diagonal passes through corners: both side cells appear
  cells = supercover_cells(0, 0, 2, 2);
  std::vector<std::pair<int, int>> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1},
                                           {2, 1}, {1, 2}, {2, 2}};
  REQUIRE(cells == want);

  // shallow slope
  cells = supercover_cells(0, 0, 4, 1);
  for (auto [x, z] : std::vector<std::pair<int, int>>{{0, 0}, {4, 1}})
    REQUIRE(std::find(cells.begin(), cells.end(), std::pair{x, z}) != cells.end());

  // degenerate single cell
  REQUIRE(supercover_cells(2, 3, 2, 3) ==
          std::vector<std::pair<int, int>>{{2, 3}});
}

TEST_CASE("line of sight blocking", "[simulator]") {
  GridEnvironment env = open_room(9, 9);
  REQUIRE(line_of_sight(env, 4, 4, 4, 8));
  env.set_walkable(4, 6, false);
  REQUIRE_FALSE(line_of_sight(env, 4, 4, 4, 8));
  // endpoints never block
  REQUIRE(line_of_sight(env, 4, 4, 4, 6));
  env.set_walkable(4, 4, false);
  REQUIRE(line_of_sight(env, 4, 4, 4, 5));

  // diagonal corner: blocking either side cell blocks the ray
  GridEnvironment env2 = open_room(9, 9);
  env2.set_walkable(5, 4, false);
  REQUIRE_FALSE(line_of_sight(env2, 4, 4, 6, 6));
  GridEnvironment env3 = open_room(9, 9);
  env3.set_walkable(4, 5, false);
  REQUIRE_FALSE(line_of_sight(env3, 4, 4, 6, 6));
}

TEST_CASE("observe sets bits for visible categories only", "[simulator]") {
  GridEnvironment env = open_room(15, 15);
  env.objects = {
      obj("Fridge", 5, 7),        // ahead at distance 2
      obj("Sink", 5, 3),          // behind
      obj("Microwave", 8, 9),     // distance exactly 5 within cone
      obj("Toaster", 9, 9),       // distance sqrt(32) > 5
      obj("Pan", 6, 6),           // 45-degree boundary
      obj("Pot", 7, 6),           // outside cone
      obj("Kettle", 5, 9, HeightBand::High),  // high band invisible at pitch 0
      obj("Bowl", 4, 6, HeightBand::Low),     // low band visible at pitch 0
  };
  Pose pose{5, 5, 0, 0};
  VisibilityParams params;
  Feature bag = observe_bag(env, pose, params);

  REQUIRE(bag[category_index("Fridge")] == 1.0);
  REQUIRE(bag[category_index("Sink")] == 0.0);
  REQUIRE(bag[category_index("Microwave")] == 1.0);
  REQUIRE(bag[category_index("Toaster")] == 0.0);
  REQUIRE(bag[category_index("Pan")] == 1.0);
  REQUIRE(bag[category_index("Pot")] == 0.0);
  REQUIRE(bag[category_index("Kettle")] == 0.0);
  REQUIRE(bag[category_index("Bowl")] == 1.0);

  SECTION("pitch up reveals the high band and hides low/mid") {
    pose.pitch = 30;
    Feature up = observe_bag(env, pose, params);
    REQUIRE(up[category_index("Kettle")] == 1.0);
    REQUIRE(up[category_index("Fridge")] == 0.0);
    REQUIRE(up[category_index("Bowl")] == 0.0);
  }
  SECTION("pitch down keeps only the low band") {
    pose.pitch = -30;
    Feature down = observe_bag(env, pose, params);
    REQUIRE(down[category_index("Bowl")] == 1.0);
    REQUIRE(down[category_index("Fridge")] == 0.0);
  }
  SECTION("occlusion clears the bit") {
    env.set_walkable(5, 6, false);
    Feature blocked = observe_bag(env, pose, params);
    REQUIRE(blocked[category_index("Fridge")] == 0.0);
  }
  SECTION("duplicates recorded once") {
    env.objects.push_back(obj("Fridge", 6, 7));
    Feature two = observe_bag(env, pose, params);
    REQUIRE(two[category_index("Fridge")] == 1.0);
  }
  SECTION("observe is pure") {
    Observation a = observe(env, pose, params, true);
    Observation b = observe(env, pose, params, true);
    REQUIRE(a.bag == b.bag);
    REQUIRE(a.frame.conf == b.frame.conf);
    REQUIRE(a.frame.boxes == b.frame.boxes);
    REQUIRE(a.frame.appearance == b.frame.appearance);
  }
}

TEST_CASE("detection frame geometry", "[simulator]") {
  GridEnvironment env = open_room(15, 15);
  env.objects = {obj("Fridge", 5, 7), obj("Fridge", 5, 6), obj("Pan", 6, 6)};
  Pose pose{5, 5, 0, 0};
  Observation obs = observe(env, pose, {});
  int f = category_index("Fridge");

  // nearest instance wins: distance 1 so box height 1, full frame vertically
  REQUIRE(obs.frame.conf[f] == 1.0);
  REQUIRE(obs.frame.boxes(f, 0) == Catch::Approx(0.0));
  REQUIRE(obs.frame.boxes(f, 1) == Catch::Approx(0.0));
  REQUIRE(obs.frame.boxes(f, 2) == Catch::Approx(1.0));
  REQUIRE(obs.frame.boxes(f, 3) == Catch::Approx(1.0));

  // 45-degree object: center x at the right image edge
  int p = category_index("Pan");
  double h = 1.0 / std::sqrt(2.0);
  REQUIRE(obs.frame.boxes(p, 2) == Catch::Approx(1.0));         // clamped
  REQUIRE(obs.frame.boxes(p, 0) == Catch::Approx(1.0 - h / 2.0));

  // invisible rows all zero
  int s = category_index("Sink");
  REQUIRE(obs.frame.conf[s] == 0.0);
  for (int j = 0; j < 4; ++j) REQUIRE(obs.frame.boxes(s, j) == 0.0);

  // box height crosses 0.6 exactly at the success ball boundary
  GridEnvironment env2 = open_room(15, 15);
  env2.objects = {obj("Fridge", 5, 7)};  // distance 2
  Observation far = observe(env2, pose, {});
  REQUIRE(far.frame.boxes(f, 3) - far.frame.boxes(f, 1) == Catch::Approx(0.5));
  env2.objects = {obj("Fridge", 6, 6)};  // distance sqrt(2)
  Observation near = observe(env2, pose, {});
  REQUIRE(near.frame.boxes(f, 3) - near.frame.boxes(f, 1) ==
          Catch::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("appearance matrix is lazy, constant, and zero for invisible rows", "[simulator]") {
  GridEnvironment env = open_room(9, 9);
  env.objects = {obj("Fridge", 4, 6)};
  Pose pose{4, 4, 0, 0};

  Observation lazy = observe(env, pose, {});
  REQUIRE(lazy.frame.appearance.rows == 0);

  Observation full = observe(env, pose, {}, true);
  REQUIRE(full.frame.appearance.rows == kCategoryCount);
  REQUIRE(full.frame.appearance.cols == kAppearanceDim);
  int f = category_index("Fridge");
  REQUIRE(l2_norm(full.frame.appearance.row(f)) == Catch::Approx(1.0));
  REQUIRE(full.frame.appearance.row(f)[0] == appearance_table()(f, 0));
  int s = category_index("Sink");
  REQUIRE(l2_norm(full.frame.appearance.row(s)) == 0.0);
}

TEST_CASE("success requires visibility and proximity", "[simulator]") {
  GridEnvironment env = open_room(15, 15);
  int f = category_index("Fridge");
  VisibilityParams params;

  env.objects = {obj("Fridge", 5, 6)};  // distance 1 ahead
  REQUIRE(success_check(env, Pose{5, 5, 0, 0}, f, params));

  env.objects = {obj("Fridge", 5, 8)};  // distance 3: visible but too far
  REQUIRE(observe_bag(env, Pose{5, 5, 0, 0}, params)[f] == 1.0);
  REQUIRE_FALSE(success_check(env, Pose{5, 5, 0, 0}, f, params));

  env.objects = {obj("Fridge", 5, 6)};  // facing away
  REQUIRE_FALSE(success_check(env, Pose{5, 5, 180, 0}, f, params));

  // within radius but occluded at the corner
  env.objects = {obj("Fridge", 6, 6)};
  env.set_walkable(6, 5, false);
  REQUIRE_FALSE(success_check(env, Pose{5, 5, 0, 0}, f, params));
  REQUIRE(success_check(env, Pose{5, 5, 0, 0}, f, params) ==
          (observe_bag(env, Pose{5, 5, 0, 0}, params)[f] == 1.0 && false));
}

TEST_CASE("success implies the target bit is set", "[simulator]") {
  SeededRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GridEnvironment env = random_room(rng, 8, 8);
    for (int z = 0; z < 8; ++z)
      for (int x = 0; x < 8; ++x) {
        if (!env.is_walkable(x, z)) continue;
        for (int yaw : {0, 90, 180, 270}) {
          Pose pose{x, z, yaw, 0};
          if (success_check(env, pose, 0, {}))
            REQUIRE(observe_bag(env, pose, {})[0] == 1.0);
        }
      }
  }
}

TEST_CASE("shortest path length matches an independent relaxation oracle", "[simulator]") {
  VisibilityParams params;

  SECTION("base cases") {
    GridEnvironment env = open_room(9, 9);
    env.objects = {obj("Fridge", 4, 4)};
    int f = category_index("Fridge");
    // already satisfying for some yaw
    REQUIRE(shortest_path_length(env, Pose{4, 5, 180, 0}, f, params) == 0);
    // adjacent cell satisfies after one move
    GridEnvironment corridor = open_room(9, 1);
    corridor.objects = {obj("Fridge", 0, 0)};
    REQUIRE(shortest_path_length(corridor, Pose{2, 0, 0, 0}, f, params) == 1);
    REQUIRE(shortest_path_length(corridor, Pose{3, 0, 0, 0}, f, params) == 2);
    // absent target
    REQUIRE_FALSE(shortest_path_length(env, Pose{4, 5, 0, 0},
                                       category_index("Sink"), params).has_value());
  }

  SECTION("random 8x8 rooms agree with the oracle") {
    SeededRng rng(21);
    int compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
      GridEnvironment env = random_room(rng, 8, 8);
      std::vector<std::pair<int, int>> goals;
      for (int z = 0; z < 8; ++z)
        for (int x = 0; x < 8; ++x)
          if (env.is_walkable(x, z) && cell_satisfies(env, x, z, 0, params))
            goals.push_back({x, z});
      for (int z = 0; z < 8; ++z)
        for (int x = 0; x < 8; ++x) {
          if (!env.is_walkable(x, z)) continue;
          auto got = shortest_path_length(env, Pose{x, z, 0, 0}, 0, params);
          auto want = oracle::relaxation_distance(env, x, z, goals);
          REQUIRE(got == want);
          ++compared;
        }
    }
    REQUIRE(compared > 500);
  }
}

TEST_CASE("reset spawns uniformly and never on a success pose", "[simulator]") {
  SECTION("uniform over a 4-cell walkable region") {
    GridEnvironment env = open_room(13, 13);
    for (int z = 0; z < 13; ++z)
      for (int x = 0; x < 13; ++x) env.set_walkable(x, z, false);
    env.set_walkable(0, 0, true);
    env.set_walkable(1, 0, true);
    env.set_walkable(0, 1, true);
    env.set_walkable(1, 1, true);
    env.objects = {obj("Fridge", 12, 12), obj("Sink", 11, 12),
                   obj("Microwave", 12, 11), obj("Toaster", 11, 11)};
    SeededRng rng(3);
    std::map<std::pair<int, int>, int> counts;
    int target = category_index("Fridge");
    for (int i = 0; i < 10000; ++i) {
      AgentState s = reset(env, target, rng);
      counts[{s.pose.x, s.pose.z}]++;
      REQUIRE(s.pose.pitch == 0);
      REQUIRE(s.pose.yaw % 90 == 0);
    }
    REQUIRE(counts.size() == 4);
    for (const auto& [cell, n] : counts) {
      REQUIRE(n / 10000.0 >= 0.22);
      REQUIRE(n / 10000.0 <= 0.28);
    }
  }

  SECTION("resampling avoids immediate success") {
    GridEnvironment env = open_room(3, 3);
    env.objects = {obj("Fridge", 1, 1), obj("Sink", 0, 0), obj("Pan", 2, 2),
                   obj("Pot", 0, 2)};
    SeededRng rng(5);
    int target = category_index("Fridge");
    for (int i = 0; i < 200; ++i) {
      AgentState s = reset(env, target, rng);
      REQUIRE_FALSE(success_check(s, target, {}));
    }
  }

  SECTION("absent target raises") {
    GridEnvironment env = open_room(3, 3);
    env.objects = {obj("Fridge", 1, 1)};
    SeededRng rng(5);
    REQUIRE_THROWS_AS(reset(env, category_index("Sink"), rng), Error);
  }
}

TEST_CASE("sweep enumerates cell x yaw at pitch zero in stable order", "[simulator]") {
  GridEnvironment env = open_room(2, 2);
  env.objects = {obj("Fridge", 0, 0)};
  auto samples = sweep_observations(env);
  REQUIRE(samples.size() == 16);

  // row-major over z then x, yaw ascending
  REQUIRE(samples[0].location == Pose{0, 0, 0, 0});
  REQUIRE(samples[1].location == Pose{0, 0, 90, 0});
  REQUIRE(samples[4].location == Pose{1, 0, 0, 0});
  REQUIRE(samples[8].location == Pose{0, 1, 0, 0});
  REQUIRE(samples[15].location == Pose{1, 1, 270, 0});

  for (const auto& s : samples) {
    REQUIRE(s.location.pitch == 0);
    REQUIRE(s.feature == observe_bag(env, s.location, {}));
  }

  // deterministic across calls
  auto again = sweep_observations(env);
  for (size_t i = 0; i < samples.size(); ++i) {
    REQUIRE(again[i].location == samples[i].location);
    REQUIRE(again[i].feature == samples[i].feature);
  }

  // zero-feature samples retained
  GridEnvironment blocked = open_room(2, 2);
  blocked.objects = {obj("Fridge", 0, 0, HeightBand::High)};
  auto empties = sweep_observations(blocked);
  REQUIRE(empties.size() == 16);
  int zero_count = 0;
  for (const auto& s : empties)
    if (l2_norm(s.feature) == 0.0) ++zero_count;
  REQUIRE(zero_count == 16);

  // walls excluded
  GridEnvironment holed = open_room(2, 2);
  holed.set_walkable(1, 1, false);
  holed.objects = {obj("Fridge", 0, 0)};
  REQUIRE(sweep_observations(holed).size() == 12);
}

TEST_CASE("episode records validate pose/action structure", "[simulator]") {
  EpisodeRecord rec;
  rec.env_id = "open";
  rec.target = 0;
  rec.actions = {Action::MoveAhead, Action::RotateLeft, Action::MoveAhead, Action::Done};
  rec.poses = {Pose{0, 0, 0, 0}, Pose{0, 1, 0, 0}, Pose{0, 1, 270, 0},
               Pose{0, 1, 270, 0},  // blocked MoveAhead: no position change
               Pose{0, 1, 270, 0}};
  rec.actual_length = 1;
  REQUIRE_NOTHROW(validate_record(rec));

  rec.actual_length = 2;
  REQUIRE_THROWS_AS(validate_record(rec), Error);
  rec.actual_length = 1;
  rec.poses.pop_back();
  REQUIRE_THROWS_AS(validate_record(rec), Error);
}
