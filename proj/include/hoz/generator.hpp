#pragma once

#include "hoz/core.hpp"
#include "hoz/environment.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Scene templates
// ---------------------------------------------------------------------------

/// Palette for one scene category: object groups that are co-placed in
/// disjoint regions of the room, so clustering has recoverable structure.
struct SceneTemplate {
  int scene_label = 0;
  std::vector<std::vector<int>> groups;  // category indices
  int min_size = 8;
  int max_size = 11;
};

namespace detail {
inline std::vector<int> cats(std::initializer_list<const char*> names) {
  std::vector<int> out;
  for (const char* n : names) {
    int c = category_index(n);
    if (c < 0) throw Error(std::string("unknown template category: ") + n);
    out.push_back(c);
  }
  return out;
}
}  // namespace detail

/// Scene palettes partition the 22 categories: no category appears in two
/// scenes, which keeps nearest-node scene recognition well posed.
inline const std::vector<SceneTemplate>& scene_templates() {
  using detail::cats;
  static const std::vector<SceneTemplate> templates = {
      {scene_index("kitchen"),
       {cats({"Fridge", "Microwave", "Toaster"}),
        cats({"Sink", "Pot", "Pan"}),
        cats({"StoveBurner", "Kettle", "CoffeeMachine"})},
       15, 19},
      {scene_index("living_room"),
       {cats({"Television", "RemoteControl"}),
        cats({"FloorLamp", "Chair"}),
        cats({"Laptop"})},
       15, 19},
      {scene_index("bedroom"),
       {cats({"AlarmClock", "DeskLamp"}), cats({"Book", "CellPhone"})},
       13, 17},
      {scene_index("bathroom"),
       {cats({"Bowl", "Plate"}), cats({"GarbageCan", "LightSwitch"})},
       11, 15},
  };
  return templates;
}

/// Fixed mounting height per category; floor clutter sits in the low band.
inline HeightBand category_band(int category) {
  static const std::vector<HeightBand> bands = [] {
    std::vector<HeightBand> b(kCategoryCount, HeightBand::Mid);
    for (const char* name : {"Chair", "FloorLamp", "GarbageCan"})
      b[category_index(name)] = HeightBand::Low;
    return b;
  }();
  if (category < 0 || category >= kCategoryCount)
    throw Error("category_band: bad category");
  return bands[category];
}

inline const SceneTemplate& scene_template(int scene_label) {
  for (const auto& t : scene_templates())
    if (t.scene_label == scene_label) return t;
  throw Error("no template for scene " + std::to_string(scene_label));
}

// ---------------------------------------------------------------------------
// Procedural rooms
// ---------------------------------------------------------------------------

/// Planted group id per object for a generated room, keyed by object index in
/// the room's canonical object order. Used by clustering-quality tests.
struct GeneratedRoom {
  GridEnvironment env;
  std::vector<int> planted_group;  // parallel to env.objects
};

namespace detail {

/// Try to carve one wall segment attached to an edge; reverts when the
/// walkable region would disconnect. Walls stay clear of the corner regions
/// where object groups live.
inline void add_wall(GridEnvironment& env, SeededRng& rng, int inset) {
  bool vertical = rng.uniform_index(2) == 0;
  int w = env.width, d = env.depth;
  int lo = inset, hi = (vertical ? w : d) - 1 - inset;
  if (lo > hi) return;  // room too small for interior walls
  int coord = static_cast<int>(rng.uniform_int(lo, hi));
  int span = vertical ? d : w;
  int len = static_cast<int>(rng.uniform_int(span / 2, span - 3));
  bool from_low_edge = rng.uniform_index(2) == 0;

  std::vector<std::pair<int, int>> carved;
  for (int i = 0; i < len; ++i) {
    int along = from_low_edge ? i : span - 1 - i;
    int x = vertical ? coord : along;
    int z = vertical ? along : coord;
    if (env.is_walkable(x, z)) {
      env.set_walkable(x, z, false);
      carved.push_back({x, z});
    }
  }
  if (!walkable_connected(env))
    for (auto [x, z] : carved) env.set_walkable(x, z, true);
}

/// Full partition wall with a two-cell doorway: splits the room into
/// chambers whose contents are only visible through the gap. Reverts when
/// the walkable region would disconnect (e.g. the doorway lands on an
/// existing wall).
inline void add_partition(GridEnvironment& env, SeededRng& rng, int inset) {
  bool vertical = rng.uniform_index(2) == 0;
  int w = env.width, d = env.depth;
  int lo = inset, hi = (vertical ? w : d) - 1 - inset;
  if (lo > hi) return;
  int coord = static_cast<int>(rng.uniform_int(lo, hi));
  int span = vertical ? d : w;
  int door = static_cast<int>(rng.uniform_int(1, span - 3));

  std::vector<std::pair<int, int>> carved;
  for (int along = 0; along < span; ++along) {
    if (along == door || along == door + 1) continue;
    int x = vertical ? coord : along;
    int z = vertical ? along : coord;
    if (env.is_walkable(x, z)) {
      env.set_walkable(x, z, false);
      carved.push_back({x, z});
    }
  }
  if (!walkable_connected(env))
    for (auto [x, z] : carved) env.set_walkable(x, z, true);
}

}  // namespace detail

/// Generate one room for a scene template: connected walkable rectangle with
/// 1-2 interior wall segments, and the template's object groups placed in
/// disjoint corner regions. Deterministic in the rng stream.
inline GeneratedRoom generate_room(int scene_label, SeededRng& rng,
                                   std::pair<int, int> size_range = {0, 0},
                                   const std::string& room_id = "") {
  const SceneTemplate& tmpl = scene_template(scene_label);
  int lo = size_range.first > 0 ? size_range.first : tmpl.min_size;
  int hi = size_range.second > 0 ? size_range.second : tmpl.max_size;
  if (lo < 8)
    throw Error("generate_room: size range too small to place object groups (min 8)");
  if (lo > hi) throw Error("generate_room: empty size range");

  GridEnvironment env;
  env.scene_label = scene_label;
  env.room_id = room_id.empty() ? scene_name(scene_label) + "_tmp" : room_id;
  env.width = static_cast<int>(rng.uniform_int(lo, hi));
  env.depth = static_cast<int>(rng.uniform_int(lo, hi));
  env.walkable.assign(static_cast<size_t>(env.width) * env.depth, 1);

  // group regions: Chebyshev balls around inset corner anchors; the radius
  // shrinks in small rooms so regions keep at least a 3-cell separation
  int radius = std::min(env.width, env.depth) >= 12 ? 2 : 1;
  int wall_inset = radius + 3;  // walls never touch a group region

  // larger rooms are compartmentalized: full partitions with doorways make
  // other chambers invisible until the agent finds the gap
  int partitions =
      std::min(env.width, env.depth) >= 13 ? static_cast<int>(rng.uniform_int(1, 2)) : 0;
  for (int i = 0; i < partitions; ++i) detail::add_partition(env, rng, wall_inset);
  int n_walls = static_cast<int>(rng.uniform_int(1, partitions > 0 ? 1 : 2));
  for (int i = 0; i < n_walls; ++i) detail::add_wall(env, rng, wall_inset);

  std::vector<std::pair<int, int>> anchors = {
      {2, 2},
      {env.width - 3, 2},
      {2, env.depth - 3},
      {env.width - 3, env.depth - 3}};
  rng.shuffle(anchors);
  if (static_cast<int>(tmpl.groups.size()) > static_cast<int>(anchors.size()))
    throw Error("generate_room: more groups than corner anchors");

  struct Placed {
    ObjectInstance obj;
    int group;
  };
  std::vector<Placed> placed;
  for (size_t g = 0; g < tmpl.groups.size(); ++g) {
    auto [ax, az] = anchors[g];
    for (int cat : tmpl.groups[g]) {
      // candidate walkable cells near the anchor, widening if walls ate them
      std::vector<std::pair<int, int>> cells;
      for (int r = radius; cells.empty() && r <= std::max(env.width, env.depth); ++r)
        for (int z = az - r; z <= az + r; ++z)
          for (int x = ax - r; x <= ax + r; ++x)
            if (env.is_walkable(x, z)) cells.push_back({x, z});
      auto [x, z] = cells[rng.uniform_index(cells.size())];
      placed.push_back({{cat, x, z, category_band(cat)}, static_cast<int>(g)});
    }
  }

  std::sort(placed.begin(), placed.end(),
            [](const Placed& a, const Placed& b) { return object_less(a.obj, b.obj); });
  GeneratedRoom out;
  out.env = env;
  for (const auto& p : placed) {
    out.env.objects.push_back(p.obj);
    out.planted_group.push_back(p.group);
  }
  validate_environment(out.env);
  return out;
}

inline GridEnvironment generate_environment(int scene_label, SeededRng& rng,
                                            std::pair<int, int> size_range = {0, 0},
                                            const std::string& room_id = "") {
  return generate_room(scene_label, rng, size_range, room_id).env;
}

// ---------------------------------------------------------------------------
// Dataset manifest
// ---------------------------------------------------------------------------

inline constexpr int kRoomsPerScene = 30;
inline constexpr int kTrainPerScene = 20;
inline constexpr int kValPerScene = 5;

inline const std::string& split_for_index(int index) {
  static const std::string train = "train", val = "val", test = "test";
  if (index < kTrainPerScene) return train;
  if (index < kTrainPerScene + kValPerScene) return val;
  return test;
}

struct ManifestEntry {
  std::string room_id;
  int scene_label = 0;
  std::string split;
  std::string relpath;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> select(const std::string& split, int scene_label = -1) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
      if (e.split == split && (scene_label < 0 || e.scene_label == scene_label))
        out.push_back(e);
    return out;
  }
};

// Format:
//   hozmanifest 1
//   rooms <count>
//   <room_id> <scene_name> <split> <relpath>
//   end

inline std::string serialize_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "hozmanifest 1\n";
  out << "rooms " << m.entries.size() << "\n";
  for (const auto& e : m.entries)
    out << e.room_id << " " << scene_name(e.scene_label) << " " << e.split << " "
        << e.relpath << "\n";
  out << "end\n";
  return out.str();
}

inline DatasetManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line))
      throw Error(std::string("manifest parse: missing ") + what);
    return line;
  };
  if (next_line("header") != "hozmanifest 1")
    throw Error("manifest parse: bad header '" + line + "'");
  int count = 0;
  {
    std::istringstream ls(next_line("rooms line"));
    std::string kw;
    ls >> kw >> count;
    if (kw != "rooms" || ls.fail() || count < 0)
      throw Error("manifest parse: bad rooms line '" + line + "'");
  }
  DatasetManifest m;
  for (int i = 0; i < count; ++i) {
    std::istringstream ls(next_line("manifest row"));
    ManifestEntry e;
    std::string scene;
    ls >> e.room_id >> scene >> e.split >> e.relpath;
    if (ls.fail()) throw Error("manifest parse: bad row '" + line + "'");
    e.scene_label = scene_index(scene);
    if (e.scene_label < 0) throw Error("manifest parse: unknown scene '" + scene + "'");
    if (e.split != "train" && e.split != "val" && e.split != "test")
      throw Error("manifest parse: unknown split '" + e.split + "'");
    m.entries.push_back(e);
  }
  if (next_line("end marker") != "end")
    throw Error("manifest parse: expected 'end', got '" + line + "'");
  return m;
}

}  // namespace hoz
