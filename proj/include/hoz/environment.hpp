#pragma once

#include <fstream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "hoz/core.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Scene categories
// ---------------------------------------------------------------------------

inline constexpr int kSceneCount = 4;

inline const std::vector<std::string>& scene_names() {
  static const std::vector<std::string> names = {"kitchen", "living_room",
                                                 "bedroom", "bathroom"};
  return names;
}

inline int scene_index(std::string_view name) {
  const auto& names = scene_names();
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    if (names[i] == name) return i;
  return -1;
}

inline const std::string& scene_name(int index) {
  const auto& names = scene_names();
  if (index < 0 || index >= static_cast<int>(names.size()))
    throw Error("scene index out of range: " + std::to_string(index));
  return names[index];
}

// ---------------------------------------------------------------------------
// Environment model
// ---------------------------------------------------------------------------

/// Vertical placement band of an object; which bands are visible depends on
/// the agent's camera pitch.
enum class HeightBand { Low, Mid, High };

inline const std::string& band_name(HeightBand b) {
  static const std::vector<std::string> names = {"low", "mid", "high"};
  return names[static_cast<int>(b)];
}

inline HeightBand band_from_name(std::string_view name) {
  if (name == "low") return HeightBand::Low;
  if (name == "mid") return HeightBand::Mid;
  if (name == "high") return HeightBand::High;
  throw Error("unknown height band: " + std::string(name));
}

struct ObjectInstance {
  int category = 0;  // index into category_names()
  int x = 0;
  int z = 0;
  HeightBand band = HeightBand::Mid;

  bool operator==(const ObjectInstance&) const = default;
};

/// Canonical object order used when serializing: by category, then x, z, band.
inline bool object_less(const ObjectInstance& a, const ObjectInstance& b) {
  if (a.category != b.category) return a.category < b.category;
  if (a.x != b.x) return a.x < b.x;
  if (a.z != b.z) return a.z < b.z;
  return static_cast<int>(a.band) < static_cast<int>(b.band);
}

/// A rectangular grid room: walkable mask, placed object instances, scene
/// label. Immutable once validated.
struct GridEnvironment {
  std::string room_id;
  int scene_label = 0;
  int width = 0;   // x in [0, width)
  int depth = 0;   // z in [0, depth)
  std::vector<uint8_t> walkable;  // row-major by z, then x
  std::vector<ObjectInstance> objects;

  bool operator==(const GridEnvironment&) const = default;

  bool in_bounds(int x, int z) const {
    return x >= 0 && x < width && z >= 0 && z < depth;
  }
  bool is_walkable(int x, int z) const {
    return in_bounds(x, z) && walkable[static_cast<size_t>(z) * width + x] != 0;
  }
  void set_walkable(int x, int z, bool v) {
    walkable[static_cast<size_t>(z) * width + x] = v ? 1 : 0;
  }

  /// Categories present in this room, deduplicated ascending.
  std::vector<int> present_categories() const {
    std::vector<int> cats;
    for (const auto& o : objects) cats.push_back(o.category);
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    return cats;
  }

  bool has_category(int category) const {
    for (const auto& o : objects)
      if (o.category == category) return true;
    return false;
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// True when every walkable cell is 4-connected to every other. Returns the
/// first stranded cell through `stranded` when given.
inline bool walkable_connected(const GridEnvironment& env,
                               std::pair<int, int>* stranded = nullptr) {
  int start_x = -1, start_z = -1, total = 0;
  for (int z = 0; z < env.depth; ++z)
    for (int x = 0; x < env.width; ++x)
      if (env.is_walkable(x, z)) {
        if (start_x < 0) { start_x = x; start_z = z; }
        ++total;
      }
  if (total == 0) return false;

  std::vector<uint8_t> seen(env.walkable.size(), 0);
  std::queue<std::pair<int, int>> q;
  q.push({start_x, start_z});
  seen[static_cast<size_t>(start_z) * env.width + start_x] = 1;
  int reached = 1;
  const int dx[4] = {1, -1, 0, 0};
  const int dz[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [x, z] = q.front();
    q.pop();
    for (int d = 0; d < 4; ++d) {
      int nx = x + dx[d], nz = z + dz[d];
      if (!env.is_walkable(nx, nz)) continue;
      size_t idx = static_cast<size_t>(nz) * env.width + nx;
      if (seen[idx]) continue;
      seen[idx] = 1;
      ++reached;
      q.push({nx, nz});
    }
  }
  if (reached == total) return true;
  if (stranded) {
    for (int z = 0; z < env.depth; ++z)
      for (int x = 0; x < env.width; ++x)
        if (env.is_walkable(x, z) && !seen[static_cast<size_t>(z) * env.width + x]) {
          *stranded = {x, z};
          return false;
        }
  }
  return false;
}

/// Checks all structural invariants; throws Error naming the offending cell
/// or field. Returns the argument for chaining.
inline const GridEnvironment& validate_environment(const GridEnvironment& env) {
  if (env.room_id.empty()) throw Error("environment: empty room id");
  if (env.scene_label < 0 || env.scene_label >= kSceneCount)
    throw Error("environment: bad scene label " + std::to_string(env.scene_label));
  if (env.width < 1 || env.depth < 1)
    throw Error("environment: non-positive dimensions");
  if (env.walkable.size() != static_cast<size_t>(env.width) * env.depth)
    throw Error("environment: walkable mask size mismatch");

  for (const auto& o : env.objects) {
    if (o.category < 0 || o.category >= kCategoryCount)
      throw Error("environment: bad category index " + std::to_string(o.category));
    if (!env.in_bounds(o.x, o.z))
      throw Error("environment: object " + category_name(o.category) +
                  " at out-of-bounds cell (" + std::to_string(o.x) + "," +
                  std::to_string(o.z) + ")");
  }

  if (env.present_categories().size() < 4)
    throw Error("environment: fewer than 4 distinct object categories");

  // Walkable region must be non-empty and 4-connected.
  bool any_walkable = false;
  for (uint8_t w : env.walkable) any_walkable |= (w != 0);
  if (!any_walkable) throw Error("environment: no walkable cells");

  std::pair<int, int> stranded;
  if (!walkable_connected(env, &stranded))
    throw Error("environment: walkable region disconnected at cell (" +
                std::to_string(stranded.first) + "," +
                std::to_string(stranded.second) + ")");
  return env;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------
//
// Versioned plain-text, UTF-8, canonical field order:
//
//   hozenv 1
//   room <room_id>
//   scene <index> <name>
//   size <width> <depth>
//   walkable
//   <depth rows of width chars, z = 0 first; '.' walkable, '#' blocked>
//   objects <count>
//   <CategoryName> <x> <z> <band>        (sorted by category, x, z, band)
//   end

inline std::string serialize_environment(const GridEnvironment& env) {
  std::ostringstream out;
  out << "hozenv 1\n";
  out << "room " << env.room_id << "\n";
  out << "scene " << env.scene_label << " " << scene_name(env.scene_label) << "\n";
  out << "size " << env.width << " " << env.depth << "\n";
  out << "walkable\n";
  for (int z = 0; z < env.depth; ++z) {
    for (int x = 0; x < env.width; ++x)
      out << (env.is_walkable(x, z) ? '.' : '#');
    out << "\n";
  }
  std::vector<ObjectInstance> sorted = env.objects;
  std::sort(sorted.begin(), sorted.end(), object_less);
  out << "objects " << sorted.size() << "\n";
  for (const auto& o : sorted)
    out << category_name(o.category) << " " << o.x << " " << o.z << " "
        << band_name(o.band) << "\n";
  out << "end\n";
  return out.str();
}

inline GridEnvironment parse_environment(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line))
      throw Error(std::string("environment parse: missing ") + what);
    return line;
  };

  if (next_line("header") != "hozenv 1")
    throw Error("environment parse: bad header '" + line + "'");

  GridEnvironment env;
  {
    std::istringstream ls(next_line("room line"));
    std::string kw;
    ls >> kw >> env.room_id;
    if (kw != "room" || env.room_id.empty())
      throw Error("environment parse: bad room line '" + line + "'");
  }
  {
    std::istringstream ls(next_line("scene line"));
    std::string kw, name;
    ls >> kw >> env.scene_label >> name;
    if (kw != "scene" || ls.fail())
      throw Error("environment parse: bad scene line '" + line + "'");
    if (scene_index(name) != env.scene_label)
      throw Error("environment parse: scene name/index mismatch '" + line + "'");
  }
  {
    std::istringstream ls(next_line("size line"));
    std::string kw;
    ls >> kw >> env.width >> env.depth;
    if (kw != "size" || ls.fail() || env.width < 1 || env.depth < 1)
      throw Error("environment parse: bad size line '" + line + "'");
  }
  if (next_line("walkable header") != "walkable")
    throw Error("environment parse: expected 'walkable', got '" + line + "'");
  env.walkable.assign(static_cast<size_t>(env.width) * env.depth, 0);
  for (int z = 0; z < env.depth; ++z) {
    std::string row = next_line("walkable row");
    if (static_cast<int>(row.size()) != env.width)
      throw Error("environment parse: walkable row " + std::to_string(z) +
                  " has length " + std::to_string(row.size()));
    for (int x = 0; x < env.width; ++x) {
      if (row[x] == '.') env.set_walkable(x, z, true);
      else if (row[x] == '#') env.set_walkable(x, z, false);
      else throw Error("environment parse: bad walkable char '" +
                       std::string(1, row[x]) + "' at (" + std::to_string(x) +
                       "," + std::to_string(z) + ")");
    }
  }
  int object_count = 0;
  {
    std::istringstream ls(next_line("objects line"));
    std::string kw;
    ls >> kw >> object_count;
    if (kw != "objects" || ls.fail() || object_count < 0)
      throw Error("environment parse: bad objects line '" + line + "'");
  }
  for (int i = 0; i < object_count; ++i) {
    std::istringstream ls(next_line("object record"));
    std::string name, band;
    ObjectInstance o;
    ls >> name >> o.x >> o.z >> band;
    if (ls.fail())
      throw Error("environment parse: bad object record '" + line + "'");
    o.category = category_index(name);
    if (o.category < 0)
      throw Error("environment parse: unknown category '" + name + "'");
    o.band = band_from_name(band);
    env.objects.push_back(o);
  }
  if (next_line("end marker") != "end")
    throw Error("environment parse: expected 'end', got '" + line + "'");

  validate_environment(env);
  return env;
}

inline GridEnvironment load_environment(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open environment file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_environment(buf.str());
}

inline void save_environment(const GridEnvironment& env, const std::string& path) {
  validate_environment(env);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write environment file: " + path);
  f << serialize_environment(env);
  if (!f) throw Error("write failed: " + path);
}

}  // namespace hoz
