#pragma once
// Newline-delimited JSON episode logs. One record per episode carries the
// full action/pose history plus the per-step planner trace, so reports can
// be recomputed from logs alone.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoz/core.hpp"
#include "hoz/policy.hpp"
#include "hoz/simulator.hpp"

namespace hoz {

struct LoggedEpisode {
  EpisodeRecord record;
  std::vector<StepTrace> trace;
  std::string scene;
  std::string mode;
  int trial = 0;
  uint64_t seed = 0;
};

inline std::string serialize_episode(const LoggedEpisode& ep) {
  nlohmann::ordered_json j;
  j["env_id"] = ep.record.env_id;
  j["scene"] = ep.scene;
  j["target"] = category_name(ep.record.target);
  j["mode"] = ep.mode;
  j["trial"] = ep.trial;
  j["seed"] = ep.seed;
  j["success"] = ep.record.success;
  if (ep.record.optimal_length)
    j["optimal_length"] = *ep.record.optimal_length;
  else
    j["optimal_length"] = nullptr;
  j["actual_length"] = ep.record.actual_length;
  auto actions = nlohmann::ordered_json::array();
  for (Action a : ep.record.actions) actions.push_back(action_name(a));
  j["actions"] = std::move(actions);
  auto poses = nlohmann::ordered_json::array();
  for (const Pose& p : ep.record.poses) poses.push_back({p.x, p.z, p.yaw, p.pitch});
  j["poses"] = std::move(poses);
  auto trace = nlohmann::ordered_json::array();
  for (const StepTrace& t : ep.trace) {
    nlohmann::ordered_json tj;
    tj["step"] = t.step;
    tj["current_zone"] = t.current_zone;
    tj["target_zone"] = t.target_zone;
    tj["sub_goal"] = t.sub_goal;
    tj["product"] = t.product;
    tj["target_supported"] = t.target_supported;
    tj["unreachable"] = t.unreachable;
    tj["path"] = t.path;
    tj["zone_norm"] = t.zone_norm;
    trace.push_back(std::move(tj));
  }
  j["trace"] = std::move(trace);
  return j.dump();
}

inline LoggedEpisode parse_episode(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("episode record: invalid JSON (") + e.what() + ")");
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw Error(std::string("episode record: missing field '") + key + "'");
    return *it;
  };
  LoggedEpisode ep;
  try {
    ep.record.env_id = need("env_id").get<std::string>();
    ep.scene = need("scene").get<std::string>();
    std::string target = need("target").get<std::string>();
    ep.record.target = category_index(target);
    if (ep.record.target < 0)
      throw Error("episode record: unknown target category '" + target + "'");
    ep.mode = need("mode").get<std::string>();
    ep.trial = need("trial").get<int>();
    ep.seed = need("seed").get<uint64_t>();
    ep.record.success = need("success").get<bool>();
    const auto& opt = need("optimal_length");
    if (!opt.is_null()) ep.record.optimal_length = opt.get<int>();
    ep.record.actual_length = need("actual_length").get<int>();
    for (const auto& a : need("actions"))
      ep.record.actions.push_back(action_from_name(a.get<std::string>()));
    for (const auto& p : need("poses")) {
      if (!p.is_array() || p.size() != 4)
        throw Error("episode record: pose must be [x, z, yaw, pitch]");
      ep.record.poses.push_back(
          {p[0].get<int>(), p[1].get<int>(), p[2].get<int>(), p[3].get<int>()});
    }
    for (const auto& tj : need("trace")) {
      StepTrace t;
      t.step = tj.at("step").get<int>();
      t.current_zone = tj.at("current_zone").get<int>();
      t.target_zone = tj.at("target_zone").get<int>();
      t.sub_goal = tj.at("sub_goal").get<int>();
      t.product = tj.at("product").get<double>();
      t.target_supported = tj.at("target_supported").get<bool>();
      t.unreachable = tj.at("unreachable").get<bool>();
      t.path = tj.at("path").get<std::vector<int>>();
      t.zone_norm = tj.at("zone_norm").get<double>();
      ep.trace.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("episode record: malformed field (") + e.what() + ")");
  }
  validate_record(ep.record);
  return ep;
}

inline void save_episode_log(const std::string& path, const std::vector<LoggedEpisode>& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  for (const auto& ep : log) f << serialize_episode(ep) << "\n";
}

/// Parses one record per line; errors carry the 1-based line number.
inline std::vector<LoggedEpisode> load_episode_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open episode log: " + path);
  std::vector<LoggedEpisode> log;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      log.push_back(parse_episode(line));
    } catch (const Error& e) {
      throw Error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace hoz
