#pragma once

#include <charconv>

#include "hoz/environment.hpp"
#include "hoz/kmeans.hpp"
#include "hoz/simulator.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Exact float text round-trip
// ---------------------------------------------------------------------------

/// Shortest decimal form that parses back to the identical double; the
/// backbone of byte-stable graph/report files.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Graph type
// ---------------------------------------------------------------------------

/// A zone graph: K zone-center rows in bag-of-objects space plus a symmetric
/// zone-adjacency probability matrix. Scope says how it was built.
struct HozGraph {
  Mat nodes;  // K x N, entries >= 0
  Mat edges;  // K x K, symmetric, zero diagonal, entries in [0,1]
  std::string scope = "room";  // "room" or "scene"
  int scene_label = -1;
  std::string room_id;  // empty for scene scope

  // construction metadata
  uint64_t seed = 0;
  double epsilon = 0.25;
  double alpha = 0.1;
  int sample_count = 0;
  std::vector<std::string> merge_order;  // room ids folded in, scene scope only

  int k() const { return nodes.rows; }
  int n() const { return nodes.cols; }
};

inline void validate_graph(const HozGraph& g) {
  if (g.nodes.rows < 1) throw Error("graph: no nodes");
  if (g.edges.rows != g.nodes.rows || g.edges.cols != g.nodes.rows)
    throw Error("graph: edge matrix shape mismatch");
  if (g.scope != "room" && g.scope != "scene")
    throw Error("graph: unknown scope '" + g.scope + "'");
  for (double v : g.nodes.a)
    if (!std::isfinite(v) || v < 0.0) throw Error("graph: node entries must be finite and >= 0");
  for (int i = 0; i < g.edges.rows; ++i) {
    if (g.edges(i, i) != 0.0) throw Error("graph: nonzero diagonal");
    for (int j = 0; j < g.edges.cols; ++j) {
      double v = g.edges(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error("graph: edge entries must lie in [0,1]");
      if (v != g.edges(j, i)) throw Error("graph: edges not symmetric");
    }
  }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Mean of member features; entry j is the co-occurrence frequency of
/// category j across the zone's views.
inline Feature zone_embedding(const std::vector<ObservationSample>& members) {
  if (members.empty()) throw Error("zone_embedding: empty member list");
  Feature mean(members[0].feature.size(), 0.0);
  for (const auto& m : members) {
    if (m.feature.size() != mean.size()) throw Error("zone_embedding: ragged features");
    for (size_t j = 0; j < mean.size(); ++j) mean[j] += m.feature[j];
  }
  for (auto& v : mean) v /= static_cast<double>(members.size());
  return mean;
}

/// Adjacency probability between two zones: the fraction of cross-pairs of
/// member locations whose planar L1 distance is within epsilon.
inline double compute_edge(const std::vector<std::pair<double, double>>& zone_k,
                           const std::vector<std::pair<double, double>>& zone_j,
                           double epsilon) {
  if (zone_k.empty() || zone_j.empty()) throw Error("compute_edge: empty zone");
  long long hits = 0;
  for (const auto& [xa, za] : zone_k)
    for (const auto& [xb, zb] : zone_j)
      if (std::abs(xa - xb) + std::abs(za - zb) <= epsilon) ++hits;
  return static_cast<double>(hits) /
         (static_cast<double>(zone_k.size()) * static_cast<double>(zone_j.size()));
}

/// Room-wise graph: cluster view features into K zones (features only; the
/// location-joint variant is an ablation), then node = member mean and
/// edge = cross-pair proximity rate.
inline HozGraph build_room_graph(const std::vector<ObservationSample>& samples, int k,
                                 double epsilon, SeededRng& rng,
                                 bool cluster_location = false) {
  if (samples.empty()) throw Error("build_room_graph: no samples");
  uint64_t seed = rng.seed();

  std::vector<Feature> cluster_input;
  cluster_input.reserve(samples.size());
  if (!cluster_location) {
    for (const auto& s : samples) cluster_input.push_back(s.feature);
  } else {
    // ablation: append location, scaled into [0,1] so neither signal drowns
    // the other
    double max_x = 1.0, max_z = 1.0;
    for (const auto& s : samples) {
      max_x = std::max(max_x, static_cast<double>(s.location.x));
      max_z = std::max(max_z, static_cast<double>(s.location.z));
    }
    for (const auto& s : samples) {
      Feature f = s.feature;
      f.push_back(s.location.x / max_x);
      f.push_back(s.location.z / max_z);
      cluster_input.push_back(std::move(f));
    }
  }

  ClusterAssignment ca = kmeans(cluster_input, k, rng);

  std::vector<std::vector<ObservationSample>> members(k);
  std::vector<std::vector<std::pair<double, double>>> locations(k);
  for (size_t i = 0; i < samples.size(); ++i) {
    members[ca.assignment[i]].push_back(samples[i]);
    locations[ca.assignment[i]].push_back(
        {static_cast<double>(samples[i].location.x),
         static_cast<double>(samples[i].location.z)});
  }

  int n = static_cast<int>(samples[0].feature.size());
  HozGraph g;
  g.nodes = Mat(k, n);
  for (int c = 0; c < k; ++c) {
    Feature center = zone_embedding(members[c]);
    for (int j = 0; j < n; ++j) g.nodes(c, j) = center[j];
  }
  g.edges = Mat(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      double e = compute_edge(locations[a], locations[b], epsilon);
      g.edges(a, b) = e;
      g.edges(b, a) = e;
    }
  g.scope = "room";
  g.seed = seed;
  g.epsilon = epsilon;
  g.sample_count = static_cast<int>(samples.size());
  validate_graph(g);
  return g;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------
//
//   hozgraph 1
//   count <n>
//   graph <index>
//   scope <room|scene>
//   scene <index> <name|->
//   room <room_id|->
//   k <K>
//   n <N>
//   seed <u64>
//   epsilon <float>
//   alpha <float>
//   samples <int>
//   merge_order <m> [<room_id> ...]
//   nodes
//   <K rows of N floats>
//   edges
//   <K rows of K floats>
//   end
//   ...
//   end

inline std::string serialize_graphs(const std::vector<HozGraph>& graphs) {
  std::ostringstream out;
  out << "hozgraph 1\n";
  out << "count " << graphs.size() << "\n";
  for (size_t i = 0; i < graphs.size(); ++i) {
    const HozGraph& g = graphs[i];
    validate_graph(g);
    out << "graph " << i << "\n";
    out << "scope " << g.scope << "\n";
    out << "scene " << g.scene_label << " "
        << (g.scene_label >= 0 ? scene_name(g.scene_label) : "-") << "\n";
    out << "room " << (g.room_id.empty() ? "-" : g.room_id) << "\n";
    out << "k " << g.k() << "\n";
    out << "n " << g.n() << "\n";
    out << "seed " << g.seed << "\n";
    out << "epsilon " << format_double(g.epsilon) << "\n";
    out << "alpha " << format_double(g.alpha) << "\n";
    out << "samples " << g.sample_count << "\n";
    out << "merge_order " << g.merge_order.size();
    for (const auto& id : g.merge_order) out << " " << id;
    out << "\n";
    out << "nodes\n";
    for (int r = 0; r < g.nodes.rows; ++r) {
      for (int c = 0; c < g.nodes.cols; ++c)
        out << (c ? " " : "") << format_double(g.nodes(r, c));
      out << "\n";
    }
    out << "edges\n";
    for (int r = 0; r < g.edges.rows; ++r) {
      for (int c = 0; c < g.edges.cols; ++c)
        out << (c ? " " : "") << format_double(g.edges(r, c));
      out << "\n";
    }
    out << "end\n";
  }
  out << "end\n";
  return out.str();
}

inline std::vector<HozGraph> parse_graphs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line))
      throw Error(std::string("graph parse: missing ") + what);
    return line;
  };
  auto expect_kv = [&](const char* key) -> std::string {
    std::string l = next_line(key);
    std::string prefix = std::string(key) + " ";
    if (l.rfind(prefix, 0) != 0)
      throw Error("graph parse: expected '" + std::string(key) + "', got '" + l + "'");
    return l.substr(prefix.size());
  };
  auto parse_row = [&](std::span<double> dst, const char* what) {
    std::string l = next_line(what);
    size_t pos = 0;
    for (size_t c = 0; c < dst.size(); ++c) {
      size_t sp = l.find(' ', pos);
      std::string_view tok =
          std::string_view(l).substr(pos, sp == std::string::npos ? sp : sp - pos);
      if (tok.empty()) throw Error("graph parse: short matrix row '" + l + "'");
      dst[c] = parse_double(tok);
      if (sp == std::string::npos) {
        if (c + 1 != dst.size()) throw Error("graph parse: short matrix row '" + l + "'");
        pos = l.size();
      } else {
        pos = sp + 1;
      }
    }
    if (pos != l.size() && pos != std::string::npos)
      throw Error("graph parse: trailing data in matrix row '" + l + "'");
  };

  if (next_line("header") != "hozgraph 1")
    throw Error("graph parse: bad header '" + line + "'");
  int count = static_cast<int>(std::stoll(expect_kv("count")));
  std::vector<HozGraph> graphs;
  for (int i = 0; i < count; ++i) {
    if (expect_kv("graph") != std::to_string(i))
      throw Error("graph parse: out-of-order graph index");
    HozGraph g;
    g.scope = expect_kv("scope");
    {
      std::istringstream ls(expect_kv("scene"));
      std::string name;
      ls >> g.scene_label >> name;
      if (ls.fail()) throw Error("graph parse: bad scene line");
      if (g.scene_label >= 0 && scene_name(g.scene_label) != name)
        throw Error("graph parse: scene name/index mismatch");
    }
    {
      std::string room = expect_kv("room");
      g.room_id = (room == "-") ? "" : room;
    }
    int k = static_cast<int>(std::stoll(expect_kv("k")));
    int n = static_cast<int>(std::stoll(expect_kv("n")));
    if (k < 1 || n < 1) throw Error("graph parse: bad dimensions");
    g.seed = std::stoull(expect_kv("seed"));
    g.epsilon = parse_double(expect_kv("epsilon"));
    g.alpha = parse_double(expect_kv("alpha"));
    g.sample_count = static_cast<int>(std::stoll(expect_kv("samples")));
    {
      std::istringstream ls(expect_kv("merge_order"));
      size_t m = 0;
      ls >> m;
      if (ls.fail()) throw Error("graph parse: bad merge_order line");
      for (size_t j = 0; j < m; ++j) {
        std::string id;
        ls >> id;
        if (ls.fail()) throw Error("graph parse: short merge_order line");
        g.merge_order.push_back(id);
      }
    }
    if (next_line("nodes header") != "nodes")
      throw Error("graph parse: expected 'nodes', got '" + line + "'");
    g.nodes = Mat(k, n);
    for (int r = 0; r < k; ++r) parse_row(g.nodes.row(r), "node row");
    if (next_line("edges header") != "edges")
      throw Error("graph parse: expected 'edges', got '" + line + "'");
    g.edges = Mat(k, k);
    for (int r = 0; r < k; ++r) parse_row(g.edges.row(r), "edge row");
    if (next_line("graph end") != "end")
      throw Error("graph parse: expected graph 'end', got '" + line + "'");
    validate_graph(g);
    graphs.push_back(std::move(g));
  }
  if (next_line("file end") != "end")
    throw Error("graph parse: expected file 'end', got '" + line + "'");
  return graphs;
}

inline std::vector<HozGraph> load_graphs(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_graphs(buf.str());
}

inline void save_graphs(const std::vector<HozGraph>& graphs, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write graph file: " + path);
  f << serialize_graphs(graphs);
  if (!f) throw Error("write failed: " + path);
}

}  // namespace hoz
