#include <catch2/catch_amalgamated.hpp>

#include "hoz/hoz_graph.hpp"

using namespace hoz;

namespace {

ObservationSample sample(Feature f, int x, int z, int yaw = 0) {
  return {std::move(f), Pose{x, z, yaw, 0}};
}

}  // namespace

TEST_CASE("doubles round-trip exactly through text", "[graph]") {
  SeededRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double v = rng.next_double() * std::pow(10.0, rng.uniform_int(-10, 10));
    REQUIRE(parse_double(format_double(v)) == v);
  }
  REQUIRE(format_double(0.5) == "0.5");
  REQUIRE(format_double(0.0) == "0");
  REQUIRE_THROWS_AS(parse_double("zap"), Error);
  REQUIRE_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("zone embedding is the member mean", "[graph]") {
  std::vector<ObservationSample> members = {sample({1, 0}, 0, 0), sample({1, 1}, 0, 1)};
  Feature mean = zone_embedding(members);
  REQUIRE(mean == Feature{1.0, 0.5});

  REQUIRE(zone_embedding({sample({0, 1, 0}, 2, 2)}) == Feature{0, 1, 0});
  REQUIRE_THROWS_AS(zone_embedding({}), Error);

  for (double v : mean) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("edge probability counts close cross-pairs", "[graph]") {
  using Locs = std::vector<std::pair<double, double>>;
  REQUIRE(compute_edge(Locs{{0, 0}}, Locs{{0, 0.1}}, 0.25) == 1.0);
  REQUIRE(compute_edge(Locs{{0, 0}}, Locs{{3, 3}}, 0.25) == 0.0);
  REQUIRE(compute_edge(Locs{{0, 0}}, Locs{{0, 0.2}, {5, 5}}, 0.25) == 0.5);
  // integer locations with the default epsilon: only co-located pairs count
  REQUIRE(compute_edge(Locs{{2, 2}}, Locs{{2, 2}, {2, 3}}, 0.25) == 0.5);
  REQUIRE(compute_edge(Locs{{2, 2}}, Locs{{2, 3}}, 1.0) == 1.0);
  REQUIRE_THROWS_AS(compute_edge(Locs{}, Locs{{0, 0}}, 0.25), Error);
}

TEST_CASE("room graph separates disjoint object groups", "[graph]") {
  // group A supported on categories {0,1} in one corner, group B on {2,3}
  // in the other; one co-located pair bridges them
  std::vector<ObservationSample> samples;
  for (int i = 0; i < 4; ++i) {
    samples.push_back(sample({1, 1, 0, 0}, 0, i, 0));
    samples.push_back(sample({1, 0, 0, 0}, 1, i, 90));
    samples.push_back(sample({0, 0, 1, 1}, 7, i, 0));
    samples.push_back(sample({0, 0, 1, 0}, 8, i, 90));
  }
  samples.push_back(sample({1, 1, 0, 0}, 4, 4, 0));
  samples.push_back(sample({0, 0, 1, 1}, 4, 4, 90));

  SeededRng rng(5);
  HozGraph g = build_room_graph(samples, 2, 0.25, rng);
  REQUIRE(g.k() == 2);
  REQUIRE(g.n() == 4);
  REQUIRE(g.scope == "room");
  REQUIRE(g.sample_count == 18);

  // one node is supported on {0,1} only, the other on {2,3} only
  int a = g.nodes(0, 0) > 0 ? 0 : 1;
  int b = 1 - a;
  REQUIRE(g.nodes(a, 0) > 0.0);
  REQUIRE(g.nodes(a, 2) == 0.0);
  REQUIRE(g.nodes(a, 3) == 0.0);
  REQUIRE(g.nodes(b, 2) > 0.0);
  REQUIRE(g.nodes(b, 0) == 0.0);
  REQUIRE(g.nodes(b, 1) == 0.0);

  // the co-located pair produces a positive edge
  REQUIRE(g.edges(0, 1) > 0.0);
  REQUIRE(g.edges(0, 1) == g.edges(1, 0));
  REQUIRE(g.edges(0, 0) == 0.0);
  REQUIRE(g.edges(0, 1) == Catch::Approx(1.0 / 81.0));
}

TEST_CASE("K=1 room graph is the grand mean with no edges", "[graph]") {
  std::vector<ObservationSample> samples = {
      sample({1, 0}, 0, 0), sample({0, 1}, 1, 0), sample({1, 1}, 2, 0),
      sample({0, 0}, 3, 0)};
  SeededRng rng(2);
  HozGraph g = build_room_graph(samples, 1, 0.25, rng);
  REQUIRE(g.k() == 1);
  REQUIRE(g.nodes(0, 0) == Catch::Approx(0.5));
  REQUIRE(g.nodes(0, 1) == Catch::Approx(0.5));
  REQUIRE(g.edges.rows == 1);
  REQUIRE(g.edges(0, 0) == 0.0);
}

TEST_CASE("weighted node recombination reproduces the grand mean", "[graph]") {
  SeededRng gen(7);
  std::vector<ObservationSample> samples;
  for (int i = 0; i < 60; ++i) {
    Feature f(5);
    for (auto& v : f) v = static_cast<double>(gen.uniform_int(0, 1));
    samples.push_back(sample(std::move(f), static_cast<int>(gen.uniform_int(0, 9)),
                             static_cast<int>(gen.uniform_int(0, 9))));
  }
  SeededRng rng(11);
  HozGraph g = build_room_graph(samples, 4, 0.25, rng);

  // recover member counts by re-running the same clustering stream
  SeededRng rng2(11);
  std::vector<Feature> fs;
  for (const auto& s : samples) fs.push_back(s.feature);
  ClusterAssignment ca = kmeans(fs, 4, rng2);
  std::vector<int> count(4, 0);
  for (int a : ca.assignment) ++count[a];

  for (int j = 0; j < 5; ++j) {
    double grand = 0.0;
    for (const auto& s : samples) grand += s.feature[j];
    grand /= samples.size();
    double recombined = 0.0;
    for (int c = 0; c < 4; ++c) recombined += count[c] * g.nodes(c, j);
    recombined /= samples.size();
    REQUIRE(recombined == Catch::Approx(grand).margin(1e-12));
  }
}

TEST_CASE("perturbing locations changes edges but never nodes", "[graph]") {
  std::vector<ObservationSample> samples;
  for (int i = 0; i < 6; ++i)
    samples.push_back(sample({double(i % 2), double(1 - i % 2)}, i, 0));
  // co-locate one cross pair so the baseline has an edge
  samples.push_back(sample({1, 0}, 9, 9));
  samples.push_back(sample({0, 1}, 9, 9));

  SeededRng r1(3), r2(3);
  HozGraph g1 = build_room_graph(samples, 2, 0.25, r1);
  auto moved = samples;
  moved[6].location = Pose{2, 5, 0, 0};  // split the co-located pair apart
  HozGraph g2 = build_room_graph(moved, 2, 0.25, r2);

  REQUIRE(g1.nodes == g2.nodes);
  REQUIRE_FALSE(g1.edges == g2.edges);
}

TEST_CASE("location-joint clustering is available as an ablation", "[graph]") {
  // two spatial halves with identical features: feature-only clustering
  // cannot split them, location-joint can
  std::vector<ObservationSample> samples;
  for (int i = 0; i < 8; ++i) samples.push_back(sample({1, 0}, i < 4 ? 0 : 9, 0));
  SeededRng rng(13);
  HozGraph joint = build_room_graph(samples, 2, 0.25, rng, true);
  // nodes are still feature means: both centers equal [1,0]
  for (int c = 0; c < 2; ++c) {
    REQUIRE(joint.nodes(c, 0) == 1.0);
    REQUIRE(joint.nodes(c, 1) == 0.0);
  }
  REQUIRE(joint.n() == 2);  // location columns never leak into embeddings
}

TEST_CASE("graph files round-trip bit-exactly and byte-stably", "[graph]") {
  SeededRng gen(19);
  std::vector<HozGraph> graphs;
  for (int gi = 0; gi < 3; ++gi) {
    HozGraph g;
    int k = 3 + gi;
    g.nodes = Mat(k, 5);
    for (auto& v : g.nodes.a) v = gen.next_double();
    g.edges = Mat(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        g.edges(i, j) = g.edges(j, i) = gen.next_double();
    g.scope = gi == 0 ? "room" : "scene";
    g.scene_label = gi % kSceneCount;
    g.room_id = gi == 0 ? "kitchen_03" : "";
    g.seed = gen.next_u64();
    g.epsilon = 0.25;
    g.alpha = 0.1;
    g.sample_count = 100 + gi;
    if (gi > 0) g.merge_order = {"kitchen_00", "kitchen_01"};
    graphs.push_back(g);
  }

  std::string text = serialize_graphs(graphs);
  std::vector<HozGraph> back = parse_graphs(text);
  REQUIRE(back.size() == graphs.size());
  for (size_t i = 0; i < graphs.size(); ++i) {
    REQUIRE(back[i].nodes == graphs[i].nodes);  // bit-exact matrices
    REQUIRE(back[i].edges == graphs[i].edges);
    REQUIRE(back[i].scope == graphs[i].scope);
    REQUIRE(back[i].scene_label == graphs[i].scene_label);
    REQUIRE(back[i].room_id == graphs[i].room_id);
    REQUIRE(back[i].seed == graphs[i].seed);
    REQUIRE(back[i].epsilon == graphs[i].epsilon);
    REQUIRE(back[i].alpha == graphs[i].alpha);
    REQUIRE(back[i].sample_count == graphs[i].sample_count);
    REQUIRE(back[i].merge_order == graphs[i].merge_order);
  }
  REQUIRE(serialize_graphs(back) == text);  // byte-stable

  SECTION("file IO") {
    save_graphs(graphs, "test_graphs.txt");
    std::vector<HozGraph> loaded = load_graphs("test_graphs.txt");
    REQUIRE(loaded.size() == 3);
    REQUIRE(loaded[0].nodes == graphs[0].nodes);
    std::remove("test_graphs.txt");
    REQUIRE_THROWS_AS(load_graphs("no_such_graphs.txt"), Error);
  }

  SECTION("corrupt input is rejected") {
    REQUIRE_THROWS_AS(parse_graphs("nope"), Error);
    std::string bad = text;
    bad.replace(bad.find("edges"), 5, "wedge");
    REQUIRE_THROWS_AS(parse_graphs(bad), Error);
    bad = text.substr(0, text.size() * 2 / 3);
    REQUIRE_THROWS_AS(parse_graphs(bad), Error);
  }
}

TEST_CASE("graph validation catches structural violations", "[graph]") {
  HozGraph g;
  g.nodes = Mat(2, 3, 0.5);
  g.edges = Mat(2, 2);
  g.edges(0, 1) = g.edges(1, 0) = 0.4;
  REQUIRE_NOTHROW(validate_graph(g));

  HozGraph bad = g;
  bad.edges(0, 0) = 0.1;
  REQUIRE_THROWS_AS(validate_graph(bad), Error);
  bad = g;
  bad.edges(0, 1) = 0.7;
  REQUIRE_THROWS_AS(validate_graph(bad), Error);
  bad = g;
  bad.edges(0, 1) = bad.edges(1, 0) = 1.5;
  REQUIRE_THROWS_AS(validate_graph(bad), Error);
  bad = g;
  bad.nodes(0, 0) = -0.2;
  REQUIRE_THROWS_AS(validate_graph(bad), Error);
  bad = g;
  bad.scope = "cosmic";
  REQUIRE_THROWS_AS(validate_graph(bad), Error);
}
