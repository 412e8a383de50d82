#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hoz/core.hpp"

using namespace hoz;

TEST_CASE("category registry is alphabetical and round-trips", "[core]") {
  const auto& names = category_names();
  REQUIRE(names.size() == kCategoryCount);
  REQUIRE(std::is_sorted(names.begin(), names.end()));
  for (int i = 0; i < kCategoryCount; ++i) {
    REQUIRE(category_index(names[i]) == i);
    REQUIRE(category_name(i) == names[i]);
  }
  REQUIRE(category_index("Toilet") == -1);
  REQUIRE(category_index("Fridge") == 8);
  REQUIRE(names.front() == "AlarmClock");
  REQUIRE(names.back() == "Toaster");
}

TEST_CASE("action names round-trip", "[core]") {
  for (int i = 0; i < kActionCount; ++i) {
    Action a = static_cast<Action>(i);
    REQUIRE(action_from_name(action_name(a)) == a);
  }
  REQUIRE(action_name(Action::MoveAhead) == "MoveAhead");
  REQUIRE_THROWS_AS(action_from_name("Teleport"), Error);
}

TEST_CASE("yaw deltas follow the 0->+z convention", "[core]") {
  REQUIRE(yaw_delta(0) == std::pair(0, 1));
  REQUIRE(yaw_delta(90) == std::pair(1, 0));
  REQUIRE(yaw_delta(180) == std::pair(0, -1));
  REQUIRE(yaw_delta(270) == std::pair(-1, 0));
  REQUIRE(yaw_delta(360) == std::pair(0, 1));
  REQUIRE_THROWS_AS(yaw_delta(45), Error);
}

TEST_CASE("one_hot places a single one", "[core]") {
  Feature v = one_hot(3, 5);
  REQUIRE(v == Feature{0, 0, 0, 1, 0});
  REQUIRE_THROWS_AS(one_hot(5, 5), Error);
  REQUIRE_THROWS_AS(one_hot(-1, 5), Error);
}

TEST_CASE("vector helpers", "[core]") {
  Feature a = {1, 2, 3};
  Feature b = {4, 5, 6};
  REQUIRE(dot(a, b) == 32.0);
  REQUIRE(l2_norm(Feature{3, 4}) == 5.0);
  REQUIRE(cosine(a, a) == Catch::Approx(1.0));
  REQUIRE(cosine(Feature{0, 0}, Feature{1, 1}) == 0.0);
  REQUIRE(cosine(Feature{1, 0}, Feature{0, 1}) == 0.0);
  REQUIRE_THROWS_AS(dot(a, Feature{1}), Error);
}

TEST_CASE("Mat basics", "[core]") {
  Mat m(2, 3);
  m(0, 0) = 1.0;
  m(1, 2) = 5.0;
  REQUIRE(m.row(1)[2] == 5.0);
  REQUIRE(m.row(0).size() == 3);

  Mat i3 = Mat::identity(3);
  Mat x(3, 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) x(r, c) = r * 2 + c;
  REQUIRE(matmul(i3, x) == x);

  Mat a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 3; a(1, 1) = 4;
  Mat b(2, 2);
  b(0, 0) = 5; b(0, 1) = 6; b(1, 0) = 7; b(1, 1) = 8;
  Mat ab = matmul(a, b);
  REQUIRE(ab(0, 0) == 19.0);
  REQUIRE(ab(0, 1) == 22.0);
  REQUIRE(ab(1, 0) == 43.0);
  REQUIRE(ab(1, 1) == 50.0);

  REQUIRE_THROWS_AS(matmul(a, x), Error);
}

TEST_CASE("SeededRng reproduces the same stream for the same seed", "[core]") {
  SeededRng r1(42), r2(42), r3(43);
  std::vector<uint64_t> s1, s2, s3;
  for (int i = 0; i < 16; ++i) {
    s1.push_back(r1.next_u64());
    s2.push_back(r2.next_u64());
    s3.push_back(r3.next_u64());
  }
  REQUIRE(s1 == s2);
  REQUIRE(s1 != s3);
}

TEST_CASE("SeededRng distributions stay in range and cover values", "[core]") {
  SeededRng r(7);
  std::set<int64_t> seen;
  for (int i = 0; i < 200; ++i) {
    int64_t v = r.uniform_int(3, 7);
    REQUIRE(v >= 3);
    REQUIRE(v <= 7);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 5);

  for (int i = 0; i < 200; ++i) {
    double d = r.next_double();
    REQUIRE(d >= 0.0);
    REQUIRE(d < 1.0);
  }
  REQUIRE_THROWS_AS(r.uniform_int(2, 1), Error);
  REQUIRE_THROWS_AS(r.uniform_index(0), Error);
}

TEST_CASE("SeededRng shuffle is a deterministic permutation", "[core]") {
  std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<int> w = v;
  SeededRng a(99), b(99);
  a.shuffle(v);
  b.shuffle(w);
  REQUIRE(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("SeededRng derive gives independent reproducible children", "[core]") {
  SeededRng root(5);
  SeededRng a = root.derive("episode", 0);
  SeededRng a2 = root.derive("episode", 0);
  SeededRng b = root.derive("episode", 1);
  SeededRng c = root.derive("room", 0);
  REQUIRE(a.next_u64() == a2.next_u64());
  REQUIRE(a.seed() != b.seed());
  REQUIRE(a2.seed() != c.seed());
  // deriving must not disturb the parent stream
  SeededRng root2(5);
  root2.derive("x", 3);
  SeededRng r1(5);
  REQUIRE(root2.next_u64() == r1.next_u64());
}
