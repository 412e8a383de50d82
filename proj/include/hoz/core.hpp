#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hoz {

/// Error type for all validation and parse failures in the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Object category registry
// ---------------------------------------------------------------------------

inline constexpr int kCategoryCount = 22;

/// Canonical (alphabetical) list of the navigable object categories.
inline const std::vector<std::string>& category_names() {
  static const std::vector<std::string> names = {
      "AlarmClock", "Book",     "Bowl",        "CellPhone", "Chair",
      "CoffeeMachine", "DeskLamp", "FloorLamp", "Fridge",   "GarbageCan",
      "Kettle",     "Laptop",   "LightSwitch", "Microwave", "Pan",
      "Plate",      "Pot",      "RemoteControl", "Sink",    "StoveBurner",
      "Television", "Toaster"};
  return names;
}

inline int category_index(std::string_view name) {
  const auto& names = category_names();
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    if (names[i] == name) return i;
  return -1;
}

inline const std::string& category_name(int index) {
  const auto& names = category_names();
  if (index < 0 || index >= static_cast<int>(names.size()))
    throw Error("category index out of range: " + std::to_string(index));
  return names[index];
}

// ---------------------------------------------------------------------------
// Poses and actions
// ---------------------------------------------------------------------------

/// Discrete agent pose. x/z are integer grid cells, yaw one of {0,90,180,270}
/// degrees (0 faces +z, 90 faces +x), pitch one of {-30,0,30}.
struct Pose {
  int x = 0;
  int z = 0;
  int yaw = 0;
  int pitch = 0;

  bool operator==(const Pose&) const = default;
};

enum class Action { MoveAhead, RotateLeft, RotateRight, LookDown, LookUp, Done };

inline constexpr int kActionCount = 6;

inline const std::string& action_name(Action a) {
  static const std::vector<std::string> names = {
      "MoveAhead", "RotateLeft", "RotateRight", "LookDown", "LookUp", "Done"};
  return names[static_cast<int>(a)];
}

inline Action action_from_name(std::string_view name) {
  for (int i = 0; i < kActionCount; ++i) {
    Action a = static_cast<Action>(i);
    if (action_name(a) == name) return a;
  }
  throw Error("unknown action: " + std::string(name));
}

/// Unit step along a yaw angle. yaw 0 -> +z, 90 -> +x, 180 -> -z, 270 -> -x.
inline std::pair<int, int> yaw_delta(int yaw) {
  switch (((yaw % 360) + 360) % 360) {
    case 0:   return {0, 1};
    case 90:  return {1, 0};
    case 180: return {0, -1};
    case 270: return {-1, 0};
  }
  throw Error("yaw must be a multiple of 90, got " + std::to_string(yaw));
}

// ---------------------------------------------------------------------------
// Feature vectors (bag-of-objects space)
// ---------------------------------------------------------------------------

/// A bag-of-objects vector: 0/1 per category when observed, real-valued >= 0
/// once averaged into zone centers.
using Feature = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("dot: dimension mismatch " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

/// Cosine similarity; 0 when either vector is all-zero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

/// Indicator vector with a single 1 at `index`.
inline Feature one_hot(int index, int length) {
  if (length <= 0) throw Error("one_hot: length must be positive");
  if (index < 0 || index >= length)
    throw Error("one_hot: index " + std::to_string(index) +
                " out of range for length " + std::to_string(length));
  Feature v(static_cast<size_t>(length), 0.0);
  v[static_cast<size_t>(index)] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Small dense matrix
// ---------------------------------------------------------------------------

/// Row-major dense matrix of doubles. Sized for K x N graph math, not BLAS.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {
    if (r < 0 || c < 0) throw Error("Mat: negative dimensions");
  }

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  bool operator==(const Mat&) const = default;

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows)
    throw Error("matmul: shape mismatch " + std::to_string(x.rows) + "x" +
                std::to_string(x.cols) + " * " + std::to_string(y.rows) + "x" +
                std::to_string(y.cols));
  Mat out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double v = x(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded pseudorandom generator with platform-independent streams.
///
/// The raw stream is std::mt19937_64 (bit-exact by the standard); all
/// distributions are implemented here rather than via <random> distribution
/// classes, whose outputs vary across standard libraries. Child generators
/// are derived with splitmix64 over (seed, fnv1a(tag), index), which is the
/// scheme used to give every room, episode and clustering run its own stream.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw Error("uniform_int: empty range");
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(next_u64());  // full 64-bit range
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  size_t uniform_index(size_t n) {
    if (n == 0) throw Error("uniform_index: empty range");
    return static_cast<size_t>(uniform_int(0, static_cast<int64_t>(n) - 1));
  }

  /// Fisher-Yates shuffle using this stream.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Child generator for an independent named stream.
  SeededRng derive(std::string_view tag, uint64_t index = 0) const {
    uint64_t h = splitmix64(seed_ ^ fnv1a64(tag));
    return SeededRng(splitmix64(h + index));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace hoz
