#pragma once

#include "hoz/generator.hpp"
#include "hoz/hoz_graph.hpp"
#include "hoz/simulator.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Frozen weights for the two graph encoders. Inference-only: the weights are
/// seeded random (zone/object mixing) plus a co-occurrence prior for the
/// object adjacency.
struct GcnParams {
  Mat w_z;  // N x N zone mixing
  Mat w_o;  // 6 x N object-input lift
  Mat a;    // N x N object adjacency, rows sum to 1
  uint64_t seed = 0;
};

inline void validate_params(const GcnParams& p) {
  int n = p.w_z.rows;
  if (n < 1) throw Error("params: empty weight matrix");
  if (p.w_z.cols != n) throw Error("params: w_z must be square");
  if (p.w_o.rows != 6 || p.w_o.cols != n) throw Error("params: w_o must be 6 x n");
  if (p.a.rows != n || p.a.cols != n) throw Error("params: adjacency must be n x n");
  for (double v : p.w_z.a)
    if (!std::isfinite(v)) throw Error("params: non-finite w_z entry");
  for (double v : p.w_o.a)
    if (!std::isfinite(v)) throw Error("params: non-finite w_o entry");
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = p.a(i, j);
      if (!std::isfinite(v) || v < 0.0) throw Error("params: bad adjacency entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("params: adjacency row " + std::to_string(i) + " sums to " +
                  std::to_string(sum));
  }
}

/// Count proximate object pairs across rooms: two instances within Chebyshev
/// distance 2 are co-occurrent. Grouped placements land inside that radius
/// far more often than across groups, so the counts mirror co-placement.
inline Mat count_co_occurrence(const std::vector<GridEnvironment>& rooms) {
  Mat counts(kCategoryCount, kCategoryCount);
  for (const auto& env : rooms) {
    for (size_t i = 0; i < env.objects.size(); ++i) {
      for (size_t j = i + 1; j < env.objects.size(); ++j) {
        const ObjectInstance& a = env.objects[i];
        const ObjectInstance& b = env.objects[j];
        int cheb = std::max(std::abs(a.x - b.x), std::abs(a.z - b.z));
        if (cheb > 2) continue;
        counts(a.category, b.category) += 1.0;
        if (a.category != b.category) counts(b.category, a.category) += 1.0;
      }
    }
  }
  return counts;
}

/// Seeded parameter construction: weight entries uniform in (-1/sqrt(N),
/// 1/sqrt(N)); adjacency = row-normalized (counts + I), or uniform rows when
/// no counts are supplied. Draw order: w_z row-major, then w_o row-major.
inline GcnParams init_params(int n, uint64_t seed, const Mat* co_occurrence = nullptr) {
  if (n < 1) throw Error("init_params: n must be positive");
  GcnParams p;
  p.seed = seed;
  SeededRng rng(seed);
  double s = 1.0 / std::sqrt(static_cast<double>(n));
  p.w_z = Mat(n, n);
  for (double& v : p.w_z.a) v = rng.next_double() * 2.0 * s - s;
  p.w_o = Mat(6, n);
  for (double& v : p.w_o.a) v = rng.next_double() * 2.0 * s - s;

  p.a = Mat(n, n);
  if (co_occurrence) {
    if (co_occurrence->rows != n || co_occurrence->cols != n)
      throw Error("init_params: co-occurrence shape mismatch");
    for (double v : co_occurrence->a)
      if (!std::isfinite(v) || v < 0.0)
        throw Error("init_params: co-occurrence entries must be non-negative");
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < n; ++j) row_sum += (*co_occurrence)(i, j) + (i == j ? 1.0 : 0.0);
      for (int j = 0; j < n; ++j)
        p.a(i, j) = ((*co_occurrence)(i, j) + (i == j ? 1.0 : 0.0)) / row_sum;
    }
  } else {
    for (double& v : p.a.a) v = 1.0 / n;
  }
  validate_params(p);
  return p;
}

// ---------------------------------------------------------------------------
// Edge normalization
// ---------------------------------------------------------------------------

/// Symmetric normalization with self-loops: E_hat = D^{-1/2} (E + I) D^{-1/2}
/// where D holds the row degrees of E + I.
inline Mat normalize_edges(const Mat& e) {
  if (e.rows != e.cols) throw Error("normalize_edges: matrix not square");
  int k = e.rows;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (e(i, j) < 0.0) throw Error("normalize_edges: negative entry");
      if (e(i, j) != e(j, i)) throw Error("normalize_edges: matrix not symmetric");
    }
  std::vector<double> inv_sqrt_deg(k);
  for (int i = 0; i < k; ++i) {
    double deg = 1.0;  // self-loop
    for (int j = 0; j < k; ++j) deg += e(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Mat out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double with_loops = e(i, j) + (i == j ? 1.0 : 0.0);
      // scale factors multiplied first so the result is bitwise symmetric
      out(i, j) = (inv_sqrt_deg[i] * inv_sqrt_deg[j]) * with_loops;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

namespace detail {
inline void relu_in_place(Mat& m) {
  for (double& v : m.a) v = v > 0.0 ? v : 0.0;
}
}  // namespace detail

struct ZoneEncoding {
  Mat h_z;           // K x N node-level representation
  Feature selected;  // row of h_z picked by the sub-goal zone
};

/// One graph-convolution layer over the zone graph, then the sub-goal row.
inline ZoneEncoding zone_forward(const Mat& e_hat, const Mat& nodes,
                                 const GcnParams& params, int sub_goal) {
  if (e_hat.rows != e_hat.cols) throw Error("zone_forward: e_hat not square");
  if (e_hat.cols != nodes.rows) throw Error("zone_forward: e_hat/nodes shape mismatch");
  if (nodes.cols != params.w_z.rows)
    throw Error("zone_forward: nodes/w_z shape mismatch");
  if (sub_goal < 0 || sub_goal >= nodes.rows)
    throw Error("zone_forward: sub-goal index out of range");
  ZoneEncoding out;
  out.h_z = matmul(matmul(e_hat, nodes), params.w_z);
  detail::relu_in_place(out.h_z);
  auto row = out.h_z.row(sub_goal);  // H_z^T times a one-hot column
  out.selected.assign(row.begin(), row.end());
  return out;
}

struct ObjectEncoding {
  Mat h_o;    // N x N object representation
  Mat fused;  // N x D_v product with the appearance matrix
};

/// Build the object-GCN input from a detection frame: four box coordinates,
/// the confidence score, and a target-category indicator per row.
inline Mat build_object_input(const DetectionFrame& frame, int target) {
  if (frame.boxes.rows != kCategoryCount || frame.boxes.cols != 4)
    throw Error("object input: boxes must be N x 4");
  if (static_cast<int>(frame.conf.size()) != kCategoryCount)
    throw Error("object input: confidence length mismatch");
  if (target < 0 || target >= kCategoryCount)
    throw Error("object input: bad target category");
  Mat x(kCategoryCount, 6);
  for (int i = 0; i < kCategoryCount; ++i) {
    for (int c = 0; c < 4; ++c) x(i, c) = frame.boxes(i, c);
    x(i, 4) = frame.conf[i];
    x(i, 5) = i == target ? 1.0 : 0.0;
  }
  return x;
}

/// One graph-convolution layer over the object graph, fused with appearance.
inline ObjectEncoding object_forward(const Mat& x_o, const Mat& f_v,
                                     const GcnParams& params) {
  if (x_o.rows != params.a.cols) throw Error("object_forward: x_o rows mismatch");
  if (x_o.cols != params.w_o.rows) throw Error("object_forward: x_o must have 6 columns");
  if (f_v.rows != params.a.rows)
    throw Error("object_forward: appearance rows mismatch");
  ObjectEncoding out;
  out.h_o = matmul(matmul(params.a, x_o), params.w_o);
  detail::relu_in_place(out.h_o);
  out.fused = matmul(out.h_o, f_v);
  return out;
}

/// Joint step representation: the bag feature, then the selected zone row,
/// then the fused object matrix flattened row-major. The parameter file
/// records this layout.
inline Feature encode_state(const Feature& bag, const ZoneEncoding& zone,
                            const ObjectEncoding& object) {
  Feature s;
  s.reserve(bag.size() + zone.selected.size() + object.fused.a.size());
  s.insert(s.end(), bag.begin(), bag.end());
  s.insert(s.end(), zone.selected.begin(), zone.selected.end());
  s.insert(s.end(), object.fused.a.begin(), object.fused.a.end());
  return s;
}

// ---------------------------------------------------------------------------
// Parameter file
// ---------------------------------------------------------------------------

inline std::string serialize_params(const GcnParams& p) {
  validate_params(p);
  std::string out = "hozparams 1\n";
  out += "n " + std::to_string(p.w_z.rows) + "\n";
  out += "seed " + std::to_string(p.seed) + "\n";
  out += "layout bag zone_selected object_fused_rowmajor\n";
  auto emit = [&out](const char* name, const Mat& m) {
    out += name;
    out += "\n";
    for (int i = 0; i < m.rows; ++i) {
      for (int j = 0; j < m.cols; ++j) {
        if (j) out += ' ';
        out += format_double(m(i, j));
      }
      out += '\n';
    }
  };
  emit("w_z", p.w_z);
  emit("w_o", p.w_o);
  emit("a", p.a);
  out += "end\n";
  return out;
}

inline GcnParams parse_params(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const std::string& what) {
    if (!std::getline(in, line))
      throw Error("params file: truncated, expected " + what);
    return line;
  };
  if (next_line("header") != "hozparams 1")
    throw Error("params file: bad header: " + line);

  auto expect_kv = [&](const std::string& key) {
    next_line(key);
    if (line.rfind(key + " ", 0) != 0)
      throw Error("params file: expected '" + key + "', got: " + line);
    return line.substr(key.size() + 1);
  };
  int n = std::stoi(expect_kv("n"));
  if (n < 1) throw Error("params file: bad n");
  GcnParams p;
  p.seed = std::stoull(expect_kv("seed"));
  std::string layout = expect_kv("layout");
  if (layout != "bag zone_selected object_fused_rowmajor")
    throw Error("params file: unknown layout: " + layout);

  auto read_matrix = [&](const char* name, int rows, int cols) {
    if (next_line(name) != name)
      throw Error("params file: expected '" + std::string(name) + "', got: " + line);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      next_line("matrix row");
      std::istringstream row(line);
      std::string tok;
      for (int j = 0; j < cols; ++j) {
        if (!(row >> tok)) throw Error("params file: short row in " + std::string(name));
        m(i, j) = parse_double(tok);
      }
      if (row >> tok) throw Error("params file: extra token in " + std::string(name));
    }
    return m;
  };
  p.w_z = read_matrix("w_z", n, n);
  p.w_o = read_matrix("w_o", 6, n);
  p.a = read_matrix("a", n, n);
  if (next_line("end") != "end") throw Error("params file: missing end");
  validate_params(p);
  return p;
}

inline void save_params(const GcnParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize_params(p);
}

inline GcnParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str());
}

}  // namespace hoz
