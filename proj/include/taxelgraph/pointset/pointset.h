#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "taxelgraph/diffcore/matrix.h"

namespace taxelgraph {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double squared_norm(Vec3 a) { return dot(a, a); }
inline double norm(Vec3 a) { return std::sqrt(squared_norm(a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// One taxel reading. Position in meters, pressure normalized to [0, 1].
struct TaxelPoint {
  int taxel_id = 0;
  Vec3 position;
  double pressure = 0.0;

  friend bool operator==(const TaxelPoint&, const TaxelPoint&) = default;
};

// Ordered set of taxels; taxel ids are unique. Empty means no contact.
using PointSet = std::vector<TaxelPoint>;

bool has_unique_ids(std::span<const TaxelPoint> points);

inline constexpr double kDefaultActivationThreshold = 0.01;

// Taxels with pressure >= threshold, in their original order.
PointSet activated_subset(std::span<const TaxelPoint> raw_frame,
                          double threshold = kDefaultActivationThreshold);

// Directed edge source -> target (message from j to i).
struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// kNN graph over a point set. Edges are grouped by target node in ascending
// order; within a target they are ordered nearest first.
struct TactileGraph {
  PointSet points;
  std::vector<Edge> edges;
  std::size_t k = 3;
  Matrix features;  // points.size() x C; may have zero columns

  std::size_t node_count() const { return points.size(); }
  // [begin, end) of the edges entering `target`.
  std::pair<std::size_t, std::size_t> incoming(std::size_t target) const;

  std::vector<std::size_t> edge_offsets;  // node_count() + 1 entries
};

inline constexpr std::size_t kDefaultNeighbors = 3;

// Rebuilt from scratch on every call. Each node i receives edges from its
// min(k, N-1) nearest other nodes, ordered by (distance, taxel_id).
TactileGraph build_knn_graph(const PointSet& points, std::size_t k = kDefaultNeighbors);
TactileGraph build_knn_graph(const PointSet& points, std::size_t k, Matrix features);

// Greedy farthest point sampling. The first pick is the point farthest from
// the centroid; every later pick maximizes the distance to the picked set.
// Ties go to the smallest (x, y, z), then the smallest taxel_id.
// Returns indices into `points` in selection order.
std::vector<std::size_t> fps(const PointSet& points, std::size_t m);

inline constexpr double kDefaultSamplingRatio = 0.5;

std::size_t downsampled_count(std::size_t n, double ratio);

// Keeps max(1, ceil(ratio * N)) nodes chosen by fps, carrying their feature
// rows, and rebuilds the kNN edges among them.
TactileGraph downsample_graph(const TactileGraph& graph, double ratio = kDefaultSamplingRatio);
// Same, also returning which input nodes survived (selection order).
TactileGraph downsample_graph(const TactileGraph& graph, double ratio,
                              std::vector<std::size_t>& selected);

}  // namespace taxelgraph
