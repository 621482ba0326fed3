#include "taxelgraph/pointset/pointset.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>

namespace taxelgraph {

namespace {

// Strict "a wins the tie against b" rule shared by kNN and FPS.
bool coordinate_less(const TaxelPoint& a, const TaxelPoint& b) {
  return std::tie(a.position.x, a.position.y, a.position.z, a.taxel_id) <
         std::tie(b.position.x, b.position.y, b.position.z, b.taxel_id);
}

}  // namespace

bool has_unique_ids(std::span<const TaxelPoint> points) {
  std::unordered_set<int> seen;
  for (const auto& p : points) {
    if (!seen.insert(p.taxel_id).second) return false;
  }
  return true;
}

PointSet activated_subset(std::span<const TaxelPoint> raw_frame, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("activated_subset: threshold must be > 0");
  PointSet out;
  for (const auto& p : raw_frame) {
    if (p.pressure >= threshold) out.push_back(p);
  }
  return out;
}

std::pair<std::size_t, std::size_t> TactileGraph::incoming(std::size_t target) const {
  return {edge_offsets[target], edge_offsets[target + 1]};
}

TactileGraph build_knn_graph(const PointSet& points, std::size_t k) {
  return build_knn_graph(points, k, Matrix(points.size(), 0));
}

TactileGraph build_knn_graph(const PointSet& points, std::size_t k, Matrix features) {
  if (k == 0) throw std::invalid_argument("build_knn_graph: k must be >= 1");
  if (features.rows() != points.size()) {
    throw std::invalid_argument("build_knn_graph: feature rows must equal node count");
  }
  const std::size_t n = points.size();
  TactileGraph g;
  g.points = points;
  g.k = k;
  g.features = std::move(features);
  g.edge_offsets.assign(n + 1, 0);
  const std::size_t degree = n == 0 ? 0 : std::min(k, n - 1);
  g.edges.reserve(n * degree);

  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.edge_offsets[i] = g.edges.size();
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      candidates.emplace_back(squared_norm(points[j].position - points[i].position), j);
    }
    auto closer = [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return points[a.second].taxel_id < points[b.second].taxel_id;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + degree, candidates.end(), closer);
    for (std::size_t r = 0; r < degree; ++r) g.edges.push_back({candidates[r].second, i});
  }
  g.edge_offsets[n] = g.edges.size();
  return g;
}

std::vector<std::size_t> fps(const PointSet& points, std::size_t m) {
  const std::size_t n = points.size();
  if (m < 1 || m > n) {
    throw std::invalid_argument("fps: m=" + std::to_string(m) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  // Coordinates summed in taxel_id order so the result does not depend on input order.
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return points[a].taxel_id < points[b].taxel_id; });
  Vec3 sum;
  for (std::size_t i : by_id) sum = sum + points[i].position;

  // Distance to the centroid scaled by n, which skips the division and keeps
  // ties exact for exactly representable coordinates.
  const double nd = static_cast<double>(n);
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) score[i] = squared_norm(nd * points[i].position - sum);
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> selected;
  selected.reserve(m);

  auto pick_best = [&]() {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best == n || score[i] > score[best] ||
          (score[i] == score[best] && coordinate_less(points[i], points[best]))) {
        best = i;
      }
    }
    return best;
  };

  std::size_t current = pick_best();
  taken[current] = true;
  selected.push_back(current);
  std::fill(score.begin(), score.end(), std::numeric_limits<double>::infinity());
  while (selected.size() < m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      score[i] = std::min(score[i], squared_norm(points[i].position - points[current].position));
    }
    current = pick_best();
    taken[current] = true;
    selected.push_back(current);
  }
  return selected;
}

std::size_t downsampled_count(std::size_t n, double ratio) {
  const auto m = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(m, 1, n);
}

TactileGraph downsample_graph(const TactileGraph& graph, double ratio) {
  std::vector<std::size_t> selected;
  return downsample_graph(graph, ratio, selected);
}

TactileGraph downsample_graph(const TactileGraph& graph, double ratio,
                              std::vector<std::size_t>& selected) {
  if (graph.node_count() == 0) throw std::invalid_argument("downsample_graph: empty graph");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("downsample_graph: ratio must be in (0, 1]");
  }
  selected = fps(graph.points, downsampled_count(graph.node_count(), ratio));
  PointSet kept;
  kept.reserve(selected.size());
  Matrix features(selected.size(), graph.features.cols());
  for (std::size_t r = 0; r < selected.size(); ++r) {
    kept.push_back(graph.points[selected[r]]);
    auto src = graph.features.row(selected[r]);
    std::copy(src.begin(), src.end(), features.row(r).begin());
  }
  return build_knn_graph(kept, graph.k, std::move(features));
}

}  // namespace taxelgraph
