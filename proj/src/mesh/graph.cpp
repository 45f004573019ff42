#include "treepart/mesh/graph.hpp"

#include <algorithm>

namespace treepart::mesh {

double Graph::total_weight() const {
  double sum = 0.0;
  for (std::size_t v = 0; v < vertex_count(); ++v) sum += weight(v);
  return sum;
}

bool Graph::symmetric() const {
  for (std::size_t v = 0; v < vertex_count(); ++v) {
    for (auto u : neighbors(v)) {
      if (u == static_cast<std::int64_t>(v)) return false;
      auto back = neighbors(static_cast<std::size_t>(u));
      if (std::find(back.begin(), back.end(), static_cast<std::int64_t>(v)) == back.end()) {
        return false;
      }
    }
  }
  return true;
}

Graph Graph::from_adjacency(const std::vector<std::vector<std::int64_t>>& lists,
                            std::vector<double> weights) {
  Graph g;
  g.offsets.reserve(lists.size() + 1);
  for (const auto& l : lists) {
    g.adjacency.insert(g.adjacency.end(), l.begin(), l.end());
    g.offsets.push_back(g.adjacency.size());
  }
  g.weights = std::move(weights);
  return g;
}

std::int64_t edge_cut(const Graph& graph, std::span<const int> part) {
  std::int64_t cut = 0;
  for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
    for (auto u : graph.neighbors(v)) {
      if (static_cast<std::int64_t>(v) < u && part[v] != part[u]) ++cut;
    }
  }
  return cut;
}

Graph grid_graph(int rows, int cols) {
  std::vector<std::vector<std::int64_t>> lists(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto& l = lists[r * cols + c];
      if (r > 0) l.push_back((r - 1) * cols + c);
      if (c > 0) l.push_back(r * cols + c - 1);
      if (c + 1 < cols) l.push_back(r * cols + c + 1);
      if (r + 1 < rows) l.push_back((r + 1) * cols + c);
    }
  }
  return Graph::from_adjacency(lists);
}

}  // namespace treepart::mesh
