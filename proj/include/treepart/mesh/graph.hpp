#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace treepart::mesh {

/// Undirected graph in CSR form; every edge is stored in both directions.
struct Graph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::int64_t> adjacency;
  std::vector<double> weights;  // per vertex; empty means unit weights

  std::size_t vertex_count() const { return offsets.size() - 1; }
  std::size_t edge_count() const { return adjacency.size() / 2; }
  std::span<const std::int64_t> neighbors(std::size_t v) const {
    return {adjacency.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
  double weight(std::size_t v) const { return weights.empty() ? 1.0 : weights[v]; }
  double total_weight() const;
  bool symmetric() const;

  static Graph from_adjacency(const std::vector<std::vector<std::int64_t>>& lists,
                              std::vector<double> weights = {});
};

/// Number of edges whose endpoints carry different part ids.
std::int64_t edge_cut(const Graph& graph, std::span<const int> part);

/// rows x cols 4-neighbour grid; vertex r*cols + c.
Graph grid_graph(int rows, int cols);

}  // namespace treepart::mesh
