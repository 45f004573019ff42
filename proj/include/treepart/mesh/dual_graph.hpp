#pragma once

#include <vector>

#include "treepart/mesh/graph.hpp"
#include "treepart/mesh/mesh.hpp"

namespace treepart::mesh {

/// A face contained in more than two elements.
struct NonManifoldFace {
  std::vector<NodeId> nodes;
  std::vector<ElementId> elements;

  bool operator==(const NonManifoldFace&) const = default;
};

/// Rows of the dual graph for the elements a rank holds. Neighbour ids are global.
struct DualGraphPart {
  std::vector<ElementId> vertices;
  std::vector<std::vector<ElementId>> adjacency;
  std::vector<double> weights;
  std::vector<NonManifoldFace> non_manifold;
};

/**
 * Collective. Elements are adjacent iff they share a full face. Node -> element
 * incidence is inserted into a directory keyed by node id and queried back for
 * the local nodes; nothing is all-gathered.
 */
DualGraphPart build_dual_graph(simrt::Communicator& comm, const MeshChunk& local);

/// Same contract on a chunk held entirely by the caller; neighbours outside it are absent.
DualGraphPart local_dual_graph(const MeshChunk& chunk);

/// Root receives the global graph over element ids 0..elements-1.
Graph gather_dual_graph(simrt::Communicator& comm, const DualGraphPart& part,
                        std::int64_t elements, int root = 0);

/// Renumbers a part by position in `vertices`, dropping neighbours outside it.
Graph to_local_graph(const DualGraphPart& part);

}  // namespace treepart::mesh
