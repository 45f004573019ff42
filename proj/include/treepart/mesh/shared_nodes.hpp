#pragma once

#include <map>
#include <utility>
#include <vector>

#include "treepart/mesh/graph.hpp"
#include "treepart/mesh/mesh.hpp"

namespace treepart::mesh {

/// For ordered partition pairs (p, q): sorted ids of nodes used by elements of both.
class SharedNodeTable {
 public:
  using PairKey = std::pair<int, int>;

  void add(int p, int q, NodeId node) { entries_[{p, q}].push_back(node); }
  void set(int p, int q, std::vector<NodeId> nodes) { entries_[{p, q}] = std::move(nodes); }
  /// Sorts and deduplicates every list and drops empty ones.
  void normalize();

  const std::map<PairKey, std::vector<NodeId>>& entries() const { return entries_; }
  std::vector<NodeId> between(int p, int q) const;
  /// Partitions q with a (p, q) entry, ascending.
  std::vector<int> neighbors(int p) const;
  bool empty() const { return entries_.empty(); }
  /// table(p, q) == table(q, p) for every stored pair.
  bool symmetric() const;
  void merge(const SharedNodeTable& other);

  bool operator==(const SharedNodeTable&) const = default;

 private:
  std::map<PairKey, std::vector<NodeId>> entries_;
};

/**
 * Collective over the partitions' ranks (part ids must be ranks of `comm`).
 * Every (node, part) incidence goes to the node's directory owner, which sends
 * each sharing part the node together with its sharer set. Returns the rows
 * (p, q) with p == comm.rank().
 */
SharedNodeTable find_shared_nodes(simrt::Communicator& comm, const MeshChunk& local,
                                  const Assignment& assignment);

/// Partition of each local element is the rank holding it.
SharedNodeTable find_shared_nodes(simrt::Communicator& comm, const MeshChunk& local);

/// Root receives the union of every rank's rows.
SharedNodeTable gather_shared_nodes(simrt::Communicator& comm, const SharedNodeTable& rows,
                                    int root = 0);

/**
 * Percentage growth of the global problem size when each part adds a
 * `layers`-deep overlap of dual-graph neighbours: (sum_p |part_p + halo_p| - N) / N * 100.
 */
double halo_growth(const Graph& dual, const Assignment& assignment, int layers);

}  // namespace treepart::mesh
