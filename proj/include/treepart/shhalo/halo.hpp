#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treepart/hwtopo/topology.hpp"
#include "treepart/mesh/shared_nodes.hpp"
#include "treepart/simrt/ledger.hpp"
#include "treepart/simrt/runtime.hpp"

namespace treepart::shhalo {

using mesh::NodeId;
using simrt::Locality;

/// Halo values travel as raw doubles.
inline constexpr std::size_t kValueWidth = sizeof(double);

struct NeighborSchedule {
  int neighbor = 0;
  std::vector<NodeId> send;
  std::vector<NodeId> recv;
  Locality channel = Locality::internode;

  bool operator==(const NeighborSchedule&) const = default;
};

/// Halo plan of one partition (= leaf rank), neighbours ascending.
struct HaloSchedule {
  int part = 0;
  std::vector<NeighborSchedule> neighbors;

  /// Node entries in the preallocated receive buffers.
  std::size_t recv_entries() const;
  /// Bytes this partition sends on `channel` for one exchange of `arity` values per node.
  std::uint64_t send_bytes(Locality channel, int arity = 1) const;

  bool operator==(const HaloSchedule&) const = default;
};

/// Schedule of `part` from the rows (part, q) of a shared-node table.
HaloSchedule build_schedule(const mesh::SharedNodeTable& table, int part,
                            const hwtopo::TopologyTree& tree);

/// Every partition's schedule from a full table; throws InvariantViolation if it is asymmetric.
std::vector<HaloSchedule> build_schedules(const mesh::SharedNodeTable& table,
                                          const hwtopo::TopologyTree& tree);

/// `arity` values per local node, nodes sorted by id.
struct FieldData {
  int arity = 1;
  std::vector<NodeId> nodes;
  std::vector<double> values;

  static FieldData zeros(std::vector<NodeId> nodes, int arity);
  std::span<double> at(NodeId node);
  std::span<const double> at(NodeId node) const;

  bool operator==(const FieldData&) const = default;
};

enum class HaloMode {
  /// Every replica takes the value held by the lowest-rank sharer.
  replicate_owner,
  /// Every replica takes the sum of all replicas, added in ascending rank order.
  accumulate_sum,
};

/**
 * Collective over the leaf ranks. Intranode neighbours receive a direct copy
 * into their receive buffer (no network bytes); internode neighbours get a
 * message of |send| * arity doubles. A node-level barrier separates the copy
 * and read stages. Throws InputError when a neighbour's field arity differs.
 */
void exchange(simrt::Communicator& world, const HaloSchedule& schedule, FieldData& field,
              HaloMode mode);

}  // namespace treepart::shhalo
