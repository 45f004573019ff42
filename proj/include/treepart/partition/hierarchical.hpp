#pragma once

#include <vector>

#include "treepart/partition/partition.hpp"
#include "treepart/simrt/runtime.hpp"

namespace treepart::partition {

enum class Approach {
  /// Cascade equal id blocks to the next level, then partition them collectively there.
  cascade_then_distributed = 1,
  /// The group leader partitions for the whole group, then cascades finished parts.
  partition_then_cascade = 2,
};

struct HierarchicalPlan {
  int bpl = 0;
  Method method = Method::rcb;
  /// Per-level override; empty means `method` everywhere, otherwise one entry per level.
  std::vector<Method> level_methods;
  Approach approach = Approach::partition_then_cascade;
  double tolerance = 1.02;

  Method method_at(int level) const;
};

void check(const HierarchicalPlan& plan, const hwtopo::TopologyTree& tree);

/**
 * Collective over every rank. Chunks are aggregated to the leaders of the
 * bootstrap level, partitioned there into one part per bootstrap group, and
 * pushed down one level at a time until every leaf holds its final chunk,
 * which is returned (elements sorted by id).
 *
 * Traffic phases: "partition/aggregate", "partition/bpl", "partition/level<l>".
 */
mesh::MeshChunk hierarchical_partition(simrt::Communicator& world, const mesh::MeshChunk& local,
                                       const HierarchicalPlan& plan);

}  // namespace treepart::partition
