#pragma once

#include "treepart/partition/partition.hpp"
#include "treepart/simrt/runtime.hpp"

namespace treepart::partition {

/**
 * Collective RCB over points spread across `comm`. Split keys are found by
 * parallel selection (median-of-medians pivots plus reduced counts and weights),
 * so no rank ever holds the whole point set. The result equals rcb() on the
 * union of the points whenever the weight sums are exact (e.g. integer weights).
 */
std::vector<int> distributed_rcb(simrt::Communicator& comm, std::span<const WeightedPoint> local,
                                 int parts);

/**
 * Collective partition of the elements spread over `comm`; returns the part of
 * each local element. The graph method builds the dual graph through the
 * directory and partitions it on the communicator's root.
 */
std::vector<int> partition_distributed(simrt::Communicator& comm, const mesh::MeshChunk& local,
                                       const PartitionRequest& request);

}  // namespace treepart::partition
