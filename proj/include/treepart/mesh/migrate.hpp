#pragma once

#include <span>

#include "treepart/mesh/mesh.hpp"

namespace treepart::mesh {

/**
 * Collective. Sends each local element (with its node records and boundary
 * faces) to `destination[i]`, a rank of `comm`, using a blind exchange. The
 * result holds exactly the elements sent to this rank, sorted by id, with one
 * copy of every node they reference. Elements are never duplicated; only node
 * records are replicated across ranks.
 */
MeshChunk migrate(simrt::Communicator& comm, const MeshChunk& local,
                  std::span<const int> destination);

/// Destination of each local element is assignment.at(id); throws for unassigned elements.
MeshChunk migrate(simrt::Communicator& comm, const MeshChunk& local, const Assignment& assignment);

}  // namespace treepart::mesh
