#include "treepart/mesh/migrate.hpp"

#include <map>

#include "treepart/odd/directory.hpp"

namespace treepart::mesh {

namespace {
constexpr int kMigrateTag = simrt::kReservedTagBase + 48;
}

MeshChunk migrate(simrt::Communicator& comm, const MeshChunk& local,
                  std::span<const int> destination) {
  auto pieces = split(local, destination, comm.size());
  std::map<int, simrt::Bytes> outgoing;
  for (int r = 0; r < comm.size(); ++r) {
    if (!pieces[r].elements.empty()) outgoing[r] = pack(pieces[r]);
  }
  std::vector<MeshChunk> received;
  received.push_back(local.empty_like());
  for (const auto& msg : odd::blind_exchange(comm, std::move(outgoing), kMigrateTag)) {
    received.push_back(unpack(msg.bytes));
  }
  return merge(received);
}

MeshChunk migrate(simrt::Communicator& comm, const MeshChunk& local, const Assignment& assignment) {
  std::vector<int> destination;
  destination.reserve(local.elements.size());
  for (const auto& e : local.elements) destination.push_back(assignment.at(e.id));
  return migrate(comm, local, destination);
}

}  // namespace treepart::mesh
