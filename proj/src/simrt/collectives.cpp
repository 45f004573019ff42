#include "treepart/simrt/collectives.hpp"

namespace treepart::simrt {

std::vector<Bytes> gather(Communicator& comm, Bytes data, int root) {
  std::vector<Bytes> out;
  if (comm.rank() != root) {
    comm.send(root, kGatherTag, std::move(data));
    return out;
  }
  out.resize(comm.size());
  out[root] = std::move(data);
  for (int r = 0; r < comm.size(); ++r) {
    if (r != root) out[r] = comm.recv(r, kGatherTag).bytes;
  }
  return out;
}

Bytes broadcast(Communicator& comm, Bytes data, int root) {
  if (comm.rank() == root) {
    for (int r = 0; r < comm.size(); ++r) {
      if (r != root) comm.send(r, kBroadcastTag, data);
    }
    return data;
  }
  return comm.recv(root, kBroadcastTag).bytes;
}

}  // namespace treepart::simrt
