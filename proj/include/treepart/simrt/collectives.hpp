#pragma once

#include <functional>
#include <vector>

#include "treepart/simrt/runtime.hpp"

namespace treepart::simrt {

// Linear point-to-point collectives. Results are folded in rank order, so they
// do not depend on message arrival order.

inline constexpr int kGatherTag = kReservedTagBase + 1;
inline constexpr int kBroadcastTag = kReservedTagBase + 2;

/// Root receives every rank's buffer, indexed by rank; other ranks get an empty vector.
std::vector<Bytes> gather(Communicator& comm, Bytes data, int root = 0);

Bytes broadcast(Communicator& comm, Bytes data, int root = 0);

template <Packable T, class Op>
T allreduce(Communicator& comm, const T& value, Op op) {
  ByteWriter w;
  w.put(value);
  auto parts = gather(comm, w.take());
  Bytes result;
  if (comm.rank() == 0) {
    T acc = ByteReader(parts[0]).get<T>();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = op(acc, ByteReader(parts[i]).get<T>());
    ByteWriter out;
    out.put(acc);
    result = out.take();
  }
  return ByteReader(broadcast(comm, std::move(result))).get<T>();
}

template <Packable T>
T allreduce_sum(Communicator& comm, const T& value) {
  return allreduce(comm, value, std::plus<T>{});
}

template <Packable T>
T allreduce_max(Communicator& comm, const T& value) {
  return allreduce(comm, value, [](const T& a, const T& b) { return a < b ? b : a; });
}

}  // namespace treepart::simrt
