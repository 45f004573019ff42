#pragma once

#include <optional>
#include <vector>

#include "treepart/hwtopo/topology.hpp"
#include "treepart/simrt/runtime.hpp"

namespace treepart::hwtopo {

struct Payload {
  Rank owner = 0;
  simrt::Bytes bytes;
  int tag = 0;

  bool operator==(const Payload&) const = default;
};

inline constexpr int kAggregateTag = simrt::kReservedTagBase + 16;
inline constexpr int kCascadeTag = simrt::kReservedTagBase + 17;

/// Communicator over the level-`level` group that contains the calling rank.
simrt::Communicator group_communicator(const simrt::Communicator& world, int level);

/// Communicator over the leaders of all level-`level` groups; empty on non-leaders.
std::optional<simrt::Communicator> leader_communicator(const simrt::Communicator& world,
                                                       int level);

/**
 * Communicator over the leaders of the level-`level` groups that share the
 * caller's level-(`level`-1) parent (all level-`level` leaders when level is 0).
 * Empty on ranks that do not lead a level-`level` group.
 */
std::optional<simrt::Communicator> sibling_leader_communicator(const simrt::Communicator& world,
                                                               int level);

/**
 * Collective over `group`. The leader (local rank 0) receives every member's
 * payload in member order with `owner` set to the member's world rank; other
 * members receive nothing. A singleton group exchanges no messages.
 */
std::optional<std::vector<Payload>> aggregate(simrt::Communicator& group, Payload payload);

/// Inverse of aggregate: member i receives payloads[i] from the leader.
Payload cascade(simrt::Communicator& group, std::vector<Payload> payloads);

}  // namespace treepart::hwtopo
