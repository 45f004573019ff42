#include "treepart/hwtopo/hierarchy.hpp"

#include <numeric>

namespace treepart::hwtopo {

namespace {

constexpr std::uint64_t kGroupPurpose = 0x67726f7570ULL;
constexpr std::uint64_t kLeaderPurpose = 0x6c65616465ULL;
constexpr std::uint64_t kSiblingPurpose = 0x7369626cULL;

std::vector<Rank> leaders_in(const TopologyTree& tree, int level, Rank first, Rank last) {
  std::vector<Rank> leaders;
  for (Rank r = first; r < last; r += tree.group_size(level)) leaders.push_back(r);
  return leaders;
}

}  // namespace

simrt::Communicator group_communicator(const simrt::Communicator& world, int level) {
  const auto& tree = world.topology();
  return world.subset(group_members(tree, level, world.world_rank()),
                      kGroupPurpose + static_cast<std::uint64_t>(level));
}

std::optional<simrt::Communicator> leader_communicator(const simrt::Communicator& world,
                                                       int level) {
  const auto& tree = world.topology();
  const Rank me = world.world_rank();
  if (me % tree.group_size(level) != 0) return std::nullopt;
  return world.subset(leaders_in(tree, level, 0, tree.total_ranks()),
                      kLeaderPurpose + static_cast<std::uint64_t>(level));
}

std::optional<simrt::Communicator> sibling_leader_communicator(const simrt::Communicator& world,
                                                               int level) {
  const auto& tree = world.topology();
  const Rank me = world.world_rank();
  if (me % tree.group_size(level) != 0) return std::nullopt;
  Rank first = 0;
  Rank last = tree.total_ranks();
  if (level > 0) {
    std::tie(first, last) = tree.group_range(level - 1, tree.group_of(me, level - 1));
  }
  return world.subset(leaders_in(tree, level, first, last),
                      kSiblingPurpose + static_cast<std::uint64_t>(level));
}

std::optional<std::vector<Payload>> aggregate(simrt::Communicator& group, Payload payload) {
  if (group.rank() != 0) {
    simrt::ByteWriter w;
    w.put(payload.tag);
    w.put_bytes(payload.bytes);
    group.send(0, kAggregateTag, w.take());
    return std::nullopt;
  }
  std::vector<Payload> out;
  out.reserve(group.size());
  payload.owner = group.world_rank();
  out.push_back(std::move(payload));
  for (int member = 1; member < group.size(); ++member) {
    auto msg = group.recv(member, kAggregateTag);
    simrt::ByteReader r(msg.bytes);
    Payload p;
    p.owner = group.world_rank_of(member);
    p.tag = r.get<int>();
    p.bytes = r.get_bytes();
    out.push_back(std::move(p));
  }
  return out;
}

Payload cascade(simrt::Communicator& group, std::vector<Payload> payloads) {
  if (group.rank() != 0) {
    auto msg = group.recv(0, kCascadeTag);
    simrt::ByteReader r(msg.bytes);
    Payload p;
    p.owner = group.world_rank();
    p.tag = r.get<int>();
    p.bytes = r.get_bytes();
    return p;
  }
  if (payloads.size() != static_cast<std::size_t>(group.size())) {
    throw InputError("cascade: leader holds " + std::to_string(payloads.size()) +
                     " payloads for a group of " + std::to_string(group.size()));
  }
  for (int member = 1; member < group.size(); ++member) {
    simrt::ByteWriter w;
    w.put(payloads[member].tag);
    w.put_bytes(payloads[member].bytes);
    group.send(member, kCascadeTag, w.take());
  }
  Payload own = std::move(payloads[0]);
  own.owner = group.world_rank();
  return own;
}

}  // namespace treepart::hwtopo
