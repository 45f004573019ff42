#include "treepart/shhalo/halo.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <string>

#include "treepart/hwtopo/hierarchy.hpp"

namespace treepart::shhalo {

namespace {
constexpr int kHaloTag = simrt::kReservedTagBase + 96;
}

std::size_t HaloSchedule::recv_entries() const {
  std::size_t n = 0;
  for (const auto& nb : neighbors) n += nb.recv.size();
  return n;
}

std::uint64_t HaloSchedule::send_bytes(Locality channel, int arity) const {
  std::uint64_t bytes = 0;
  for (const auto& nb : neighbors) {
    if (nb.channel == channel) bytes += nb.send.size() * static_cast<std::uint64_t>(arity) * kValueWidth;
  }
  return bytes;
}

HaloSchedule build_schedule(const mesh::SharedNodeTable& table, int part,
                            const hwtopo::TopologyTree& tree) {
  HaloSchedule s{part, {}};
  for (int q : table.neighbors(part)) {
    if (q < 0 || q >= tree.total_ranks()) {
      throw InputError("halo: partition " + std::to_string(q) + " is not a leaf of the topology");
    }
    auto nodes = table.between(part, q);
    const auto channel = tree.same_node(part, q) ? Locality::intranode : Locality::internode;
    s.neighbors.push_back({q, nodes, nodes, channel});
  }
  return s;
}

std::vector<HaloSchedule> build_schedules(const mesh::SharedNodeTable& table,
                                          const hwtopo::TopologyTree& tree) {
  if (!table.symmetric()) throw InvariantViolation("halo: shared-node table is not symmetric");
  std::vector<HaloSchedule> out;
  for (int p = 0; p < tree.total_ranks(); ++p) out.push_back(build_schedule(table, p, tree));
  return out;
}

FieldData FieldData::zeros(std::vector<NodeId> nodes, int arity) {
  if (arity < 1) throw InputError("field: arity must be >= 1");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  FieldData f{arity, std::move(nodes), {}};
  f.values.assign(f.nodes.size() * static_cast<std::size_t>(arity), 0.0);
  return f;
}

std::span<double> FieldData::at(NodeId node) {
  auto c = std::as_const(*this).at(node);
  return {const_cast<double*>(c.data()), c.size()};
}

std::span<const double> FieldData::at(NodeId node) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node) {
    throw InputError("field: node " + std::to_string(node) + " is not local");
  }
  const auto i = static_cast<std::size_t>(it - nodes.begin()) * static_cast<std::size_t>(arity);
  return {values.data() + i, static_cast<std::size_t>(arity)};
}

void exchange(simrt::Communicator& world, const HaloSchedule& schedule, FieldData& field,
              HaloMode mode) {
  const int me = world.rank();
  const auto width = static_cast<std::size_t>(field.arity);
  for (const auto& nb : schedule.neighbors) {
    simrt::Bytes bytes(nb.send.size() * width * kValueWidth);
    std::byte* out = bytes.data();
    for (NodeId n : nb.send) {
      auto v = field.at(n);
      std::memcpy(out, v.data(), v.size_bytes());
      out += v.size_bytes();
    }
    if (nb.channel == Locality::intranode) {
      world.shared_copy(nb.neighbor, kHaloTag, std::move(bytes));
    } else {
      world.send(nb.neighbor, kHaloTag, std::move(bytes));
    }
  }
  hwtopo::group_communicator(world, 0).barrier();

  // node -> contributions by rank, own value included
  std::map<NodeId, std::map<int, std::vector<double>>> replicas;
  for (const auto& nb : schedule.neighbors) {
    auto bytes = nb.channel == Locality::intranode ? world.take_shared(nb.neighbor, kHaloTag)
                                                   : world.recv(nb.neighbor, kHaloTag).bytes;
    if (bytes.size() != nb.recv.size() * width * kValueWidth) {
      throw InputError("halo: rank " + std::to_string(nb.neighbor) + " sent " +
                       std::to_string(bytes.size() / kValueWidth) + " values for " +
                       std::to_string(nb.recv.size()) + " nodes at arity " +
                       std::to_string(field.arity) + "; field arity differs");
    }
    const std::byte* in = bytes.data();
    for (NodeId n : nb.recv) {
      std::vector<double> v(width);
      std::memcpy(v.data(), in, width * kValueWidth);
      in += width * kValueWidth;
      auto& slot = replicas[n];
      if (slot.empty()) {
        auto own = field.at(n);
        slot[me].assign(own.begin(), own.end());
      }
      slot[nb.neighbor] = std::move(v);
    }
  }
  for (auto& [node, by_rank] : replicas) {
    auto target = field.at(node);
    auto it = by_rank.begin();
    std::vector<double> result = it->second;
    if (mode == HaloMode::accumulate_sum) {
      for (++it; it != by_rank.end(); ++it) {
        for (std::size_t k = 0; k < width; ++k) result[k] += it->second[k];
      }
    }
    std::copy(result.begin(), result.end(), target.begin());
  }
}

}  // namespace treepart::shhalo
