#include "treepart/partition/hierarchical.hpp"

#include <string>

#include "treepart/hwtopo/hierarchy.hpp"
#include "treepart/mesh/migrate.hpp"
#include "treepart/partition/distributed.hpp"

namespace treepart::partition {

Method HierarchicalPlan::method_at(int level) const {
  return level_methods.empty() ? method : level_methods.at(static_cast<std::size_t>(level));
}

void check(const HierarchicalPlan& plan, const hwtopo::TopologyTree& tree) {
  if (plan.bpl < 0 || plan.bpl >= tree.depth()) {
    throw InputError("plan: bootstrap level " + std::to_string(plan.bpl) +
                     " is not a level of a " + std::to_string(tree.depth()) + "-level tree");
  }
  if (!plan.level_methods.empty() &&
      plan.level_methods.size() != static_cast<std::size_t>(tree.depth())) {
    throw InputError("plan: " + std::to_string(plan.level_methods.size()) +
                     " level methods for a " + std::to_string(tree.depth()) + "-level tree");
  }
  check(PartitionRequest{1, plan.method, plan.tolerance});
}

namespace {

template <class F>
auto at_level(int level, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    throw InputError("level " + std::to_string(level) + ": " + e.what());
  }
}

std::vector<hwtopo::Payload> packed(const std::vector<mesh::MeshChunk>& pieces) {
  std::vector<hwtopo::Payload> out;
  for (const auto& p : pieces) out.push_back({0, mesh::pack(p), 0});
  return out;
}

}  // namespace

mesh::MeshChunk hierarchical_partition(simrt::Communicator& world, const mesh::MeshChunk& local,
                                       const HierarchicalPlan& plan) {
  const auto& tree = world.topology();
  check(plan, tree);
  const int bpl = plan.bpl;

  mesh::MeshChunk held = local.empty_like();
  {
    simrt::PhaseScope phase(world, "partition/aggregate");
    auto group = hwtopo::group_communicator(world, bpl);
    if (auto all = hwtopo::aggregate(group, {world.world_rank(), mesh::pack(local), 0})) {
      std::vector<mesh::MeshChunk> chunks;
      for (const auto& p : *all) chunks.push_back(mesh::unpack(p.bytes));
      held = mesh::merge(chunks);
    }
  }

  if (auto leaders = hwtopo::leader_communicator(world, bpl)) {
    simrt::PhaseScope phase(world, "partition/bpl");
    const PartitionRequest request{tree.group_count(bpl), plan.method_at(bpl), plan.tolerance};
    const auto dest =
        at_level(bpl, [&] { return partition_distributed(*leaders, held, request); });
    held = mesh::migrate(*leaders, held, dest);
  }

  for (int level = bpl + 1; level < tree.depth(); ++level) {
    auto siblings = hwtopo::sibling_leader_communicator(world, level);
    if (!siblings) continue;
    simrt::PhaseScope phase(world, "partition/level" + std::to_string(level));
    const int arity = siblings->size();
    const PartitionRequest request{arity, plan.method_at(level), plan.tolerance};
    const bool parent = siblings->rank() == 0;

    if (plan.approach == Approach::partition_then_cascade) {
      std::vector<hwtopo::Payload> payloads;
      if (parent) {
        const auto part = at_level(level, [&] { return partition_chunk(held, request); });
        payloads = packed(mesh::split(held, part, arity));
      }
      held = mesh::unpack(hwtopo::cascade(*siblings, std::move(payloads)).bytes);
    } else {
      std::vector<hwtopo::Payload> payloads;
      if (parent) {
        const std::size_t n = held.elements.size();
        std::vector<int> block(n);
        for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<int>(i * arity / n);
        payloads = packed(mesh::split(held, block, arity));
      }
      held = mesh::unpack(hwtopo::cascade(*siblings, std::move(payloads)).bytes);
      const auto dest =
          at_level(level, [&] { return partition_distributed(*siblings, held, request); });
      held = mesh::migrate(*siblings, held, dest);
    }
  }
  return held;
}

}  // namespace treepart::partition
