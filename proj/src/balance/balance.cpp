#include "treepart/balance/balance.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <string>

#include "treepart/hwtopo/hierarchy.hpp"
#include "treepart/mesh/migrate.hpp"
#include "treepart/simrt/collectives.hpp"

namespace treepart::balance {

ElementWeights derive_weights(std::span<const BlockTiming> timings,
                              std::span<const ElementId> local) {
  ElementWeights weights;
  for (std::size_t b = 0; b < timings.size(); ++b) {
    const auto& block = timings[b];
    if (!(block.seconds >= 0.0)) {
      throw InputError("timing: block " + std::to_string(b) + " has a negative time");
    }
    if (block.elements.empty()) continue;
    const double w =
        std::max(kWeightFloor, block.seconds / static_cast<double>(block.elements.size()));
    for (ElementId id : block.elements) weights[id] = w;
  }
  for (ElementId id : local) {
    if (!weights.contains(id)) {
      throw InputError("timing: element " + std::to_string(id) + " is in no block");
    }
  }
  return weights;
}

void apply_weights(mesh::MeshChunk& chunk, const ElementWeights& weights) {
  for (auto& e : chunk.elements) {
    auto it = weights.find(e.id);
    if (it == weights.end()) {
      throw InputError("weights: element " + std::to_string(e.id) + " has no weight");
    }
    if (!(it->second > 0.0)) {
      throw InputError("weights: element " + std::to_string(e.id) + " has a non-positive weight");
    }
    e.weight = it->second;
  }
}

double imbalance(std::span<const double> part_weights) {
  if (part_weights.empty()) throw InputError("imbalance: no parts");
  const double total = std::accumulate(part_weights.begin(), part_weights.end(), 0.0);
  if (total <= 0.0) return 1.0;
  const double mean = total / static_cast<double>(part_weights.size());
  return *std::max_element(part_weights.begin(), part_weights.end()) / mean;
}

std::vector<double> part_weights(const mesh::Assignment& assignment,
                                 std::span<const double> element_weights, int parts) {
  if (element_weights.size() != assignment.size()) {
    throw InputError("imbalance: " + std::to_string(element_weights.size()) + " weights for " +
                     std::to_string(assignment.size()) + " elements");
  }
  std::vector<double> out(static_cast<std::size_t>(std::max(parts, 0)), 0.0);
  for (std::size_t e = 0; e < assignment.size(); ++e) {
    const int p = assignment.at(static_cast<ElementId>(e));
    if (p >= parts) {
      throw InputError("imbalance: element " + std::to_string(e) + " targets part " +
                       std::to_string(p) + " of " + std::to_string(parts));
    }
    out[p] += element_weights[e];
  }
  return out;
}

double imbalance(const mesh::Assignment& assignment, std::span<const double> element_weights,
                 int parts) {
  return imbalance(part_weights(assignment, element_weights, parts));
}

namespace {

constexpr int kDecisionTag = 1;

struct Decision {
  double before = 1.0;
  double after = 1.0;
  bool changed = false;
};

simrt::Bytes pack_summaries(const std::vector<partition::ElementSummary>& list) {
  simrt::ByteWriter w;
  w.put<std::uint64_t>(list.size());
  for (const auto& s : list) w.put(s.id).put(s.centroid).put(s.weight).put_vector(s.nodes);
  return w.take();
}

std::vector<partition::ElementSummary> unpack_summaries(std::span<const std::byte> bytes) {
  simrt::ByteReader r(bytes);
  std::vector<partition::ElementSummary> out(r.get<std::uint64_t>());
  for (auto& s : out) {
    s.id = r.get<ElementId>();
    s.centroid = r.get<mesh::Point>();
    s.weight = r.get<double>();
    s.nodes = r.get_vector<mesh::NodeId>();
  }
  return out;
}

Decision redistribute(simrt::Communicator& group, const mesh::MeshChunk& local,
                      const RebalanceOptions& options, mesh::MeshChunk& result) {
  const bool with_nodes = options.method == partition::Method::graph;
  auto mine = partition::summarize(local, with_nodes);
  auto gathered = hwtopo::aggregate(group, {group.world_rank(), pack_summaries(mine), 0});

  std::vector<hwtopo::Payload> replies;
  if (gathered) {
    const int k = group.size();
    std::vector<std::vector<partition::ElementSummary>> members;
    std::vector<partition::ElementSummary> all;
    std::vector<int> current;
    std::vector<double> before(k, 0.0);
    for (int m = 0; m < k; ++m) {
      members.push_back(unpack_summaries((*gathered)[m].bytes));
      for (const auto& s : members.back()) {
        before[m] += s.weight;
        all.push_back(s);
        current.push_back(m);
      }
    }
    Decision d;
    d.before = imbalance(before);
    d.after = d.before;
    std::vector<int> dest = current;
    if (d.before > options.tolerance && all.size() >= static_cast<std::size_t>(k)) {
      const auto proposed = partition::partition_summaries(
          all, local.kind, {k, options.method, options.tolerance});
      std::vector<double> after(k, 0.0);
      for (std::size_t i = 0; i < all.size(); ++i) after[proposed[i]] += all[i].weight;
      if (imbalance(after) < d.before) {
        d.after = imbalance(after);
        d.changed = proposed != current;
        dest = proposed;
      }
    }
    std::size_t at = 0;
    for (int m = 0; m < k; ++m) {
      simrt::ByteWriter w;
      w.put(d);
      std::vector<int> slice(dest.begin() + static_cast<std::ptrdiff_t>(at),
                             dest.begin() + static_cast<std::ptrdiff_t>(at + members[m].size()));
      at += members[m].size();
      w.put_vector(slice);
      replies.push_back({0, w.take(), kDecisionTag});
    }
  }
  auto reply = hwtopo::cascade(group, std::move(replies));
  simrt::ByteReader r(reply.bytes);
  const auto decision = r.get<Decision>();
  const auto dest = r.get_vector<int>();

  result = decision.changed ? mesh::migrate(group, local, dest) : local;
  return decision;
}

}  // namespace

RebalanceOutcome rebalance(simrt::Communicator& world, const mesh::MeshChunk& local,
                           const RebalanceOptions& options) {
  const auto& tree = world.topology();
  if (options.level < 0 || options.level >= tree.depth()) {
    throw InputError("rebalance: level " + std::to_string(options.level) +
                     " is not a level of a " + std::to_string(tree.depth()) + "-level tree");
  }
  auto phase = std::make_unique<simrt::PhaseScope>(
      world, "rebalance/level" + std::to_string(options.level));
  simrt::Communicator group = options.level == 0
                                  ? world
                                  : hwtopo::group_communicator(world, options.level - 1);

  // Leaf totals first: a group within tolerance never ships its summaries.
  const double load = simrt::allreduce_sum(group, local.total_weight());
  const double peak = simrt::allreduce_max(group, local.total_weight());
  const double level_before = load > 0.0 ? peak / (load / group.size()) : 1.0;

  RebalanceOutcome out;
  Decision decision{level_before, level_before, false};
  if (level_before <= options.tolerance) {
    out.chunk = local;
  } else {
    decision = redistribute(group, local, options, out.chunk);
  }
  out.changed = decision.changed;
  phase.reset();

  // Summary statistics only; kept out of the group phase since they cross nodes.
  simrt::PhaseScope stats(world, "rebalance/stats");
  const bool leader = group.rank() == 0;
  out.group_imbalance_before =
      simrt::allreduce_max(world, leader ? decision.before : 0.0);
  out.group_imbalance_after = simrt::allreduce_max(world, leader ? decision.after : 0.0);
  return out;
}

}  // namespace treepart::balance
