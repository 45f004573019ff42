#pragma once

#include <map>
#include <span>
#include <vector>

#include "treepart/mesh/mesh.hpp"
#include "treepart/partition/partition.hpp"

namespace treepart::balance {

using mesh::ElementId;

inline constexpr double kWeightFloor = 1e-9;

struct BlockTiming {
  std::vector<ElementId> elements;
  double seconds = 0.0;

  bool operator==(const BlockTiming&) const = default;
};

using ElementWeights = std::map<ElementId, double>;

/**
 * Each element of a block gets block time / block size, floored at
 * kWeightFloor. Every element of `local` must appear in some block.
 */
ElementWeights derive_weights(std::span<const BlockTiming> timings,
                              std::span<const ElementId> local);

/// Overwrites element weights; throws InputError when an element has none.
void apply_weights(mesh::MeshChunk& chunk, const ElementWeights& weights);

/// max / mean over the given part weights; throws InputError for an empty list.
double imbalance(std::span<const double> part_weights);

/// Weight per part in [0, parts) from a total assignment.
std::vector<double> part_weights(const mesh::Assignment& assignment,
                                 std::span<const double> element_weights, int parts);

double imbalance(const mesh::Assignment& assignment, std::span<const double> element_weights,
                 int parts);

struct RebalanceOptions {
  int level = 0;
  partition::Method method = partition::Method::rcb;
  /// Groups already at or below this imbalance are left alone.
  double tolerance = 1.02;
};

struct RebalanceOutcome {
  mesh::MeshChunk chunk;
  /// True when this rank's group moved any element.
  bool changed = false;
  /// Largest imbalance over all groups, before and after.
  double group_imbalance_before = 1.0;
  double group_imbalance_after = 1.0;
};

/**
 * Collective over every rank. Rebalancing at `level` re-partitions each
 * level-(`level`-1) group (the whole machine for level 0) among its leaves:
 * element summaries are aggregated to the group leader, re-partitioned with
 * the element weights, and the new destinations cascaded back before the
 * elements migrate inside the group. A group whose leaf totals are within
 * tolerance skips all of this; one whose new layout would not lower its
 * imbalance keeps the old one.
 *
 * Traffic phase: "rebalance/level<l>".
 */
RebalanceOutcome rebalance(simrt::Communicator& world, const mesh::MeshChunk& local,
                           const RebalanceOptions& options);

}  // namespace treepart::balance
