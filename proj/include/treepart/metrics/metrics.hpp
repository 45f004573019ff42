#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treepart/mesh/graph.hpp"
#include "treepart/mesh/mesh.hpp"
#include "treepart/shhalo/halo.hpp"
#include "treepart/simrt/ledger.hpp"

namespace treepart::metrics {

using simrt::Locality;

/// Relative price of one byte on each channel.
struct CostModel {
  double internode = 1.0;
  double intranode = 1.0 / 3.0;

  double cost(Locality channel) const {
    return channel == Locality::internode ? internode : intranode;
  }
  /// Throws InputError unless both costs are positive and intranode <= internode.
  void check() const;
};

std::int64_t edge_cut(const mesh::Graph& dual, const mesh::Assignment& assignment);

/// Per-partition weighted halo cost: sum over neighbours of sent bytes x channel cost.
std::vector<double> partition_comm_costs(std::span<const shhalo::HaloSchedule> schedules,
                                         const CostModel& model, int arity = 1);

/// max / mean of partition_comm_costs; 1.0 for no schedules or no traffic.
double comm_imbalance(std::span<const shhalo::HaloSchedule> schedules, const CostModel& model,
                      int arity = 1);

struct PairVolume {
  int from = 0;
  int to = 0;
  std::size_t nodes = 0;
  std::uint64_t bytes = 0;
  Locality locality = Locality::internode;

  bool operator==(const PairVolume&) const = default;
};

std::vector<PairVolume> pair_volumes(std::span<const shhalo::HaloSchedule> schedules,
                                     int arity = 1);

struct PhaseTraffic {
  std::string phase;
  std::uint64_t messages = 0;
  std::uint64_t internode_bytes = 0;
  std::uint64_t intranode_bytes = 0;
  std::uint64_t shared_copy_bytes = 0;

  bool operator==(const PhaseTraffic&) const = default;
};

/// Network and shared-copy totals per ledger phase, phases sorted by name.
std::vector<PhaseTraffic> phase_traffic(const simrt::TrafficLedger& ledger);

/// Hierarchy level a phase belongs to: "<verb>/level<l>" maps to l, the
/// bootstrap phases ("partition/aggregate", "partition/bpl") to `bpl`.
std::optional<int> phase_level(const std::string& phase, int bpl);

struct LevelCost {
  int level = 0;
  std::uint64_t bytes = 0;
  /// Cost-weighted network bytes scaled by 1e-9; a relative figure, not a time.
  double seconds_proxy = 0.0;

  bool operator==(const LevelCost&) const = default;
};

std::vector<LevelCost> level_costs(const simrt::TrafficLedger& ledger, const CostModel& model,
                                   int bpl);

/// Everything the report document carries besides the run configuration.
struct Report {
  int parts = 0;
  std::int64_t elements = 0;
  std::int64_t edge_cut = 0;
  double element_imbalance = 1.0;
  double weight_imbalance = 1.0;
  double comm_imbalance = 1.0;
  double delta_p1 = 0.0;
  double delta_p2 = 0.0;
  std::vector<PairVolume> pairs;
  std::vector<PhaseTraffic> traffic;
  std::vector<LevelCost> levels;
  std::uint64_t halo_predicted_internode_bytes = 0;
  std::uint64_t halo_ledger_internode_bytes = 0;

  bool operator==(const Report&) const = default;
};

/**
 * Partition-quality part of a report for a total assignment over `parts` leaves.
 * Traffic fields are left empty.
 */
Report quality_report(const mesh::Graph& dual, const mesh::Assignment& assignment, int parts,
                      std::span<const shhalo::HaloSchedule> schedules, const CostModel& model);

}  // namespace treepart::metrics
