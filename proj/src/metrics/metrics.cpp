#include "treepart/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include "treepart/balance/balance.hpp"

namespace treepart::metrics {

void CostModel::check() const {
  if (!(internode > 0.0) || !(intranode > 0.0)) {
    throw InputError("cost model: byte costs must be positive");
  }
  if (intranode > internode) {
    throw InputError("cost model: intranode cost exceeds internode cost");
  }
}

std::int64_t edge_cut(const mesh::Graph& dual, const mesh::Assignment& assignment) {
  if (assignment.size() != dual.vertex_count()) {
    throw InputError("edge cut: assignment covers " + std::to_string(assignment.size()) +
                     " of " + std::to_string(dual.vertex_count()) + " elements");
  }
  return mesh::edge_cut(dual, assignment.parts());
}

std::vector<double> partition_comm_costs(std::span<const shhalo::HaloSchedule> schedules,
                                         const CostModel& model, int arity) {
  std::vector<double> out;
  for (const auto& s : schedules) {
    double c = 0.0;
    for (const auto& nb : s.neighbors) {
      c += static_cast<double>(nb.send.size() * static_cast<std::size_t>(arity) *
                               shhalo::kValueWidth) *
           model.cost(nb.channel);
    }
    out.push_back(c);
  }
  return out;
}

double comm_imbalance(std::span<const shhalo::HaloSchedule> schedules, const CostModel& model,
                      int arity) {
  const auto costs = partition_comm_costs(schedules, model, arity);
  if (costs.empty()) return 1.0;
  const double total = std::accumulate(costs.begin(), costs.end(), 0.0);
  if (total <= 0.0) return 1.0;
  return *std::max_element(costs.begin(), costs.end()) / (total / static_cast<double>(costs.size()));
}

std::vector<PairVolume> pair_volumes(std::span<const shhalo::HaloSchedule> schedules, int arity) {
  std::vector<PairVolume> out;
  for (const auto& s : schedules) {
    for (const auto& nb : s.neighbors) {
      out.push_back({s.part, nb.neighbor, nb.send.size(),
                     nb.send.size() * static_cast<std::uint64_t>(arity) * shhalo::kValueWidth,
                     nb.channel});
    }
  }
  std::sort(out.begin(), out.end(), [](const PairVolume& a, const PairVolume& b) {
    return std::pair(a.from, a.to) < std::pair(b.from, b.to);
  });
  return out;
}

std::vector<PhaseTraffic> phase_traffic(const simrt::TrafficLedger& ledger) {
  std::map<std::string, PhaseTraffic> by_phase;
  for (const auto& r : ledger.records()) {
    auto& t = by_phase[r.phase];
    t.phase = r.phase;
    if (r.channel == simrt::Channel::shared_copy) {
      t.shared_copy_bytes += r.counter.bytes;
      continue;
    }
    t.messages += r.counter.count;
    (r.locality == Locality::internode ? t.internode_bytes : t.intranode_bytes) += r.counter.bytes;
  }
  std::vector<PhaseTraffic> out;
  for (auto& [name, t] : by_phase) out.push_back(std::move(t));
  return out;
}

std::optional<int> phase_level(const std::string& phase, int bpl) {
  if (phase == "partition/aggregate" || phase == "partition/bpl") return bpl;
  const auto at = phase.find("/level");
  if (at == std::string::npos) return std::nullopt;
  const char* first = phase.data() + at + 6;
  const char* last = phase.data() + phase.size();
  int level = 0;
  auto [ptr, ec] = std::from_chars(first, last, level);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return level;
}

std::vector<LevelCost> level_costs(const simrt::TrafficLedger& ledger, const CostModel& model,
                                   int bpl) {
  std::map<int, LevelCost> by_level;
  for (const auto& t : phase_traffic(ledger)) {
    const auto level = phase_level(t.phase, bpl);
    if (!level) continue;
    auto& c = by_level[*level];
    c.level = *level;
    c.bytes += t.internode_bytes + t.intranode_bytes;
    c.seconds_proxy += (static_cast<double>(t.internode_bytes) * model.internode +
                        static_cast<double>(t.intranode_bytes) * model.intranode) *
                       1e-9;
  }
  std::vector<LevelCost> out;
  for (auto& [level, c] : by_level) out.push_back(c);
  return out;
}

Report quality_report(const mesh::Graph& dual, const mesh::Assignment& assignment, int parts,
                      std::span<const shhalo::HaloSchedule> schedules, const CostModel& model) {
  Report r;
  r.parts = parts;
  r.elements = static_cast<std::int64_t>(dual.vertex_count());
  r.edge_cut = edge_cut(dual, assignment);
  std::vector<double> unit(assignment.size(), 1.0);
  std::vector<double> weight(assignment.size());
  for (std::size_t v = 0; v < weight.size(); ++v) weight[v] = dual.weight(v);
  if (assignment.size() > 0) {
    r.element_imbalance = balance::imbalance(assignment, unit, parts);
    r.weight_imbalance = balance::imbalance(assignment, weight, parts);
    r.delta_p1 = mesh::halo_growth(dual, assignment, 1);
    r.delta_p2 = mesh::halo_growth(dual, assignment, 2);
  }
  r.comm_imbalance = comm_imbalance(schedules, model);
  r.pairs = pair_volumes(schedules);
  return r;
}

}  // namespace treepart::metrics
