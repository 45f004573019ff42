#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "treepart/metrics/metrics.hpp"

using namespace treepart;
using metrics::CostModel;
using shhalo::HaloSchedule;
using simrt::Channel;
using simrt::Locality;

namespace {

HaloSchedule one_neighbor(int part, int neighbor, std::vector<mesh::NodeId> nodes, Locality channel) {
  HaloSchedule s;
  s.part = part;
  s.neighbors.push_back({neighbor, nodes, nodes, channel});
  return s;
}

}  // namespace

TEST(EdgeCut, Examples) {
  auto path = mesh::grid_graph(1, 4);
  EXPECT_EQ(metrics::edge_cut(path, mesh::Assignment(std::vector<int>{0, 0, 0, 0})), 0);
  EXPECT_EQ(metrics::edge_cut(path, mesh::Assignment(std::vector<int>{0, 0, 1, 1})), 1);
  EXPECT_THROW(metrics::edge_cut(path, mesh::Assignment(std::vector<int>{0, 0, 1})), InputError);
}

TEST(EdgeCut, MatchesPairCount) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    std::vector<std::vector<std::int64_t>> lists(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (rng() % 3 == 0) {
          lists[a].push_back(static_cast<std::int64_t>(b));
          lists[b].push_back(static_cast<std::int64_t>(a));
        }
      }
    }
    auto g = mesh::Graph::from_adjacency(lists);
    std::vector<int> part(n);
    for (auto& p : part) p = static_cast<int>(rng() % 3);
    EXPECT_EQ(metrics::edge_cut(g, mesh::Assignment(part)), oracle::cut_of(g, part));
  }
}

TEST(CommImbalance, SymmetricPairIsBalanced) {
  std::vector<HaloSchedule> s{one_neighbor(0, 1, {1, 2}, Locality::internode),
                              one_neighbor(1, 0, {1, 2}, Locality::internode)};
  EXPECT_DOUBLE_EQ(metrics::comm_imbalance(s, {}), 1.0);
}

TEST(CommImbalance, IntranodeDiscount) {
  std::vector<HaloSchedule> s{one_neighbor(0, 1, {5}, Locality::internode),
                              one_neighbor(1, 0, {5}, Locality::intranode)};
  const CostModel model{1.0, 1.0 / 3.0};
  auto costs = metrics::partition_comm_costs(s, model);
  EXPECT_DOUBLE_EQ(costs[0], 8.0);
  EXPECT_DOUBLE_EQ(costs[1], 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(metrics::comm_imbalance(s, model), 1.5);
}

TEST(CommImbalance, Degenerate) {
  EXPECT_DOUBLE_EQ(metrics::comm_imbalance({}, {}), 1.0);
  std::vector<HaloSchedule> single(1);
  EXPECT_DOUBLE_EQ(metrics::comm_imbalance(single, {}), 1.0);
}

TEST(CostModelCheck, RejectsInvertedCosts) {
  EXPECT_NO_THROW((CostModel{1.0, 0.5}.check()));
  EXPECT_THROW((CostModel{1.0, 2.0}.check()), InputError);
  EXPECT_THROW((CostModel{1.0, 0.0}.check()), InputError);
}

TEST(PairVolumes, BytesScaleWithArity) {
  std::vector<HaloSchedule> s{one_neighbor(0, 1, {1, 2, 3}, Locality::intranode),
                              one_neighbor(1, 0, {1, 2, 3}, Locality::intranode)};
  auto v = metrics::pair_volumes(s, 2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (metrics::PairVolume{0, 1, 3, 48, Locality::intranode}));
}

TEST(PhaseLevel, Names) {
  EXPECT_EQ(metrics::phase_level("partition/level2", 0), 2);
  EXPECT_EQ(metrics::phase_level("rebalance/level1", 0), 1);
  EXPECT_EQ(metrics::phase_level("partition/bpl", 1), 1);
  EXPECT_EQ(metrics::phase_level("partition/aggregate", 1), 1);
  EXPECT_FALSE(metrics::phase_level("halo", 0).has_value());
}

TEST(Traffic, TotalsPerPhaseAndLevel) {
  simrt::TrafficLedger ledger(oracle::tree({2, 2}));
  ledger.record("partition/bpl", 0, 2, Channel::message, 100);
  ledger.record("partition/level1", 0, 1, Channel::message, 30);
  ledger.record("partition/level1", 2, 3, Channel::message, 30);
  ledger.record("halo", 0, 1, Channel::shared_copy, 7);
  ledger.record("halo", 1, 3, Channel::message, 5);
  auto t = metrics::phase_traffic(ledger);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], (metrics::PhaseTraffic{"halo", 1, 5, 0, 7}));
  EXPECT_EQ(t[2], (metrics::PhaseTraffic{"partition/level1", 2, 0, 60, 0}));
  auto levels = metrics::level_costs(ledger, {1.0, 0.5}, 0);
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_EQ(levels[0].bytes, 100u);
  EXPECT_DOUBLE_EQ(levels[0].seconds_proxy, 100e-9);
  EXPECT_EQ(levels[1].bytes, 60u);
  EXPECT_DOUBLE_EQ(levels[1].seconds_proxy, 30e-9);
}

TEST(QualityReport, SinglePart) {
  auto g = mesh::grid_graph(3, 3);
  std::vector<HaloSchedule> s(1);
  auto r = metrics::quality_report(g, mesh::Assignment(std::vector<int>(9, 0)), 1, s, {});
  EXPECT_EQ(r.edge_cut, 0);
  EXPECT_DOUBLE_EQ(r.element_imbalance, 1.0);
  EXPECT_DOUBLE_EQ(r.delta_p1, 0.0);
  EXPECT_DOUBLE_EQ(r.delta_p2, 0.0);
  EXPECT_TRUE(r.pairs.empty());
}

TEST(QualityReport, RatiosAtLeastOne) {
  auto g = mesh::grid_graph(4, 4);
  std::vector<int> part(16);
  for (int v = 0; v < 16; ++v) part[v] = v < 10 ? 0 : 1;
  std::vector<HaloSchedule> s{one_neighbor(0, 1, {1}, Locality::internode),
                              one_neighbor(1, 0, {1}, Locality::internode)};
  auto r = metrics::quality_report(g, mesh::Assignment(part), 2, s, {});
  EXPECT_DOUBLE_EQ(r.element_imbalance, 10.0 / 8.0);
  EXPECT_DOUBLE_EQ(r.weight_imbalance, 10.0 / 8.0);
  EXPECT_EQ(r.edge_cut, oracle::cut_of(g, part));
  EXPECT_GE(r.comm_imbalance, 1.0);
  EXPECT_GT(r.delta_p1, 0.0);
  EXPECT_LE(r.delta_p1, r.delta_p2);
}
