#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "treepart/balance/balance.hpp"
#include "treepart/mesh/generate.hpp"
#include "treepart/partition/hierarchical.hpp"

using namespace treepart;
using balance::BlockTiming;

namespace {

struct Run {
  std::vector<mesh::MeshChunk> before;
  std::vector<balance::RebalanceOutcome> after;
  simrt::TrafficLedger ledger;
};

/// Partitions `m` over the tree, scales the weights held by `heavy` ranks, then rebalances.
Run rebalance_after_partition(const mesh::Mesh& m, const hwtopo::TopologyTree& tree,
                              std::vector<int> heavy, double factor,
                              const balance::RebalanceOptions& options, std::uint64_t seed = 0) {
  const int p = tree.total_ranks();
  Run out{std::vector<mesh::MeshChunk>(p), std::vector<balance::RebalanceOutcome>(p),
          simrt::TrafficLedger(tree)};
  out.ledger = oracle::run(tree, seed, [&](simrt::Communicator& c) {
    auto chunk = partition::hierarchical_partition(c, mesh::block_chunk(m, p, c.rank()), {});
    if (std::find(heavy.begin(), heavy.end(), c.rank()) != heavy.end()) {
      for (auto& e : chunk.elements) e.weight *= factor;
    }
    out.before[c.rank()] = chunk;
    out.after[c.rank()] = balance::rebalance(c, chunk, options);
  });
  return out;
}

double weight_of(const mesh::MeshChunk& c) {
  double w = 0;
  for (const auto& e : c.elements) w += e.weight;
  return w;
}

double group_imbalance(const std::vector<double>& w, int first, int size) {
  std::vector<double> g(w.begin() + first, w.begin() + first + size);
  return balance::imbalance(g);
}

}  // namespace

TEST(DeriveWeights, SingleBlock) {
  std::vector<BlockTiming> t{{{0, 1, 2, 3}, 8.0}};
  std::vector<mesh::ElementId> local{0, 1, 2, 3};
  auto w = balance::derive_weights(t, local);
  for (auto id : local) EXPECT_DOUBLE_EQ(w.at(id), 2.0);
}

TEST(DeriveWeights, TwoBlocks) {
  std::vector<BlockTiming> t{{{0, 1}, 2.0}, {{2, 3}, 6.0}};
  std::vector<mesh::ElementId> local{0, 1, 2, 3};
  auto w = balance::derive_weights(t, local);
  EXPECT_EQ(w, (balance::ElementWeights{{0, 1.0}, {1, 1.0}, {2, 3.0}, {3, 3.0}}));
}

TEST(DeriveWeights, ZeroTimeIsFloored) {
  std::vector<BlockTiming> t{{{5, 6}, 0.0}};
  std::vector<mesh::ElementId> local{5, 6};
  auto w = balance::derive_weights(t, local);
  EXPECT_DOUBLE_EQ(w.at(5), balance::kWeightFloor);
  EXPECT_GT(w.at(6), 0.0);
}

TEST(DeriveWeights, UncoveredElementThrows) {
  std::vector<BlockTiming> t{{{0}, 1.0}};
  std::vector<mesh::ElementId> local{0, 1};
  EXPECT_THROW(balance::derive_weights(t, local), InputError);
}

TEST(ApplyWeights, MissingWeightThrows) {
  auto m = mesh::triangle_grid(1, 1);
  EXPECT_THROW(balance::apply_weights(m, {{0, 2.0}}), InputError);
  balance::apply_weights(m, {{0, 2.0}, {1, 5.0}});
  EXPECT_DOUBLE_EQ(m.elements[1].weight, 5.0);
}

TEST(Imbalance, Examples) {
  std::vector<double> equal{2, 2, 2};
  EXPECT_DOUBLE_EQ(balance::imbalance(equal), 1.0);
  std::vector<double> skew{3, 1};
  EXPECT_DOUBLE_EQ(balance::imbalance(skew), 1.5);
  EXPECT_THROW(balance::imbalance(std::span<const double>{}), InputError);
}

TEST(Imbalance, MatchesDirectTally) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int parts = 1 + static_cast<int>(rng() % 6);
    const std::size_t n = parts + rng() % 40;
    std::vector<int> part(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      part[i] = i < static_cast<std::size_t>(parts) ? static_cast<int>(i) : static_cast<int>(rng() % parts);
      w[i] = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    }
    std::vector<double> tally(parts, 0.0);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tally[part[i]] += w[i];
      total += w[i];
    }
    const double expected = *std::max_element(tally.begin(), tally.end()) / (total / parts);
    EXPECT_NEAR(balance::imbalance(mesh::Assignment(part), w, parts), expected, 1e-12);
  }
}

TEST(Rebalance, HeavyElementSplitsOff) {
  auto m = mesh::triangle_grid(2, 1);
  for (auto& e : m.elements) e.weight = e.id == 2 ? 3.0 : 1.0;
  std::vector<balance::RebalanceOutcome> out(2);
  oracle::run(oracle::tree({2}), 0, [&](simrt::Communicator& c) {
    auto chunk = c.rank() == 0 ? m : m.empty_like();
    out[c.rank()] = balance::rebalance(c, chunk, {0, partition::Method::rcb, 1.02});
  });
  const double best = oracle::brute_force_max_side({1, 1, 3, 1});
  EXPECT_DOUBLE_EQ(best, 3.0);
  EXPECT_DOUBLE_EQ(std::max(weight_of(out[0].chunk), weight_of(out[1].chunk)), best);
  EXPECT_TRUE(out[0].changed);
  EXPECT_DOUBLE_EQ(out[0].group_imbalance_before, 2.0);
  EXPECT_DOUBLE_EQ(out[0].group_imbalance_after, 1.0);
}

TEST(Rebalance, BalancedLayoutIsFixedPoint) {
  auto m = mesh::triangle_grid(8, 4);
  auto run = rebalance_after_partition(m, oracle::tree({2, 2}), {}, 1.0, {1, partition::Method::rcb, 1.02});
  for (std::size_t r = 0; r < run.after.size(); ++r) {
    EXPECT_FALSE(run.after[r].changed);
    EXPECT_EQ(run.after[r].chunk, run.before[r]);
  }
  simrt::TrafficFilter f;
  f.phase_prefix = "rebalance/level";
  EXPECT_EQ(run.ledger.total(f).count > 0, true);
}

TEST(Rebalance, SkewedLeafWithinGroup) {
  auto m = mesh::triangle_grid(16, 8);
  auto run = rebalance_after_partition(m, oracle::tree({2, 2}), {0}, 4.0, {1, partition::Method::rcb, 1.02});
  std::vector<double> pre, post;
  for (std::size_t r = 0; r < run.after.size(); ++r) {
    pre.push_back(weight_of(run.before[r]));
    post.push_back(weight_of(run.after[r].chunk));
  }
  EXPECT_GE(group_imbalance(pre, 0, 2), 1.5);
  EXPECT_LE(group_imbalance(post, 0, 2), 1.1);
  EXPECT_NEAR(run.after[0].group_imbalance_after, std::max(group_imbalance(post, 0, 2), group_imbalance(post, 2, 2)), 1e-12);
  EXPECT_FALSE(run.after[2].changed);
  EXPECT_EQ(run.after[2].chunk, run.before[2]);
}

TEST(Rebalance, KeepsElementsInsideGroups) {
  auto m = mesh::tet_box(4, 3, 2);
  const auto tree = oracle::tree({2, 2, 2});
  for (int level : {1, 2}) {
    auto run = rebalance_after_partition(m, tree, {1, 6}, 3.0, {level, partition::Method::rcb, 1.02}, 5);
    std::map<mesh::ElementId, int> was, now;
    std::multiset<mesh::ElementId> before_ids, after_ids;
    for (int r = 0; r < 8; ++r) {
      for (const auto& e : run.before[r].elements) {
        was[e.id] = r;
        before_ids.insert(e.id);
      }
      for (const auto& e : run.after[r].chunk.elements) {
        now[e.id] = r;
        after_ids.insert(e.id);
      }
    }
    EXPECT_EQ(before_ids, after_ids);
    for (const auto& [id, r] : now) {
      EXPECT_EQ(tree.group_of(r, level - 1), tree.group_of(was.at(id), level - 1)) << "level " << level;
    }
    simrt::TrafficFilter f;
    f.phase_prefix = "rebalance/level" + std::to_string(level);
    f.locality = simrt::Locality::internode;
    EXPECT_EQ(run.ledger.network(f).bytes, 0u);
    f.locality.reset();
    EXPECT_GT(run.ledger.network(f).bytes, 0u);
  }
}

TEST(Rebalance, SingletonGroupsAreIdentity) {
  auto m = mesh::triangle_grid(6, 4);
  auto run = rebalance_after_partition(m, oracle::tree({2, 1}), {0}, 5.0, {1, partition::Method::rcb, 1.02});
  for (std::size_t r = 0; r < run.after.size(); ++r) {
    EXPECT_FALSE(run.after[r].changed);
    EXPECT_EQ(run.after[r].chunk, run.before[r]);
  }
}

TEST(Rebalance, NeverWorsens) {
  auto m = mesh::triangle_grid(9, 7);
  for (auto method : {partition::Method::rcb, partition::Method::graph}) {
    auto run = rebalance_after_partition(m, oracle::tree({4}), {2}, 1.3, {0, method, 1.0});
    EXPECT_LE(run.after[0].group_imbalance_after, run.after[0].group_imbalance_before + 1e-12);
  }
}

TEST(Rebalance, InvalidLevelThrows) {
  auto m = mesh::triangle_grid(2, 2);
  EXPECT_THROW(oracle::run(oracle::tree({2}), 0,
                           [&](simrt::Communicator& c) {
                             balance::rebalance(c, mesh::block_chunk(m, 2, c.rank()), {3, partition::Method::rcb, 1.02});
                           }),
               InputError);
}
