#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "treepart/mesh/dual_graph.hpp"
#include "treepart/mesh/generate.hpp"
#include "treepart/partition/distributed.hpp"
#include "treepart/partition/hierarchical.hpp"

using namespace treepart;
using partition::Method;
using partition::WeightedPoint;

namespace {

std::vector<WeightedPoint> line(std::vector<double> weights) {
  std::vector<WeightedPoint> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back({static_cast<mesh::ElementId>(i), {static_cast<double>(i), 0, 0}, weights[i]});
  }
  return out;
}

std::vector<WeightedPoint> cloud(std::mt19937& rng, std::size_t n, bool integer_weights) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {static_cast<mesh::ElementId>(i), {u(rng), u(rng) * 2.0, u(rng) * 0.5},
              integer_weights ? static_cast<double>(1 + rng() % 4) : 1.0};
  }
  return out;
}

std::vector<std::size_t> sizes(const std::vector<int>& part, int parts) {
  std::vector<std::size_t> out(parts, 0);
  for (int p : part) ++out.at(p);
  return out;
}

struct Layout {
  std::vector<mesh::MeshChunk> chunks;
  simrt::TrafficLedger ledger;
  mesh::Assignment assignment;
};

Layout run_hierarchical(const mesh::Mesh& m, const hwtopo::TopologyTree& tree,
                        const partition::HierarchicalPlan& plan, std::uint64_t seed = 0) {
  const int p = tree.total_ranks();
  Layout out{std::vector<mesh::MeshChunk>(p), simrt::TrafficLedger(tree), {}};
  out.ledger = oracle::run(tree, seed, [&](simrt::Communicator& c) {
    out.chunks[c.rank()] =
        partition::hierarchical_partition(c, mesh::block_chunk(m, p, c.rank()), plan);
  });
  out.assignment = mesh::Assignment(m.elements.size());
  for (int r = 0; r < p; ++r) {
    for (const auto& e : out.chunks[r].elements) out.assignment.set(e.id, r);
  }
  return out;
}

}  // namespace

TEST(Rcb, SplitsLineInHalves) {
  EXPECT_EQ(partition::rcb(line({1, 1, 1, 1}), 2), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(partition::rcb(line({1, 1, 1, 1}), 4), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Rcb, HeavyTailGetsItsOwnPart) {
  EXPECT_EQ(partition::rcb(line({1, 1, 1, 3}), 2), (std::vector<int>{0, 0, 0, 1}));
}

TEST(Rcb, OddPartCountUsesProportionalTarget) {
  EXPECT_EQ(partition::rcb(line({1, 1, 1, 1, 1, 1}), 3), (std::vector<int>{0, 0, 1, 1, 2, 2}));
}

TEST(Rcb, CutsAlongLongestAxis) {
  std::vector<WeightedPoint> pts{{0, {0, 0, 0}, 1}, {1, {0, 5, 0}, 1}, {2, {1, 0, 0}, 1}, {3, {1, 5, 0}, 1}};
  EXPECT_EQ(partition::rcb(pts, 2), (std::vector<int>{0, 1, 0, 1}));
}

TEST(Rcb, SizesWithinOneForPowersOfTwo) {
  std::mt19937 rng(1);
  for (std::size_t n : {17u, 100u, 333u}) {
    for (int k : {2, 4, 8, 16}) {
      auto s = sizes(partition::rcb(cloud(rng, n, false), k), k);
      auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      EXPECT_LE(*hi - *lo, 1u) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Rcb, EveryPartNonEmpty) {
  std::mt19937 rng(2);
  auto pts = cloud(rng, 7, true);
  auto s = sizes(partition::rcb(pts, 7), 7);
  EXPECT_TRUE(std::all_of(s.begin(), s.end(), [](std::size_t x) { return x == 1; }));
  EXPECT_THROW(partition::rcb(pts, 8), InputError);
}

TEST(Rcb, IndependentOfInputOrder) {
  std::mt19937 rng(3);
  auto pts = cloud(rng, 60, true);
  auto base = partition::rcb(pts, 5);
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<WeightedPoint> shuffled;
  for (auto i : order) shuffled.push_back(pts[i]);
  auto got = partition::rcb(shuffled, 5);
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(got[i], base[order[i]]);
}

TEST(DistributedRcb, EqualsSequential) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const int ranks = 1 + trial % 5;
    const int parts = 1 + static_cast<int>(rng() % 9);
    auto pts = cloud(rng, 40 + rng() % 60, true);
    const auto expected = partition::rcb(pts, parts);
    std::vector<int> got(pts.size(), -1);
    oracle::run(oracle::flat(ranks), static_cast<std::uint64_t>(trial), [&](simrt::Communicator& c) {
      std::vector<WeightedPoint> mine;
      std::vector<std::size_t> index;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (static_cast<int>((i * 7) % ranks) == c.rank()) {
          mine.push_back(pts[i]);
          index.push_back(i);
        }
      }
      auto part = partition::distributed_rcb(c, mine, parts);
      for (std::size_t i = 0; i < index.size(); ++i) got[index[i]] = part[i];
    });
    EXPECT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(GraphPartition, PathBisection) {
  auto g = mesh::grid_graph(1, 4);
  auto part = partition::graph_partition(g, 2);
  EXPECT_EQ(mesh::edge_cut(g, part), 1);
  EXPECT_EQ(sizes(part, 2), (std::vector<std::size_t>{2, 2}));
}

TEST(GraphPartition, GridBisectionIsOptimal) {
  auto g = mesh::grid_graph(4, 4);
  auto part = partition::graph_partition(g, 2);
  EXPECT_EQ(mesh::edge_cut(g, part), 4);
  EXPECT_EQ(oracle::brute_force_bisection(g, 0), 4);
  EXPECT_EQ(sizes(part, 2), (std::vector<std::size_t>{8, 8}));
}

TEST(GraphPartition, AsManyPartsAsVertices) {
  auto g = mesh::grid_graph(3, 3);
  auto s = sizes(partition::graph_partition(g, 9), 9);
  EXPECT_TRUE(std::all_of(s.begin(), s.end(), [](std::size_t x) { return x == 1; }));
  EXPECT_THROW(partition::graph_partition(g, 10), InputError);
}

TEST(GraphPartition, RefinementNeverRaisesCut) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = mesh::grid_graph(5 + trial % 4, 6);
    const int parts = 2 + trial % 4;
    std::vector<int> part(g.vertex_count());
    for (std::size_t v = 0; v < part.size(); ++v) part[v] = static_cast<int>(v % parts);
    const auto before = oracle::cut_of(g, part);
    const int moves = partition::refine_boundary(g, part, parts, 1.5);
    EXPECT_LE(oracle::cut_of(g, part), before);
    if (moves > 0) EXPECT_LT(oracle::cut_of(g, part), before);
    auto s = sizes(part, parts);
    EXPECT_TRUE(std::all_of(s.begin(), s.end(), [](std::size_t x) { return x >= 1; }));
  }
}

TEST(GraphPartition, TriangleGridWithinTolerance) {
  auto m = mesh::triangle_grid(16, 16);
  for (int k : {2, 4, 8}) {
    partition::PartitionRequest r{k, Method::graph, 1.05};
    auto part = partition::partition_chunk(m, r);
    auto s = sizes(part, k);
    const double mean = static_cast<double>(m.elements.size()) / k;
    EXPECT_LE(static_cast<double>(*std::max_element(s.begin(), s.end())), 1.05 * mean + 1e-9) << k;
  }
}

TEST(PartitionDistributed, GraphMethodMatchesSequential) {
  auto m = mesh::triangle_grid(6, 5);
  partition::PartitionRequest r{3, Method::graph, 1.05};
  const auto expected = partition::partition_chunk(m, r);
  std::vector<int> got(m.elements.size(), -1);
  oracle::run(oracle::flat(4), 0, [&](simrt::Communicator& c) {
    auto chunk = mesh::block_chunk(m, 4, c.rank());
    auto part = partition::partition_distributed(c, chunk, r);
    for (std::size_t i = 0; i < part.size(); ++i) got[chunk.elements[i].id] = part[i];
  });
  EXPECT_EQ(got, expected);
}

TEST(Hierarchical, EightyElementsOnEightLeaves) {
  auto m = mesh::triangle_grid(8, 5);
  for (auto approach : {partition::Approach::cascade_then_distributed,
                        partition::Approach::partition_then_cascade}) {
    partition::HierarchicalPlan plan;
    plan.approach = approach;
    auto out = run_hierarchical(m, oracle::tree({2, 2, 2}), plan);
    for (const auto& c : out.chunks) EXPECT_EQ(c.elements.size(), 10u);
    EXPECT_TRUE(out.assignment.total());
  }
}

TEST(Hierarchical, SingleLeafKeepsEverything) {
  auto m = mesh::triangle_grid(3, 2);
  auto out = run_hierarchical(m, oracle::tree({1}), {});
  EXPECT_EQ(out.chunks[0], m);
}

TEST(Hierarchical, LevelsBelowNodesStayOnNode) {
  auto m = mesh::tet_box(4, 4, 2);
  partition::HierarchicalPlan plan;
  plan.approach = partition::Approach::partition_then_cascade;
  auto out = run_hierarchical(m, oracle::tree({2, 2, 2}), plan, 9);
  simrt::TrafficFilter below;
  below.locality = simrt::Locality::internode;
  for (const auto& phase : {"partition/aggregate", "partition/level1", "partition/level2"}) {
    below.phase_prefix = phase;
    EXPECT_EQ(out.ledger.network(below).bytes, 0u) << phase;
  }
  simrt::TrafficFilter level1;
  level1.phase_prefix = "partition/level1";
  EXPECT_GT(out.ledger.total(level1).bytes, 0u);
}

TEST(Hierarchical, HeldElementsMatchAssignmentAndCut) {
  auto m = mesh::triangle_grid(10, 6);
  partition::HierarchicalPlan plan;
  plan.method = Method::graph;
  plan.tolerance = 1.1;
  auto out = run_hierarchical(m, oracle::tree({2, 3}), plan, 4);
  auto g = mesh::to_local_graph(mesh::local_dual_graph(m));
  std::int64_t cut = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (auto w : g.neighbors(v)) {
      if (out.assignment[static_cast<mesh::ElementId>(v)] != out.assignment[w]) ++cut;
    }
  }
  EXPECT_EQ(mesh::edge_cut(g, out.assignment.parts()), cut / 2);
  for (int r = 0; r < 6; ++r) EXPECT_FALSE(out.chunks[r].elements.empty());
}

TEST(Hierarchical, DeterministicAcrossSchedules) {
  auto m = mesh::triangle_grid(7, 7);
  partition::HierarchicalPlan plan;
  plan.approach = partition::Approach::cascade_then_distributed;
  auto a = run_hierarchical(m, oracle::tree({2, 2}), plan, 1);
  auto b = run_hierarchical(m, oracle::tree({2, 2}), plan, 77);
  EXPECT_EQ(a.chunks, b.chunks);
}

TEST(Hierarchical, RejectsBadPlans) {
  auto tree = oracle::tree({2, 2});
  partition::HierarchicalPlan plan;
  plan.bpl = 2;
  EXPECT_THROW(partition::check(plan, tree), InputError);
  plan.bpl = 0;
  plan.level_methods = {Method::rcb};
  EXPECT_THROW(partition::check(plan, tree), InputError);
  plan.level_methods.clear();
  plan.tolerance = 0.9;
  EXPECT_THROW(partition::check(plan, tree), InputError);
}
