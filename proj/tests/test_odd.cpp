#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "treepart/odd/directory.hpp"

using namespace treepart;
using odd::Key;

TEST(OwnerMap, Examples) {
  odd::OwnerMap m(10, 4);
  EXPECT_EQ(m.block(), 3u);
  EXPECT_EQ(m.owner(7), 2);
  EXPECT_EQ(m.owner(9), 3);
  EXPECT_EQ(m.interval(3), std::make_pair(Key{9}, Key{10}));
  odd::OwnerMap id(8, 8);
  for (Key k = 0; k < 8; ++k) EXPECT_EQ(id.owner(k), static_cast<int>(k));
  EXPECT_THROW(m.owner(10), InputError);
  EXPECT_THROW(m.owners_of_range(5, 4), InputError);
}

TEST(OwnerMap, IntervalsPartitionKeySpace) {
  for (Key k = 1; k <= 40; ++k) {
    for (int p = 1; p <= static_cast<int>(k); ++p) {
      odd::OwnerMap m(k, p);
      Key next = 0;
      for (int r = 0; r < p; ++r) {
        auto [lo, hi] = m.interval(r);
        if (lo == hi) continue;
        ASSERT_EQ(lo, next);
        for (Key x = lo; x < hi; ++x) ASSERT_EQ(m.owner(x), r);
        next = hi;
      }
      ASSERT_EQ(next, k);
    }
  }
}

TEST(Directory, PairLandsAtOwner) {
  std::vector<std::map<Key, std::vector<simrt::Bytes>>> shards(2);
  std::vector<odd::QueryResult> result;
  oracle::run(oracle::flat(2), 0, [&](simrt::Communicator& c) {
    std::vector<odd::Entry> mine;
    if (c.rank() == 0) mine.push_back({3, simrt::to_bytes("x")});
    auto d = odd::Directory::build(c, mine, 4);
    shards[c.rank()] = d.shard();
    std::vector<Key> keys{3, 1};
    auto r = d.query(keys);
    if (c.rank() == 0) result = r;
  });
  EXPECT_TRUE(shards[0].empty());
  ASSERT_EQ(shards[1].at(3).size(), 1u);
  ASSERT_EQ(result.size(), 2u);
  EXPECT_EQ(simrt::to_string(result[0].values.at(0)), "x");
  EXPECT_TRUE(result[1].values.empty());
}

TEST(Directory, DuplicatesOrderedBySourceRank) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::vector<simrt::Bytes> values;
    oracle::run(oracle::flat(3), seed, [&](simrt::Communicator& c) {
      std::vector<odd::Entry> mine{{0, simrt::to_bytes(std::to_string(c.rank()))}};
      auto d = odd::Directory::build(c, mine, 1);
      if (c.rank() == 0) values = d.shard().at(0);
    });
    ASSERT_EQ(values.size(), 3u);
    for (int r = 0; r < 3; ++r) EXPECT_EQ(simrt::to_string(values[r]), std::to_string(r));
  }
}

TEST(Directory, KeyOutOfRangeThrows) {
  EXPECT_THROW(oracle::run(oracle::flat(1), 0,
                           [](simrt::Communicator& c) {
                             std::vector<odd::Entry> bad{{5, {}}};
                             odd::Directory::build(c, bad, 5);
                           }),
               InputError);
}

TEST(Directory, MatchesSequentialMultimap) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 << (trial % 4);
    const Key k = 1 + rng() % 300;
    std::vector<std::vector<odd::Entry>> inserts(p);
    std::vector<std::vector<Key>> queries(p);
    std::map<Key, std::vector<simrt::Bytes>> oracle_map;
    for (int r = 0; r < p; ++r) {
      const auto n = rng() % 200;
      for (std::uint64_t i = 0; i < n; ++i) {
        simrt::Bytes v(rng() % 9);
        for (auto& b : v) b = static_cast<std::byte>(rng());
        inserts[r].push_back({rng() % k, v});
      }
      for (int q = 0; q < 30; ++q) queries[r].push_back(rng() % k);
    }
    for (int r = 0; r < p; ++r) {
      for (const auto& e : inserts[r]) oracle_map[e.key].push_back(e.value);
    }
    const Key lo = rng() % k;
    const Key hi = lo + rng() % (k - lo + 1);
    std::vector<std::vector<odd::QueryResult>> answers(p);
    std::vector<std::vector<odd::Entry>> ranges(p);
    oracle::run(oracle::flat(p), static_cast<std::uint64_t>(trial), [&](simrt::Communicator& c) {
      auto d = odd::Directory::build(c, inserts[c.rank()], k);
      answers[c.rank()] = d.query(queries[c.rank()]);
      ranges[c.rank()] = d.range_query(lo, hi);
    });
    std::vector<odd::Entry> expected_range;
    for (auto it = oracle_map.lower_bound(lo); it != oracle_map.end() && it->first < hi; ++it) {
      for (const auto& v : it->second) expected_range.push_back({it->first, v});
    }
    for (int r = 0; r < p; ++r) {
      ASSERT_EQ(answers[r].size(), queries[r].size());
      for (std::size_t i = 0; i < queries[r].size(); ++i) {
        auto it = oracle_map.find(queries[r][i]);
        const auto expected = it == oracle_map.end() ? std::vector<simrt::Bytes>{} : it->second;
        ASSERT_EQ(answers[r][i].key, queries[r][i]);
        ASSERT_EQ(answers[r][i].values, expected);
      }
      ASSERT_EQ(ranges[r], expected_range);
    }
  }
}

TEST(Directory, BuildMessagesBoundedByDestinations) {
  const int p = 4;
  std::vector<std::vector<odd::Entry>> inserts(p);
  std::vector<std::set<int>> destinations(p);
  odd::OwnerMap owners(100, p);
  std::mt19937 rng(8);
  for (int r = 0; r < p; ++r) {
    for (int i = 0; i < 25; ++i) {
      Key key = rng() % 100;
      inserts[r].push_back({key, {}});
      if (owners.owner(key) != r) destinations[r].insert(owners.owner(key));
    }
  }
  auto ledger = oracle::run(oracle::flat(p), 1, [&](simrt::Communicator& c) {
    simrt::PhaseScope phase(c, "build");
    odd::Directory::build(c, inserts[c.rank()], 100);
  });
  for (int r = 0; r < p; ++r) {
    simrt::TrafficFilter f;
    f.phase_prefix = "build";
    f.from = r;
    f.channel = simrt::Channel::message;
    EXPECT_EQ(ledger.total(f).count, destinations[r].size()) << "rank " << r;
  }
}

TEST(Directory, RangeContactsOnlyIntersectingOwners) {
  auto ledger = oracle::run(oracle::flat(10), 0, [](simrt::Communicator& c) {
    std::vector<odd::Entry> mine{{static_cast<Key>(c.rank() * 10 + 1), {}}};
    auto d = odd::Directory::build(c, mine, 100);
    simrt::PhaseScope phase(c, "range");
    auto got = d.range_query(c.rank() == 0 ? 20 : 0, c.rank() == 0 ? 35 : 0);
    if (c.rank() == 0) {
      ASSERT_EQ(got.size(), 2u);
      EXPECT_EQ(got[0].key, 21u);
      EXPECT_EQ(got[1].key, 31u);
    } else {
      EXPECT_TRUE(got.empty());
    }
  });
  std::set<int> contacted;
  for (const auto& r : ledger.records()) {
    if (r.phase == "range" && r.channel == simrt::Channel::message && r.from == 0) contacted.insert(r.to);
  }
  EXPECT_EQ(contacted, (std::set<int>{2, 3}));
}

TEST(Directory, EmptyRangeSendsNothing) {
  auto ledger = oracle::run(oracle::flat(3), 0, [](simrt::Communicator& c) {
    auto d = odd::Directory::build(c, {}, 30);
    simrt::PhaseScope phase(c, "range");
    EXPECT_TRUE(d.range_query(4, 4).empty());
  });
  simrt::TrafficFilter f;
  f.phase_prefix = "range";
  f.channel = simrt::Channel::message;
  EXPECT_EQ(ledger.total(f).count, 0u);
}

TEST(BlindExchange, DeliversSortedBySource) {
  oracle::run(oracle::flat(4), 3, [](simrt::Communicator& c) {
    std::map<int, simrt::Bytes> out;
    for (int j = 0; j < 4; ++j) out[j] = simrt::ByteWriter().put(c.rank()).take();
    auto got = odd::blind_exchange(c, out, 99);
    ASSERT_EQ(got.size(), 4u);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(got[j].source, j);
  });
}
