#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "treepart/simrt/runtime.hpp"

namespace treepart::odd {

using Key = std::uint64_t;
using simrt::Bytes;

/**
 * Assumed partitioning of [0, key_space) over `ranks` owners: contiguous blocks
 * of ceil(K/P) keys, the last owner absorbing the clamp. Any rank computes a
 * key's home without communication.
 */
class OwnerMap {
 public:
  OwnerMap(Key key_space, int ranks);

  Key key_space() const { return key_space_; }
  int ranks() const { return ranks_; }
  Key block() const { return block_; }

  int owner(Key key) const;
  /// Half-open key interval owned by `rank` (possibly empty).
  std::pair<Key, Key> interval(int rank) const;
  /// Owners whose intervals intersect [lo, hi), ascending.
  std::vector<int> owners_of_range(Key lo, Key hi) const;

 private:
  Key key_space_;
  int ranks_;
  Key block_;
};

struct Entry {
  Key key = 0;
  Bytes value;

  bool operator==(const Entry&) const = default;
};

struct QueryResult {
  Key key = 0;
  std::vector<Bytes> values;

  bool operator==(const QueryResult&) const = default;
};

/**
 * Blind exchange: every rank sends one buffer to each rank in `outgoing`
 * without the receivers knowing who will send. Receivers learn their message
 * count from Communicator::blind_count and drain it with any-source probes.
 * The self buffer is delivered locally. Result is sorted by source rank.
 */
std::vector<simrt::Message> blind_exchange(simrt::Communicator& comm,
                                           std::map<int, Bytes> outgoing, int tag);

/**
 * One-sided distributed dictionary (multi-map) living on one communicator.
 * Each rank stores the keys it owns under the assumed partitioning; values for
 * a key are kept in source-rank order, then insertion order. All operations
 * are collective over the communicator.
 */
class Directory {
 public:
  static Directory build(simrt::Communicator comm, std::span<const Entry> pairs, Key key_space);

  /// Values for each requested key, in request order (empty when absent).
  std::vector<QueryResult> query(std::span<const Key> keys);

  /// All (key, value) pairs with lo <= key < hi, sorted by key. Only owners of
  /// intersecting intervals are contacted; an empty range sends nothing.
  std::vector<Entry> range_query(Key lo, Key hi);

  const OwnerMap& owners() const { return owners_; }
  const std::map<Key, std::vector<Bytes>>& shard() const { return shard_; }
  simrt::Communicator& communicator() { return comm_; }

 private:
  Directory(simrt::Communicator comm, OwnerMap owners)
      : comm_(std::move(comm)), owners_(owners) {}

  void check_key(Key key, const char* op) const;

  simrt::Communicator comm_;
  OwnerMap owners_;
  std::map<Key, std::vector<Bytes>> shard_;
};

}  // namespace treepart::odd
