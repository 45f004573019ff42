#pragma once

#include <span>
#include <string>
#include <vector>

#include "treepart/error.hpp"

namespace treepart::hwtopo {

using Rank = int;

struct Level {
  std::string name;
  int arity = 1;

  bool operator==(const Level&) const = default;
};

class TopologyError : public InputError {
 public:
  using InputError::InputError;
};

/**
 * Uniform machine hierarchy, outermost level first (e.g. node, socket, core).
 *
 * Leaves are numbered depth-first, so the ranks under any subtree form a
 * contiguous range. Level 0 groups are the shared-memory nodes: two ranks are
 * intranode iff they share their level-0 ancestor.
 */
class TopologyTree {
 public:
  explicit TopologyTree(std::vector<Level> levels);

  const std::vector<Level>& levels() const { return levels_; }
  int depth() const { return static_cast<int>(levels_.size()); }
  int total_ranks() const { return total_ranks_; }

  /// Number of subtrees rooted at `level` (product of arities 0..level).
  int group_count(int level) const;
  /// Leaves under one subtree rooted at `level` (product of arities below it).
  int group_size(int level) const;
  /// Index of the level-`level` subtree containing `rank`.
  int group_of(Rank rank, int level) const;
  /// First and one-past-last rank of group `group` at `level`.
  std::pair<Rank, Rank> group_range(int level, int group) const;

  int node_of(Rank rank) const { return group_of(rank, 0); }
  bool same_node(Rank a, Rank b) const { return node_of(a) == node_of(b); }

  bool operator==(const TopologyTree& other) const { return levels_ == other.levels_; }

 private:
  void check_level(int level) const;
  void check_rank(Rank rank) const;

  std::vector<Level> levels_;
  std::vector<int> below_;  // below_[l] = leaves per level-l subtree
  int total_ranks_ = 1;
};

/// Validates a level list and builds the tree; diagnostics name the offending level.
TopologyTree build_topology(std::span<const Level> levels);

struct LevelGroup {
  int level_index = 0;
  std::vector<std::vector<Rank>> groups;

  Rank leader(std::size_t group) const { return groups.at(group).front(); }
};

LevelGroup level_groups(const TopologyTree& tree, int level);

/// Members of the level-`level` group containing `rank`, ascending.
std::vector<Rank> group_members(const TopologyTree& tree, int level, Rank rank);

}  // namespace treepart::hwtopo
