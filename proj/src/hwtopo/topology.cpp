#include "treepart/hwtopo/topology.hpp"

#include <limits>
#include <numeric>
#include <string>

namespace treepart::hwtopo {

namespace {

std::string describe(std::size_t index, const Level& level) {
  return "level " + std::to_string(index) + " ('" + level.name + "')";
}

}  // namespace

TopologyTree::TopologyTree(std::vector<Level> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) {
    throw TopologyError("topology: at least one level is required");
  }
  long long total = 1;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].name.empty()) {
      throw TopologyError("topology: " + describe(i, levels_[i]) + " has an empty name");
    }
    if (levels_[i].arity < 1) {
      throw TopologyError("topology: " + describe(i, levels_[i]) + " has arity " +
                          std::to_string(levels_[i].arity) + ", expected >= 1");
    }
    total *= levels_[i].arity;
    if (total > std::numeric_limits<int>::max()) {
      throw TopologyError("topology: rank count overflows at " + describe(i, levels_[i]));
    }
  }
  total_ranks_ = static_cast<int>(total);

  below_.assign(levels_.size(), 1);
  for (int l = depth() - 2; l >= 0; --l) {
    below_[l] = below_[l + 1] * levels_[l + 1].arity;
  }
}

void TopologyTree::check_level(int level) const {
  if (level < 0 || level >= depth()) {
    throw TopologyError("topology: level " + std::to_string(level) + " out of range [0, " +
                        std::to_string(depth()) + ")");
  }
}

void TopologyTree::check_rank(Rank rank) const {
  if (rank < 0 || rank >= total_ranks_) {
    throw TopologyError("topology: rank " + std::to_string(rank) + " out of range");
  }
}

int TopologyTree::group_count(int level) const {
  check_level(level);
  return total_ranks_ / below_[level];
}

int TopologyTree::group_size(int level) const {
  check_level(level);
  return below_[level];
}

int TopologyTree::group_of(Rank rank, int level) const {
  check_level(level);
  check_rank(rank);
  return rank / below_[level];
}

std::pair<Rank, Rank> TopologyTree::group_range(int level, int group) const {
  if (group < 0 || group >= group_count(level)) {
    throw TopologyError("topology: group " + std::to_string(group) + " out of range at level " +
                        std::to_string(level));
  }
  return {group * below_[level], (group + 1) * below_[level]};
}

TopologyTree build_topology(std::span<const Level> levels) {
  return TopologyTree(std::vector<Level>(levels.begin(), levels.end()));
}

LevelGroup level_groups(const TopologyTree& tree, int level) {
  LevelGroup result;
  result.level_index = level;
  const int count = tree.group_count(level);
  result.groups.reserve(count);
  for (int g = 0; g < count; ++g) {
    auto [first, last] = tree.group_range(level, g);
    std::vector<Rank> members(last - first);
    std::iota(members.begin(), members.end(), first);
    result.groups.push_back(std::move(members));
  }
  return result;
}

std::vector<Rank> group_members(const TopologyTree& tree, int level, Rank rank) {
  auto [first, last] = tree.group_range(level, tree.group_of(rank, level));
  std::vector<Rank> members(last - first);
  std::iota(members.begin(), members.end(), first);
  return members;
}

}  // namespace treepart::hwtopo
