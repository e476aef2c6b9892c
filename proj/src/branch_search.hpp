#pragma once

#include <map>

#include "dtsat/counter.hpp"

namespace dtsat {

/// Depth-first search for a finite run tree from one configuration whose leaves
/// all satisfy `goal`. Branches of a run evolve independently, so every
/// configuration is solved on its own. A configuration above one of its
/// ancestors is cut; good configurations are memoized as a downward-closed
/// set, unconditionally bad ones as an upward-closed set.
class BranchSearch {
 public:
  using Goal = std::function<bool(const Config&)>;
  using Prune = std::function<bool(const Config&)>;

  BranchSearch(const Machine& m, Goal goal, Prune doomed, const Budget& budget);

  /// Throws BudgetExceeded when the expansion cap is reached.
  bool solve(const Config& c);
  /// Some branch was cut by the valuation cap.
  bool truncated() const { return truncated_; }
  std::size_t expanded() const { return expanded_; }
  std::uint64_t max_valuation_sum() const { return max_sum_; }
  /// Run tree shape below a good configuration.
  DataTree witness(const Config& c) const;

 private:
  struct Result {
    bool good;
    std::size_t low;
  };
  struct Plan {
    const Transition* transition = nullptr;  // null at leaves
    std::vector<Config> results;
  };
  using Key = std::pair<StateId, bool>;

  Result visit(const Config& c, std::size_t depth);
  void build(const Config& c, DataTree& t, int node) const;

  const Machine& m_;
  Goal goal_;
  Prune doomed_;
  Budget budget_;
  std::map<Key, std::vector<Config>> good_;
  std::map<Key, std::vector<Valuation>> bad_;
  std::map<Key, std::vector<std::pair<const Valuation*, std::size_t>>> path_;
  std::map<Config, Plan> plans_;
  std::map<Config, Config> alias_;
  std::size_t expanded_ = 0;
  std::uint64_t max_sum_ = 0;
  bool truncated_ = false;
};

}  // namespace dtsat
