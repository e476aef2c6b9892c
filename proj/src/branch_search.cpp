#include "branch_search.hpp"

#include <algorithm>
#include <limits>

namespace dtsat {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
}

BranchSearch::BranchSearch(const Machine& m, Goal goal, Prune doomed, const Budget& budget)
    : m_(m), goal_(std::move(goal)), doomed_(std::move(doomed)), budget_(budget) {}

bool BranchSearch::solve(const Config& c) { return visit(c, 0).good; }

BranchSearch::Result BranchSearch::visit(const Config& c, std::size_t depth) {
  if (goal_(c)) {
    plans_.try_emplace(c);
    return {true, kNone};
  }
  const Key key{c.state, c.root};
  auto& goods = good_[key];
  for (const auto& g : goods)
    if (c.val.leq(g.val)) {
      if (!(g == c)) alias_.try_emplace(c, g);
      return {true, kNone};
    }
  for (const auto& b : bad_[key])
    if (b.leq(c.val)) return {false, kNone};
  if (doomed_ && doomed_(c)) return {false, kNone};
  auto& path = path_[key];
  for (const auto& [v, d] : path)
    if (v->leq(c.val)) return {false, d};
  const std::uint64_t sum = c.val.sum();
  max_sum_ = std::max(max_sum_, sum);
  if (sum > budget_.max_valuation_sum) {
    truncated_ = true;
    return {false, 0};
  }
  if (++expanded_ > budget_.max_levels) throw BudgetExceeded("expansion cap reached");

  path.push_back({&c.val, depth});
  std::size_t low = kNone;
  for (auto& mv : config_moves(m_, c)) {
    bool all = true;
    for (const auto& r : mv.results) {
      Result res = visit(r, depth + 1);
      low = std::min(low, res.low);
      if (!res.good) {
        all = false;
        break;
      }
    }
    if (all) {
      path_[key].pop_back();
      auto& gs = good_[key];
      std::erase_if(gs, [&](const Config& g) { return g.val.leq(c.val); });
      gs.push_back(c);
      plans_[c] = Plan{mv.transition, std::move(mv.results)};
      return {true, kNone};
    }
  }
  path_[key].pop_back();
  if (low >= depth) {
    auto& bs = bad_[key];
    std::erase_if(bs, [&](const Valuation& b) { return c.val.leq(b); });
    bs.push_back(c.val);
    return {false, kNone};
  }
  return {false, low};
}

DataTree BranchSearch::witness(const Config& c) const {
  DataTree t(m_.alphabet());
  build(c, t, 0);
  return t;
}

void BranchSearch::build(const Config& c, DataTree& t, int node) const {
  Config cur = c;
  while (true) {
    if (auto a = alias_.find(cur); a != alias_.end()) {
      cur = a->second;
      continue;
    }
    const Plan& p = plans_.at(cur);
    if (!p.transition) return;
    if (!p.transition->letter) {
      cur = p.results[0];
      continue;
    }
    t.expand(node, *p.transition->letter, 0);
    int left = t.node(node).child[0], right = t.node(node).child[1];
    build(p.results[0], t, left);
    build(p.results[1], t, right);
    return;
  }
}

}  // namespace dtsat
