#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "branch_search.hpp"
#include "dtsat/counter.hpp"

namespace dtsat {

namespace {

std::uint64_t state_mask(const Level& g) {
  std::uint64_t m = 0;
  for (const auto& c : g) m |= std::uint64_t{1} << ((c.state * 2 + (c.root ? 1 : 0)) % 64);
  return m;
}

std::uint64_t max_sum(const Level& g) {
  std::uint64_t s = 0;
  for (const auto& c : g) s = std::max(s, c.val.sum());
  return s;
}

struct MoveRecord {
  Config from;
  std::optional<Letter> letter;
  std::vector<Config> results;
};

struct SearchNode {
  Level level;
  std::uint64_t mask = 0;
  std::size_t parent = 0;
  std::vector<MoveRecord> moves;
};

// Successors of one level together with the moves producing them.
std::vector<std::pair<Level, std::vector<MoveRecord>>> expand(const Machine& m, const Level& g, SearchPolicy policy) {
  std::vector<std::pair<Level, std::vector<MoveRecord>>> out;
  if (policy == SearchPolicy::Focused) {
    std::size_t pick = g.size();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!removable(m, g[i])) {
        pick = i;
        break;
      }
    if (pick == g.size()) {
      out.push_back({{}, {}});
      return out;
    }
    const Config& c = g[pick];
    for (auto& mv : config_moves(m, c)) {
      std::vector<Config> next;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (i != pick && !removable(m, g[i])) next.push_back(g[i]);
      for (const auto& r : mv.results)
        if (!removable(m, r)) next.push_back(r);
      out.push_back({make_level(std::move(next)), {MoveRecord{c, mv.transition->letter, std::move(mv.results)}}});
    }
    return out;
  }
  std::vector<std::pair<const Config*, std::vector<Move>>> options;
  for (const auto& c : g) {
    if (removable(m, c)) continue;
    options.push_back({&c, config_moves(m, c)});
    if (options.back().second.empty()) return out;
  }
  std::vector<MoveRecord> acc;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == options.size()) {
      std::vector<Config> next;
      for (const auto& r : acc) next.insert(next.end(), r.results.begin(), r.results.end());
      out.push_back({make_level(std::move(next)), acc});
      return;
    }
    for (const auto& mv : options[i].second) {
      acc.push_back({*options[i].first, mv.transition->letter, mv.results});
      go(i + 1);
      acc.pop_back();
    }
  };
  go(0);
  return out;
}

DataTree reconstruct(const Machine& m, const std::vector<SearchNode>& nodes, std::size_t last) {
  std::vector<std::size_t> path;
  for (std::size_t i = last; i != 0; i = nodes[i].parent) path.push_back(i);
  std::reverse(path.begin(), path.end());
  DataTree t(m.alphabet());
  std::map<Config, std::vector<int>> pending{{nodes[0].level[0], {0}}};
  for (std::size_t i : path) {
    const Level& next = nodes[i].level;
    auto in_next = [&](const Config& c) { return std::binary_search(next.begin(), next.end(), c); };
    std::map<Config, std::vector<int>> upd;
    for (auto& [cfg, slots] : pending) {
      const MoveRecord* mv = nullptr;
      for (const auto& r : nodes[i].moves)
        if (r.from == cfg) mv = &r;
      if (!mv) {
        if (in_next(cfg)) {
          auto& dst = upd[cfg];
          dst.insert(dst.end(), slots.begin(), slots.end());
        }
        continue;
      }
      for (int s : slots) {
        if (!mv->letter) {
          if (in_next(mv->results[0])) upd[mv->results[0]].push_back(s);
          continue;
        }
        t.expand(s, *mv->letter, 0);
        for (int d = 0; d < 2; ++d) {
          int child = t.node(s).child[d];
          if (in_next(mv->results[static_cast<std::size_t>(d)])) upd[mv->results[static_cast<std::size_t>(d)]].push_back(child);
        }
      }
    }
    pending = std::move(upd);
  }
  return t;
}

}  // namespace

FiniteOutcome nonempty_finite(const Machine& m, const FiniteOptions& opts) {
  FiniteOutcome out;
  if (opts.policy == SearchPolicy::Branchwise) {
    BranchSearch search(m, [&](const Config& c) { return removable(m, c); }, nullptr, opts.budget);
    const Config init{m.initial(), {}, true};
    try {
      if (search.solve(init)) {
        out.verdict = Verdict::Sat;
        out.witness = search.witness(init);
      } else {
        out.verdict = search.truncated() ? Verdict::Budget : Verdict::Unsat;
      }
    } catch (const BudgetExceeded&) {
      out.verdict = Verdict::Budget;
    }
    out.stats.levels = out.stats.retained = search.expanded();
    out.stats.max_valuation_sum = search.max_valuation_sum();
    return out;
  }
  std::vector<SearchNode> nodes;
  nodes.push_back({make_level({Config{m.initial(), {}, true}}), 0, 0, {}});
  nodes[0].mask = state_mask(nodes[0].level);
  std::set<Level> seen{nodes[0].level};
  std::deque<std::size_t> queue{0};
  bool truncated = false;
  const bool injective = opts.policy == SearchPolicy::Focused;
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    for (auto& [h, moves] : expand(m, nodes[cur].level, opts.policy)) {
      ++out.stats.levels;
      std::uint64_t s = max_sum(h);
      out.stats.max_valuation_sum = std::max(out.stats.max_valuation_sum, s);
      if (s > opts.budget.max_valuation_sum) {
        truncated = true;
        continue;
      }
      if (h.empty()) {
        nodes.push_back({std::move(h), 0, cur, std::move(moves)});
        out.verdict = Verdict::Sat;
        out.witness = reconstruct(m, nodes, nodes.size() - 1);
        out.stats.retained = nodes.size() - 1;
        return out;
      }
      std::uint64_t mask = state_mask(h);
      bool covered = false;
      if (opts.prune) {
        for (const auto& g : nodes) {
          if ((g.mask & ~mask) != 0) continue;
          if (injective ? level_embeds(g.level, h) : level_leq(g.level, h)) {
            covered = true;
            break;
          }
        }
      } else {
        covered = !seen.insert(h).second;
      }
      if (covered) continue;
      if (nodes.size() >= opts.budget.max_levels) {
        out.verdict = Verdict::Budget;
        out.stats.retained = nodes.size();
        return out;
      }
      nodes.push_back({std::move(h), mask, cur, std::move(moves)});
      queue.push_back(nodes.size() - 1);
    }
  }
  out.stats.retained = nodes.size();
  out.verdict = truncated ? Verdict::Budget : Verdict::Unsat;
  return out;
}

std::vector<Level> reach_basis(const Machine& m, const Budget& budget) {
  std::vector<Level> retained{make_level({Config{m.initial(), {}, true}})};
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    Level g = retained[queue.front()];
    queue.pop_front();
    for (auto& h : level_successors(m, g)) {
      if (max_sum(h) > budget.max_valuation_sum) throw BudgetExceeded("valuation sum cap reached in reach_basis");
      bool covered = false;
      for (const auto& r : retained)
        if (level_leq(r, h)) {
          covered = true;
          break;
        }
      if (covered) continue;
      if (retained.size() >= budget.max_levels) throw BudgetExceeded("level cap reached in reach_basis");
      retained.push_back(std::move(h));
      queue.push_back(retained.size() - 1);
    }
  }
  std::vector<Level> basis;
  for (std::size_t i = 0; i < retained.size(); ++i) {
    bool minimal = true;
    for (std::size_t j = 0; j < retained.size() && minimal; ++j)
      if (j != i && level_leq(retained[j], retained[i]) && (!level_leq(retained[i], retained[j]) || j < i)) minimal = false;
    if (minimal) basis.push_back(retained[i]);
  }
  return basis;
}

namespace {

struct Acceptor {
  const Machine& m;
  const DataTree& t;
  std::size_t bound;
  std::map<std::pair<int, Config>, bool> memo;

  bool accepts(int n, const Config& start) {
    auto key = std::make_pair(n, start);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    memo[key] = false;
    bool ok = run_block(n, start);
    memo[key] = ok;
    return ok;
  }

  bool run_block(int n, const Config& start) {
    const auto& node = t.node(n);
    std::vector<std::pair<Config, std::size_t>> seen{{start, 1}};
    for (std::size_t i = 0; i < seen.size(); ++i) {
      Config x = seen[i].first;
      std::size_t len = seen[i].second;
      if (node.is_leaf()) {
        if (n != 0 && m.is_final(x.state)) return true;
      } else {
        for (const auto& tr : m.transitions(x.state)) {
          if (!tr.letter || *tr.letter != node.letter) continue;
          auto ws = lazy_step(x.val, tr.instr);
          bool left = false, right = false;
          for (const auto& w : ws)
            if ((left = accepts(node.child[0], Config{tr.to0, w, false}))) break;
          if (!left) continue;
          for (const auto& w : ws)
            if ((right = accepts(node.child[1], Config{tr.to1, w, false}))) break;
          if (right) return true;
        }
      }
      if (len >= bound) continue;
      for (const auto& tr : m.transitions(x.state)) {
        if (tr.letter) continue;
        for (auto& w : lazy_step(x.val, tr.instr)) {
          Config y{tr.to0, std::move(w), false};
          bool dominated = false;
          for (const auto& [z, zl] : seen)
            if (zl <= len + 1 && z.state == y.state && z.val.leq(y.val)) {
              dominated = true;
              break;
            }
          if (!dominated) seen.push_back({std::move(y), len + 1});
        }
      }
    }
    return false;
  }
};

}  // namespace

bool itca_accepts(const Machine& m, const DataTree& t, std::size_t block_bound) {
  if (block_bound == 0) return false;
  Acceptor acc{m, t, block_bound, {}};
  return acc.accepts(0, Config{m.initial(), {}, false});
}

}  // namespace dtsat
