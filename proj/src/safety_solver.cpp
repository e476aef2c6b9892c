#include <algorithm>
#include <deque>
#include <set>

#include "branch_search.hpp"
#include "dtsat/counter.hpp"

namespace dtsat {

namespace {

using Basis = std::vector<Valuation>;

bool covered(const Basis& b, const Valuation& v) {
  for (const auto& x : b)
    if (x.leq(v)) return true;
  return false;
}

Basis minimize(Basis b) {
  std::sort(b.begin(), b.end(), [](const Valuation& x, const Valuation& y) {
    return x.sum() != y.sum() ? x.sum() < y.sum() : x < y;
  });
  b.erase(std::unique(b.begin(), b.end()), b.end());
  Basis out;
  for (auto& v : b)
    if (!covered(out, v)) out.push_back(std::move(v));
  return out;
}

Basis intersect(const Basis& a, const Basis& b) {
  Basis out;
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x.lub(y));
  return minimize(std::move(out));
}

Basis unite(Basis a, const Basis& b) {
  a.insert(a.end(), b.begin(), b.end());
  return minimize(std::move(a));
}

void for_each_split(std::uint32_t n, const std::vector<Counter>& targets, std::size_t i, Valuation& acc,
                    const std::function<void(const Valuation&)>& f) {
  if (i + 1 == targets.size()) {
    acc.set(targets[i], n);
    f(acc);
    acc.set(targets[i], 0);
    return;
  }
  for (std::uint32_t k = 0; k <= n; ++k) {
    acc.set(targets[i], k);
    for_each_split(n - k, targets, i + 1, acc, f);
  }
  acc.set(targets[i], 0);
}

}  // namespace

/// Basis of {v : every lazy result of l from v lies in ↑b}.
Basis pre_forall(const Instruction& l, const Basis& b) {
  const Counter c = l.counter;
  Basis out;
  switch (l.op) {
    case Instruction::Op::Inc:
      for (const auto& x : b) {
        Valuation y = x;
        if (y.get(c) > 0) y.set(c, y.get(c) - 1);
        out.push_back(std::move(y));
      }
      break;
    case Instruction::Op::Dec:
      for (const auto& x : b) {
        Valuation y = x;
        if (y.get(c) > 0) y.add(c, 1);
        out.push_back(std::move(y));
      }
      break;
    case Instruction::Op::Ifz:
    case Instruction::Op::Transfer: {
      if (l.targets.empty()) {
        out.push_back(Valuation{{c, 1}});
        for (const auto& x : b)
          if (x.get(c) == 0) out.push_back(x);
        break;
      }
      std::uint32_t n0 = 0;
      for (Counter x : l.targets) {
        std::uint32_t mx = 0;
        for (const auto& y : b) mx = std::max(mx, y.get(x));
        n0 += mx;
      }
      for (std::uint32_t n = 0; n <= n0; ++n) {
        Basis inter{Valuation{}};
        Valuation acc;
        for_each_split(n, l.targets, 0, acc, [&](const Valuation& s) {
          if (inter.empty()) return;
          Basis shifted;
          for (const auto& y : b) {
            Valuation z = y.minus(s);
            if (z.get(c) == 0) shifted.push_back(std::move(z));
          }
          inter = intersect(inter, minimize(std::move(shifted)));
        });
        for (auto& x : inter) {
          x.set(c, n);
          out.push_back(std::move(x));
        }
      }
      break;
    }
  }
  return minimize(std::move(out));
}

DeadSets::DeadSets(const Machine& m, const Budget& budget) {
  auto node_of = [&](StateId q, bool root) {
    auto [it, fresh] = index_.try_emplace(key(q, root), nodes_.size());
    if (fresh) {
      nodes_.push_back({q, root, {}, {}});
      if (nodes_.size() > budget.max_levels) throw BudgetExceeded("control graph exceeds the level cap");
    }
    return it->second;
  };
  struct Edge {
    const Transition* t;
    std::size_t to0, to1;
  };
  std::vector<std::vector<Edge>> edges;
  node_of(m.initial(), true);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    std::vector<Edge> es;
    StateId q = nodes_[i].state;
    bool root = nodes_[i].root;
    for (const auto& t : m.transitions(q)) {
      if (t.letter)
        es.push_back({&t, node_of(t.to0, false), node_of(t.to1, false)});
      else
        es.push_back({&t, node_of(t.to0, root), 0});
    }
    if (!root && m.is_final(q)) es.clear();
    edges.push_back(std::move(es));
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (const auto& e : edges[i]) {
      nodes_[e.to0].preds.push_back(i);
      if (e.t->letter) nodes_[e.to1].preds.push_back(i);
    }
  std::deque<std::size_t> work;
  std::vector<char> queued(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].root || !m.is_final(nodes_[i].state)) {
      work.push_back(i);
      queued[i] = 1;
    }
  std::size_t rounds = 0;
  while (!work.empty()) {
    std::size_t i = work.front();
    work.pop_front();
    queued[i] = 0;
    if (++rounds > budget.max_levels) throw BudgetExceeded("dead-set fixpoint exceeds the level cap");
    Basis dead{Valuation{}};
    for (const auto& e : edges[i]) {
      Basis bad = pre_forall(e.t->instr, nodes_[e.to0].basis);
      if (e.t->letter) bad = unite(std::move(bad), pre_forall(e.t->instr, nodes_[e.to1].basis));
      dead = intersect(dead, bad);
      if (dead.empty()) break;
    }
    bool grew = false;
    for (const auto& v : dead)
      if (!covered(nodes_[i].basis, v)) {
        if (v.sum() > budget.max_valuation_sum) throw BudgetExceeded("dead-set basis exceeds the valuation cap");
        grew = true;
      }
    if (!grew) continue;
    nodes_[i].basis = unite(std::move(nodes_[i].basis), dead);
    for (std::size_t p : nodes_[i].preds)
      if (!queued[p]) {
        queued[p] = 1;
        work.push_back(p);
      }
  }
}

bool DeadSets::dead(const Config& c) const {
  auto it = index_.find(key(c.state, c.root));
  return it != index_.end() && covered(nodes_[it->second].basis, c.val);
}

const std::vector<Valuation>& DeadSets::basis(StateId q, bool root) const {
  static const std::vector<Valuation> none;
  auto it = index_.find(key(q, root));
  return it == index_.end() ? none : nodes_[it->second].basis;
}

InfiniteOutcome exists_infinite_with_P(const Machine& m, const StatePredicate& p, const Budget& budget) {
  InfiniteOutcome out;
  DeadSets dead(m, budget);
  out.control_states = dead.control_states();
  BranchSearch search(
      m, [&](const Config& c) { return removable(m, c) || (p(c.state) && !dead.dead(c)); },
      [&](const Config& c) { return dead.dead(c); }, budget);
  out.exists = search.solve(Config{m.initial(), {}, true});
  out.stats.levels = out.stats.retained = search.expanded();
  out.stats.max_valuation_sum = search.max_valuation_sum();
  if (!out.exists && search.truncated()) throw BudgetExceeded("valuation cap reached");
  return out;
}

std::uint64_t bound_k(const std::vector<Level>& basis) {
  std::uint64_t mx = 0;
  for (const auto& g : basis)
    for (const auto& c : g) mx = std::max(mx, c.val.sum());
  return 1 + mx;
}

namespace {

bool in_up(const std::vector<Level>& basis, const Level& g) {
  for (const auto& b : basis)
    if (level_leq(b, g)) return true;
  return false;
}

std::vector<Level> minimal_levels(std::vector<Level> ls) {
  std::vector<Level> out;
  std::sort(ls.begin(), ls.end(), [](const Level& a, const Level& b) { return a.size() < b.size(); });
  for (auto& g : ls)
    if (!in_up(out, g)) out.push_back(std::move(g));
  return out;
}

void valuations(const std::vector<Counter>& counters, std::uint32_t k, std::size_t i, Valuation& acc,
                std::vector<Valuation>& out) {
  if (i == counters.size()) {
    out.push_back(acc);
    return;
  }
  for (std::uint32_t x = 0; x <= k; ++x) {
    acc.set(counters[i], x);
    valuations(counters, k, i + 1, acc, out);
  }
  acc.set(counters[i], 0);
}

}  // namespace

std::vector<Level> pred_forall_basis(const Machine& m, const std::vector<Level>& basis,
                                     const std::vector<Counter>& counters, std::size_t max_level_size) {
  const auto k = static_cast<std::uint32_t>(bound_k(basis));
  std::vector<Valuation> vals;
  Valuation acc;
  valuations(counters, k, 0, acc, vals);
  std::vector<Config> configs;
  std::set<std::pair<StateId, bool>> nodes{{m.initial(), true}};
  std::deque<std::pair<StateId, bool>> queue{{m.initial(), true}};
  while (!queue.empty()) {
    auto [q, root] = queue.front();
    queue.pop_front();
    for (const auto& t : m.transitions(q)) {
      std::vector<std::pair<StateId, bool>> next{{t.to0, root && !t.letter}};
      if (t.letter) next.push_back({t.to1, false});
      for (const auto& n : next)
        if (nodes.insert(n).second) queue.push_back(n);
    }
  }
  for (const auto& [q, root] : nodes)
    for (const auto& v : vals) configs.push_back({q, v, root});
  std::vector<Level> found;
  std::vector<Config> cur;
  std::function<void(std::size_t)> go = [&](std::size_t from) {
    Level g = make_level(cur);
    bool all = true;
    for (const auto& h : level_successors(m, g))
      if (!in_up(basis, h)) {
        all = false;
        break;
      }
    if (all) {
      found.push_back(g);
      return;  // supersets are covered
    }
    if (cur.size() == max_level_size) return;
    for (std::size_t i = from; i < configs.size(); ++i) {
      cur.push_back(configs[i]);
      go(i + 1);
      cur.pop_back();
    }
  };
  go(0);
  return minimal_levels(std::move(found));
}

bool exists_infinite_by_bases(const Machine& m, const StatePredicate& p, const std::vector<Counter>& counters,
                              const Budget& budget) {
  auto reach = reach_basis(m, budget);
  std::vector<Level> term;
  while (true) {
    auto h = pred_forall_basis(m, term, counters);
    bool grew = false;
    for (auto& g : h)
      if (!in_up(term, g)) {
        term.push_back(std::move(g));
        grew = true;
      }
    if (!grew) break;
    term = minimal_levels(std::move(term));
  }
  for (const auto& g : reach) {
    if (in_up(term, g)) continue;
    bool has_non_p = std::any_of(g.begin(), g.end(), [&](const Config& c) { return !removable(m, c) && !p(c.state); });
    if (!has_non_p) return true;
  }
  return false;
}

}  // namespace dtsat
