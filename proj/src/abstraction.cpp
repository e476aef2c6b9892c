#include "dtsat/abstraction.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dtsat {

AbstractConfiguration abstract(const Configuration& g) {
  std::map<Datum, StateSet> bundles;
  for (const auto& th : g) bundles[th.datum] |= singleton(th.state);
  AbstractConfiguration out;
  for (const auto& [d, s] : bundles) ++out[s];
  return out;
}

bool abstract_leq(const AbstractConfiguration& a, const AbstractConfiguration& b) {
  for (const auto& [s, n] : a) {
    auto it = b.find(s);
    if (it == b.end() || it->second < n) return false;
  }
  return true;
}

std::vector<Quadruple> covering_quadruples(const Atra& a, Letter letter, StateSet s, bool eq) {
  std::vector<Quadruple> acc{Quadruple{}};
  for (int q : members(s)) {
    auto models = minimal_models(a.delta(q, letter, eq));
    std::vector<Quadruple> next;
    for (const auto& x : acc)
      for (const auto& m : models) next.push_back(x.join(m));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    acc.clear();
    for (const auto& x : next) {
      bool minimal = true;
      for (const auto& y : next)
        if (y != x && y.leq(x)) {
          minimal = false;
          break;
        }
      if (minimal) acc.push_back(x);
    }
    if (acc.empty()) break;
  }
  return acc;
}

std::vector<AbstractPair> abstract_successors(const Atra& a, const AbstractConfiguration& v, Letter letter,
                                              StateSet q_eq) {
  if (q_eq != 0) {
    auto it = v.find(q_eq);
    if (it == v.end() || it->second == 0)
      throw ValidationError("abstract successor needs an abstract datum with bundle Q=");
  }
  // per abstract datum: (bundle, eq?) with its candidate quadruples
  struct Slot {
    std::vector<Quadruple> choices;
    bool eq;
  };
  std::vector<std::pair<StateSet, std::uint32_t>> groups;
  std::vector<Slot> slots;
  if (q_eq != 0) slots.push_back({covering_quadruples(a, letter, q_eq, true), true});
  for (const auto& [s, n] : v) {
    std::uint32_t k = s == q_eq ? n - 1 : n;
    if (k > 0) groups.push_back({s, k});
  }
  std::vector<std::vector<Quadruple>> group_choices;
  for (const auto& [s, k] : groups) group_choices.push_back(covering_quadruples(a, letter, s, false));

  std::set<AbstractPair> found;
  std::vector<const Quadruple*> picked;  // one per non-eq datum
  const Quadruple* eq_pick = nullptr;
  auto finish = [&] {
    AbstractPair w;
    for (int d = 0; d < 2; ++d) {
      auto& wd = d == 0 ? w.first : w.second;
      StateSet r_eq = eq_pick ? (eq_pick->store(d) | eq_pick->keep(d)) : 0;
      for (const auto* q : picked) {
        r_eq |= q->store(d);
        if (q->keep(d) != 0) ++wd[q->keep(d)];
      }
      if (r_eq != 0) ++wd[r_eq];
    }
    found.insert(std::move(w));
  };
  // multisets of choices per group
  std::function<void(std::size_t, std::uint32_t, std::size_t)> go = [&](std::size_t g, std::uint32_t left,
                                                                        std::size_t from) {
    if (g == groups.size()) {
      finish();
      return;
    }
    if (left == 0) {
      go(g + 1, g + 1 < groups.size() ? groups[g + 1].second : 0, 0);
      return;
    }
    const auto& ch = group_choices[g];
    for (std::size_t i = from; i < ch.size(); ++i) {
      picked.push_back(&ch[i]);
      go(g, left - 1, i);
      picked.pop_back();
    }
  };
  for (const auto& ch : group_choices)
    if (ch.empty()) return {};
  auto start = [&] { go(0, groups.empty() ? 0 : groups[0].second, 0); };
  if (q_eq != 0) {
    for (const auto& e : slots[0].choices) {
      eq_pick = &e;
      start();
    }
  } else {
    start();
  }
  std::vector<AbstractPair> all(found.begin(), found.end()), out;
  for (const auto& p : all) {
    bool minimal = true;
    for (const auto& o : all)
      if (o != p && abstract_leq(o.first, p.first) && abstract_leq(o.second, p.second)) {
        minimal = false;
        break;
      }
    if (minimal) out.push_back(p);
  }
  return out;
}

ProductAtra product_safety(const Atra& a1, const Atra& a2) {
  if (a1.alphabet() != a2.alphabet()) throw ValidationError("automata have different alphabets");
  ProductAtra p{intersect(a1, dualize(a2)), 0, 0};
  for (int q = 0; q < a1.num_states(); ++q) p.q1 |= singleton(1 + q);
  for (int q = 0; q < a2.num_states(); ++q) p.q2 |= singleton(1 + a1.num_states() + q);
  return p;
}

std::optional<DataTree> lift_witness(const Atra& a, const DataTree& shape) {
  const auto inner = shape.nonleaf_nodes();
  DataTree t = shape;
  std::optional<DataTree> found;
  // restricted growth strings enumerate labellings up to renaming
  std::function<void(std::size_t, Datum)> go = [&](std::size_t i, Datum used) {
    if (found) return;
    if (i == inner.size()) {
      if (has_final_run(a, t).accepted) found = t;
      return;
    }
    for (Datum d = 0; d <= used && !found; ++d) {
      t.node(inner[i]).datum = d;
      go(i + 1, std::max(used, d + 1));
    }
  };
  go(0, 0);
  return found;
}

AtraFiniteOutcome atra_nonempty_finite(const Atra& a, const FiniteOptions& opts) {
  auto m = compile_finite(a);
  auto r = nonempty_finite(*m, opts);
  AtraFiniteOutcome out;
  out.verdict = r.verdict;
  out.stats = r.stats;
  if (r.verdict == Verdict::Sat && r.witness) {
    DataTree shape = *r.witness;
    if (auto lifted = lift_witness(a, shape)) {
      out.witness = std::move(lifted);
      out.certified = true;
    } else {
      out.witness = std::move(shape);
    }
  }
  return out;
}

bool atra_inclusion_safety(const Atra& a1, const Atra& a2, const Budget& budget) {
  auto m = compile_inclusion(product_safety(a1, a2));
  const auto& cm = *m;
  return !exists_infinite_with_P(cm, [&](StateId q) { return cm.prop(q); }, budget).exists;
}

bool atra_nonempty_safety(const Atra& a, const Budget& budget) {
  return !atra_inclusion_safety(a, empty_automaton(a.alphabet()), budget);
}

}  // namespace dtsat
