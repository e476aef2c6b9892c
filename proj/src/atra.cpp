#include "dtsat/atra.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace dtsat {

Configuration normalize(Configuration g) {
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

Atra::Atra(Alphabet alphabet, std::vector<std::string> states, int initial, StateSet finals)
    : alphabet_(std::move(alphabet)), states_(std::move(states)), initial_(initial), finals_(finals) {
  if (states_.empty()) throw ValidationError("automaton needs at least one state");
  if (states_.size() > static_cast<std::size_t>(kMaxStates))
    throw ValidationError("automaton has more than 64 states");
  if (alphabet_.empty()) throw ValidationError("alphabet is empty");
  if (initial_ < 0 || initial_ >= num_states()) throw ValidationError("initial state out of range");
  if (!subset_of(finals_, all_states())) throw ValidationError("final states out of range");
  delta_.assign(states_.size() * alphabet_.size() * 2, Formula::bottom());
}

StateSet Atra::all_states() const {
  return num_states() == 64 ? ~StateSet{0} : (StateSet{1} << num_states()) - 1;
}

int Atra::state_index(const std::string& name) const {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw ValidationError("unknown state '" + name + "'");
  return static_cast<int>(it - states_.begin());
}

bool Atra::has_hole() const {
  return std::any_of(delta_.begin(), delta_.end(), [](const Formula& f) { return f.has_hole(); });
}

void Atra::validate(bool allow_hole) const {
  for (const auto& f : delta_) {
    if (!allow_hole && f.has_hole()) throw ValidationError("hole in a plain automaton");
    f.for_each_atom([&](int q, int, Update) {
      if (q >= num_states()) throw ValidationError("atom refers to an unknown state");
    });
  }
}

void induced_threads(const Quadruple& r, int dir, Datum datum, Datum reg, Configuration& out) {
  for (int q : members(r.store(dir))) out.push_back({q, datum});
  for (int q : members(r.keep(dir))) out.push_back({q, reg});
}

namespace {

bool config_subset(const Configuration& a, const Configuration& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<std::pair<Configuration, Configuration>> step(const Atra& a, const Configuration& g, Letter letter,
                                                          Datum datum, std::optional<bool> hole) {
  using Pair = std::pair<Configuration, Configuration>;
  std::vector<Pair> acc{Pair{}};
  for (const auto& th : g) {
    auto models = minimal_models(a.delta(th.state, letter, th.datum == datum), hole);
    std::vector<Pair> next;
    for (const auto& p : acc) {
      for (const auto& m : models) {
        Pair q = p;
        induced_threads(m, 0, datum, th.datum, q.first);
        induced_threads(m, 1, datum, th.datum, q.second);
        q.first = normalize(std::move(q.first));
        q.second = normalize(std::move(q.second));
        next.push_back(std::move(q));
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    acc = std::move(next);
    if (acc.empty()) return {};
  }
  std::vector<Pair> out;
  for (const auto& p : acc) {
    bool dominated = std::any_of(acc.begin(), acc.end(), [&](const Pair& o) {
      return o != p && config_subset(o.first, p.first) && config_subset(o.second, p.second);
    });
    if (!dominated) out.push_back(p);
  }
  return out;
}

namespace {

struct Key {
  int node;
  int state;
  Datum reg;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    return std::hash<Datum>{}(k.reg) * 0x9e3779b97f4a7c15ULL ^
           (static_cast<std::size_t>(k.node) << 8 | static_cast<std::size_t>(k.state));
  }
};

class Membership {
 public:
  Membership(const Atra& a, const DataTree& t, const MembershipOptions& o) : a_(a), t_(t), opts_(o) {
    models_.resize(static_cast<std::size_t>(a.num_states() * a.num_letters() * 2 * 2));
  }

  bool accept(int node, int q, Datum reg) {
    const auto& n = t_.node(node);
    if (n.is_leaf()) return a_.is_final(q);
    Key key{node, q, reg};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second >= 0;
    const auto& ms = models(q, n.letter, reg == n.datum, hole_at(node));
    int chosen = -1;
    for (std::size_t i = 0; i < ms.size() && chosen < 0; ++i) {
      bool ok = true;
      for (int d = 0; d < 2 && ok; ++d) {
        for (int r : members(ms[i].store(d)))
          if (!(ok = accept(n.child[d], r, n.datum))) break;
        if (!ok) break;
        for (int r : members(ms[i].keep(d)))
          if (!(ok = accept(n.child[d], r, reg))) break;
      }
      if (ok) chosen = static_cast<int>(i);
    }
    memo_[key] = chosen;
    return chosen >= 0;
  }

  void collect(int node, int q, Datum reg, Run& run) {
    auto& cfg = run[static_cast<std::size_t>(node)];
    Thread th{q, reg};
    if (std::find(cfg.begin(), cfg.end(), th) != cfg.end()) return;
    cfg.push_back(th);
    const auto& n = t_.node(node);
    if (n.is_leaf()) return;
    int chosen = memo_.at(Key{node, q, reg});
    const auto& m = models(q, n.letter, reg == n.datum, hole_at(node))[static_cast<std::size_t>(chosen)];
    for (int d = 0; d < 2; ++d) {
      for (int r : members(m.store(d))) collect(n.child[d], r, n.datum, run);
      for (int r : members(m.keep(d))) collect(n.child[d], r, reg, run);
    }
  }

 private:
  std::optional<bool> hole_at(int node) const {
    if (!opts_.hole_nodes) return std::nullopt;
    return (*opts_.hole_nodes)[static_cast<std::size_t>(node)];
  }

  const std::vector<Quadruple>& models(int q, Letter a, bool eq, std::optional<bool> hole) {
    std::size_t idx = ((static_cast<std::size_t>(q) * static_cast<std::size_t>(a_.num_letters()) +
                        static_cast<std::size_t>(a)) * 2 + (eq ? 1 : 0)) * 2 + (hole.value_or(false) ? 1 : 0);
    auto& slot = models_[idx];
    if (!slot) slot = minimal_models(a_.delta(q, a, eq), hole);
    return *slot;
  }

  const Atra& a_;
  const DataTree& t_;
  const MembershipOptions& opts_;
  std::vector<std::optional<std::vector<Quadruple>>> models_;
  std::unordered_map<Key, int, KeyHash> memo_;
};

}  // namespace

MembershipResult has_final_run(const Atra& a, const DataTree& t, const MembershipOptions& opts) {
  if (t.alphabet() != a.alphabet()) throw ValidationError("tree and automaton alphabets differ");
  if (opts.start < 0 || opts.start >= t.size()) throw ValidationError("start node out of range");
  Membership m(a, t, opts);
  Datum reg = opts.initial_register.value_or(t.node(opts.start).datum);
  MembershipResult res;
  res.accepted = m.accept(opts.start, a.initial(), reg);
  if (res.accepted) {
    res.run.assign(static_cast<std::size_t>(t.size()), {});
    m.collect(opts.start, a.initial(), reg, res.run);
    for (auto& c : res.run) c = normalize(std::move(c));
  }
  return res;
}

bool validate_run(const Atra& a, const DataTree& t, const Run& run, std::string* why) {
  auto fail = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  if (run.size() != static_cast<std::size_t>(t.size())) return fail("run size differs from tree size");
  const auto& root = run[0];
  if (!std::binary_search(root.begin(), root.end(), Thread{a.initial(), t.node(0).datum}))
    return fail("initial thread missing at the root");
  for (int i = 0; i < t.size(); ++i) {
    const auto& n = t.node(i);
    const auto& g = run[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      for (const auto& th : g)
        if (!a.is_final(th.state)) return fail("nonfinal thread at leaf " + std::to_string(i));
      continue;
    }
    for (const auto& th : g) {
      Quadruple avail;
      for (int d = 0; d < 2; ++d) {
        for (const auto& h : run[static_cast<std::size_t>(n.child[d])]) {
          if (h.datum == n.datum) avail.at(d, Update::Store) |= singleton(h.state);
          if (h.datum == th.datum) avail.at(d, Update::Keep) |= singleton(h.state);
        }
      }
      if (!satisfies(avail, a.delta(th.state, n.letter, th.datum == n.datum), false))
        return fail("transition violated at node " + std::to_string(i));
    }
  }
  return true;
}

Atra dualize(const Atra& a) {
  Atra d(a.alphabet(), a.states(), a.initial(), a.all_states() & ~a.finals());
  for (int q = 0; q < a.num_states(); ++q)
    for (Letter l = 0; l < a.num_letters(); ++l)
      for (bool eq : {false, true}) d.set_delta(q, l, eq, a.delta(q, l, eq).dual());
  return d;
}

namespace {

Atra combine(const Atra& a1, const Atra& a2, bool conjunctive) {
  if (a1.alphabet() != a2.alphabet()) throw ValidationError("alphabet mismatch");
  const int n1 = a1.num_states();
  std::vector<std::string> names{"init"};
  for (const auto& s : a1.states()) names.push_back("1." + s);
  for (const auto& s : a2.states()) names.push_back("2." + s);
  if (names.size() > static_cast<std::size_t>(kMaxStates)) throw ValidationError("combined automaton exceeds 64 states");
  StateSet finals = (a1.finals() << 1) | (a2.finals() << (1 + n1));
  Atra r(a1.alphabet(), names, 0, finals);
  auto s1 = [](int q) { return q + 1; };
  auto s2 = [n1](int q) { return q + 1 + n1; };
  for (Letter l = 0; l < a1.num_letters(); ++l) {
    for (bool eq : {false, true}) {
      for (int q = 0; q < n1; ++q) r.set_delta(s1(q), l, eq, a1.delta(q, l, eq).map_states(s1));
      for (int q = 0; q < a2.num_states(); ++q) r.set_delta(s2(q), l, eq, a2.delta(q, l, eq).map_states(s2));
    }
    Formula f1 = a1.delta(a1.initial(), l, true).map_states(s1);
    Formula f2 = a2.delta(a2.initial(), l, true).map_states(s2);
    r.set_delta(0, l, conjunctive ? Formula::conj(f1, f2) : Formula::disj(f1, f2));
  }
  return r;
}

}  // namespace

Atra intersect(const Atra& a1, const Atra& a2) { return combine(a1, a2, true); }
Atra union_(const Atra& a1, const Atra& a2) { return combine(a1, a2, false); }

Atra empty_automaton(const Alphabet& alphabet) { return Atra(alphabet, {"empty"}, 0, 0); }

Atra universal_automaton(const Alphabet& alphabet) {
  Atra a(alphabet, {"all"}, 0, 1);
  for (Letter l = 0; l < a.num_letters(); ++l) a.set_delta(0, l, Formula::top());
  return a;
}

Alphabet bk_alphabet(int m) {
  Alphabet a;
  for (int i = 1; i <= m; ++i) a.push_back("b" + std::to_string(i));
  a.push_back("*");
  return a;
}

std::uint64_t tower(int k) {
  if (k < 0) throw ValidationError("tower of a negative height");
  std::uint64_t v = 1;
  for (int i = 0; i < k; ++i) {
    if (v >= 64) throw BudgetExceeded("2⇑" + std::to_string(k) + " exceeds 64 bits");
    v = std::uint64_t{1} << v;
  }
  return v;
}

namespace {

Formula keep(int q, int d) { return Formula::atom(q, d, Update::Keep); }
Formula store(int q, int d) { return Formula::atom(q, d, Update::Store); }

Atra make_b1(const Alphabet& sigma) {
  Atra a(sigma, {"q", "q'", "q''"}, 0, singleton(2));
  Letter b1 = letter_index(sigma, "b1");
  a.set_delta(0, b1, Formula::conj(keep(1, 0), keep(2, 1)));
  a.set_delta(1, b1, Formula::conj(keep(2, 0), keep(2, 1)));
  return a;
}

// Root and its left child carry b_{k+1}; the root's right child is a leaf.
Atra clause_root(const Alphabet& sigma, int k1) {
  Atra a(sigma, {"r0", "r1", "leaf"}, 0, singleton(2));
  Letter b = letter_index(sigma, "b" + std::to_string(k1));
  a.set_delta(0, b, Formula::conj(keep(1, 0), keep(2, 1)));
  a.set_delta(1, b, Formula::top());
  return a;
}

// Below the root, a b_{k+1} node has as left child a leaf or a * node with two
// b_{k+1} children, and its right subtree is accepted by B_k.
Atra clause_shape(const Alphabet& sigma, int k1, const Atra& bk) {
  const int off = 3;
  std::vector<std::string> names{"s0", "node", "left"};
  for (const auto& s : bk.states()) names.push_back("b." + s);
  if (names.size() > static_cast<std::size_t>(kMaxStates)) throw BudgetExceeded("B_k exceeds 64 states");
  Atra a(sigma, names, 0, singleton(2) | (bk.finals() << off));
  Letter b = letter_index(sigma, "b" + std::to_string(k1));
  Letter star = letter_index(sigma, "*");
  auto shift = [](int q) { return q + off; };
  a.set_delta(0, b, keep(1, 0));
  a.set_delta(1, b, Formula::conj(keep(2, 0), keep(bk.initial() + off, 1)));
  a.set_delta(2, star, Formula::conj(keep(1, 0), keep(1, 1)));
  for (int q = 0; q < bk.num_states(); ++q)
    for (Letter l = 0; l < a.num_letters(); ++l)
      for (bool eq : {false, true}) a.set_delta(q + off, l, eq, bk.delta(q, l, eq).map_states(shift));
  return a;
}

// Distinct data along b_{k+1} chains, each ancestor datum found at a b_k node
// in the right subtree of the descendant.
Atra clause_data(const Alphabet& sigma, int k1) {
  Atra a(sigma, {"q0", "q1", "q2", "q3"}, 0, singleton(1) | singleton(2));
  Letter b = letter_index(sigma, "b" + std::to_string(k1));
  Letter bk = letter_index(sigma, "b" + std::to_string(k1 - 1));
  Letter star = letter_index(sigma, "*");
  for (Letter l = 0; l < a.num_letters(); ++l) a.set_delta(0, l, keep(1, 0));
  a.set_delta(1, star, Formula::conj(keep(1, 0), keep(1, 1)));
  a.set_delta(1, b, Formula::conj(keep(1, 0), store(2, 0)));
  a.set_delta(2, star, Formula::conj(keep(2, 0), keep(2, 1)));
  a.set_delta(2, b, false, Formula::conj(keep(2, 0), keep(3, 1)));
  a.set_delta(3, star, Formula::disj(keep(3, 0), keep(3, 1)));
  a.set_delta(3, bk, true, Formula::top());
  a.set_delta(3, bk, false, keep(3, 0));
  return a;
}

}  // namespace

Atra make_bk(int k, int m) {
  if (k < 1) throw ValidationError("make_bk needs k >= 1");
  if (m < k) throw ValidationError("make_bk needs m >= k");
  Alphabet sigma = bk_alphabet(m);
  Atra a = make_b1(sigma);
  for (int j = 1; j < k; ++j) {
    Atra shape = clause_shape(sigma, j + 1, a);
    a = intersect(intersect(clause_root(sigma, j + 1), shape), clause_data(sigma, j + 1));
  }
  return a;
}

}  // namespace dtsat
