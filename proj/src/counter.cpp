#include "dtsat/counter.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

namespace dtsat {

Valuation::Valuation(std::initializer_list<std::pair<Counter, std::uint32_t>> init) {
  for (const auto& [c, v] : init) add(c, v);
}

std::uint32_t Valuation::get(Counter c) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                             [](const auto& e, Counter x) { return e.first < x; });
  return it != entries_.end() && it->first == c ? it->second : 0;
}

void Valuation::set(Counter c, std::uint32_t v) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                             [](const auto& e, Counter x) { return e.first < x; });
  if (it != entries_.end() && it->first == c) {
    if (v == 0)
      entries_.erase(it);
    else
      it->second = v;
  } else if (v != 0) {
    entries_.insert(it, {c, v});
  }
}

std::uint64_t Valuation::sum() const {
  std::uint64_t s = 0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

bool Valuation::leq(const Valuation& o) const {
  auto j = o.entries_.begin();
  for (const auto& [c, v] : entries_) {
    while (j != o.entries_.end() && j->first < c) ++j;
    if (j == o.entries_.end() || j->first != c || j->second < v) return false;
  }
  return true;
}

namespace {

template <typename F>
Valuation merge(const Valuation& a, const Valuation& b, F f) {
  Valuation out;
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.set(x[i].first, f(x[i].second, 0U));
      ++i;
    } else if (i == x.size() || y[j].first < x[i].first) {
      out.set(y[j].first, f(0U, y[j].second));
      ++j;
    } else {
      out.set(x[i].first, f(x[i].second, y[j].second));
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

Valuation Valuation::lub(const Valuation& o) const {
  return merge(*this, o, [](std::uint32_t a, std::uint32_t b) { return std::max(a, b); });
}

Valuation Valuation::minus(const Valuation& o) const {
  return merge(*this, o, [](std::uint32_t a, std::uint32_t b) { return a > b ? a - b : 0U; });
}

Valuation Valuation::plus(const Valuation& o) const {
  return merge(*this, o, [](std::uint32_t a, std::uint32_t b) { return a + b; });
}

std::size_t ValuationHash::operator()(const Valuation& v) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (const auto& [c, x] : v.entries()) {
    h ^= (static_cast<std::size_t>(c) << 32) ^ x;
    h *= 1099511628211ULL;
  }
  return h;
}

Instruction Instruction::transfer(Counter c, std::vector<Counter> to) {
  std::sort(to.begin(), to.end());
  to.erase(std::unique(to.begin(), to.end()), to.end());
  return {Op::Transfer, c, std::move(to)};
}

Instruction Instruction::as_transfer() const {
  if (op == Op::Ifz) return transfer(counter, {});
  return *this;
}

namespace {

// Every way of distributing n tokens over `targets`, added onto `base`.
void splits(const Valuation& base, std::uint32_t n, const std::vector<Counter>& targets, std::size_t i,
            std::vector<Valuation>& out) {
  if (i + 1 == targets.size()) {
    Valuation w = base;
    w.add(targets[i], n);
    out.push_back(std::move(w));
    return;
  }
  for (std::uint32_t k = 0; k <= n; ++k) {
    Valuation w = base;
    w.add(targets[i], k);
    splits(w, n - k, targets, i + 1, out);
  }
}

}  // namespace

std::vector<Valuation> exact_step(const Valuation& v, const Instruction& l) {
  const std::uint32_t x = v.get(l.counter);
  switch (l.op) {
    case Instruction::Op::Inc: {
      Valuation w = v;
      w.add(l.counter, 1);
      return {w};
    }
    case Instruction::Op::Dec: {
      if (x == 0) return {};
      Valuation w = v;
      w.set(l.counter, x - 1);
      return {w};
    }
    case Instruction::Op::Ifz:
      if (x != 0) return {};
      return {v};
    case Instruction::Op::Transfer: {
      Valuation base = v;
      base.set(l.counter, 0);
      if (l.targets.empty()) return x == 0 ? std::vector<Valuation>{base} : std::vector<Valuation>{};
      std::vector<Valuation> out;
      splits(base, x, l.targets, 0, out);
      return out;
    }
  }
  return {};
}

std::vector<Valuation> lazy_step(const Valuation& v, const Instruction& l) {
  if (l.op == Instruction::Op::Dec && v.get(l.counter) == 0) return {v};
  return exact_step(v, l);
}

namespace {

void inflations(const Valuation& v, const std::vector<Counter>& support, std::uint32_t inflation, std::size_t i,
                std::vector<Valuation>& out) {
  if (i == support.size()) {
    out.push_back(v);
    return;
  }
  for (std::uint32_t k = 0; k <= inflation; ++k) {
    Valuation w = v;
    w.add(support[i], k);
    inflations(w, support, inflation, i + 1, out);
  }
}

}  // namespace

std::vector<Valuation> errorful_step(const Valuation& v, const Instruction& l, const std::vector<Counter>& support,
                                     std::uint32_t inflation) {
  std::vector<Valuation> before, out;
  inflations(v, support, inflation, 0, before);
  for (const auto& b : before)
    for (const auto& w : exact_step(b, l)) inflations(w, support, inflation, 0, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ExplicitMachine::ExplicitMachine(Alphabet alphabet, std::vector<std::string> states, StateId initial,
                                 std::vector<StateId> finals, std::uint32_t k)
    : alphabet_(std::move(alphabet)),
      states_(std::move(states)),
      initial_(initial),
      finals_(states_.size(), false),
      k_(k),
      delta_(states_.size()) {
  if (states_.empty()) throw ValidationError("a machine needs at least one state");
  if (alphabet_.empty()) throw ValidationError("alphabet must not be empty");
  if (initial_ >= states_.size()) throw ValidationError("initial state out of range");
  for (auto f : finals) {
    if (f >= states_.size()) throw ValidationError("final state out of range");
    finals_[f] = true;
  }
}

void ExplicitMachine::add(StateId from, std::optional<Letter> letter, Instruction instr, StateId to0, StateId to1) {
  auto check_counter = [&](Counter c) {
    if (c < 1 || c > k_) throw ValidationError("counter " + std::to_string(c) + " out of range 1.." + std::to_string(k_));
  };
  if (from >= states_.size() || to0 >= states_.size() || to1 >= states_.size())
    throw ValidationError("transition state out of range");
  if (letter && (*letter < 0 || *letter >= static_cast<Letter>(alphabet_.size())))
    throw ValidationError("transition letter out of range");
  check_counter(instr.counter);
  for (auto c : instr.targets) check_counter(c);
  if (instr.op == Instruction::Op::Transfer) instr = Instruction::transfer(instr.counter, instr.targets);
  delta_[from].push_back({letter, std::move(instr), to0, letter ? to1 : 0});
}

bool ExplicitMachine::uses_ifz() const {
  for (const auto& ts : delta_)
    for (const auto& t : ts)
      if (t.instr.op == Instruction::Op::Ifz) return true;
  return false;
}

bool ExplicitMachine::uses_transfer() const {
  for (const auto& ts : delta_)
    for (const auto& t : ts)
      if (t.instr.op == Instruction::Op::Transfer) return true;
  return false;
}

bool ExplicitMachine::epsilon_cycle_free() const { return dtsat::epsilon_cycle_free(*this); }

std::vector<StateId> reachable_states(const Machine& m, std::size_t max_states) {
  std::vector<StateId> order{m.initial()};
  std::unordered_set<StateId> seen{m.initial()};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& t : m.transitions(order[i])) {
      for (int d = 0; d < (t.letter ? 2 : 1); ++d) {
        StateId r = d == 0 ? t.to0 : t.to1;
        if (seen.insert(r).second) {
          order.push_back(r);
          if (order.size() > max_states) throw BudgetExceeded("control graph exceeds " + std::to_string(max_states) + " states");
        }
      }
    }
  }
  return order;
}

bool epsilon_cycle_free(const Machine& m, std::size_t max_states) {
  auto states = reachable_states(m, max_states);
  std::unordered_map<StateId, int> color;  // 0 white, 1 on stack, 2 done
  for (StateId s : states) {
    if (color[s] != 0) continue;
    std::vector<std::pair<StateId, std::size_t>> stack{{s, 0}};
    color[s] = 1;
    while (!stack.empty()) {
      auto& [q, i] = stack.back();
      const auto& ts = m.transitions(q);
      if (i == ts.size()) {
        color[q] = 2;
        stack.pop_back();
        continue;
      }
      const auto& t = ts[i++];
      if (t.letter) continue;
      int& c = color[t.to0];
      if (c == 1) return false;
      if (c == 0) {
        c = 1;
        stack.push_back({t.to0, 0});
      }
    }
  }
  return true;
}

bool config_leq(const Config& a, const Config& b) {
  return a.state == b.state && a.root == b.root && a.val.leq(b.val);
}

Level make_level(std::vector<Config> cs) {
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  return cs;
}

bool level_leq(const Level& g, const Level& h) {
  for (const auto& a : g) {
    bool found = false;
    for (const auto& b : h)
      if (config_leq(a, b)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

bool level_embeds(const Level& g, const Level& h) {
  if (g.size() > h.size()) return false;
  std::vector<int> match(h.size(), -1);
  std::vector<char> used;
  std::function<bool(std::size_t)> augment = [&](std::size_t i) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (used[j] || !config_leq(g[i], h[j])) continue;
      used[j] = 1;
      if (match[j] < 0 || augment(static_cast<std::size_t>(match[j]))) {
        match[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    used.assign(h.size(), 0);
    if (!augment(i)) return false;
  }
  return true;
}

std::vector<Move> config_moves(const Machine& m, const Config& c) {
  std::vector<Move> out;
  for (const auto& t : m.transitions(c.state)) {
    auto ws = lazy_step(c.val, t.instr);
    if (!t.letter) {
      for (auto& w : ws) out.push_back({&t, {Config{t.to0, std::move(w), c.root}}});
      continue;
    }
    for (const auto& w0 : ws)
      for (const auto& w1 : ws) out.push_back({&t, {Config{t.to0, w0, false}, Config{t.to1, w1, false}}});
  }
  return out;
}

std::vector<Level> level_successors(const Machine& m, const Level& g, std::size_t limit) {
  std::vector<std::vector<Move>> options;
  for (const auto& c : g) {
    if (removable(m, c)) continue;
    options.push_back(config_moves(m, c));
    if (options.back().empty()) return {};
  }
  std::set<Level> out;
  std::vector<Config> acc;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == options.size()) {
      out.insert(make_level(acc));
      if (out.size() > limit) throw BudgetExceeded("too many successor levels");
      return;
    }
    for (const auto& mv : options[i]) {
      std::size_t mark = acc.size();
      acc.insert(acc.end(), mv.results.begin(), mv.results.end());
      go(i + 1);
      acc.resize(mark);
    }
  };
  go(0);
  return {out.begin(), out.end()};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Sat:
      return "SAT";
    case Verdict::Unsat:
      return "UNSAT";
    case Verdict::Budget:
      return "BUDGET";
  }
  return "?";
}

}  // namespace dtsat
