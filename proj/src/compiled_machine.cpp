#include <algorithm>

#include "dtsat/abstraction.hpp"

namespace dtsat {

namespace {

enum Phase : std::uint8_t { kStart, kLoop, kIncQuad, kPos, kIncAcc, kMove, kProp, kPropZero, kFin, kFinZero, kFinal };

constexpr const char* kPhaseNames[] = {"start", "loop", "incq", "pos", "incacc", "move",
                                       "prop",  "propz", "fin", "finz", "final"};

constexpr Counter kZero = 0;
constexpr Counter kSink = 1;

// Counter 0 is never incremented, so this always succeeds.
Instruction nop() { return Instruction::transfer(kZero, {}); }
Instruction zero_test(Counter c) { return Instruction::transfer(c, {}); }

std::string key_of(const CompiledMachine::State& s) {
  std::string k;
  auto put = [&](const auto& x) { k.append(reinterpret_cast<const char*>(&x), sizeof x); };
  put(s.phase);
  put(s.root);
  put(s.prop);
  put(s.dir);
  put(s.letter);
  put(s.idx);
  put(s.supp);
  put(s.nsupp);
  put(s.item);
  put(s.qeq);
  put(s.acc0);
  put(s.acc1);
  return k;
}

std::string set_name(const Atra& a, StateSet s) {
  std::string out = "{";
  for (int q : members(s)) {
    if (out.size() > 1) out += ",";
    out += a.states()[static_cast<std::size_t>(q)];
  }
  return out + "}";
}

std::string quad_name(const Atra& a, const Quadruple& r) {
  std::string out = "(";
  for (std::size_t i = 0; i < 4; ++i) out += (i ? "," : "") + set_name(a, r.sets[i]);
  return out + ")";
}

}  // namespace

CompiledMachine::CompiledMachine(Atra a, Mode mode, StateSet q2) : a_(std::move(a)), mode_(mode), q2_(q2) {
  a_.validate();
  std::lock_guard lock(mu_);
  counter_names_ = {"zero", "sink"};
  intern_support({});
  State s;
  s.phase = kStart;
  s.root = true;
  initial_ = intern(s);
}

StateId CompiledMachine::intern(const State& s) const {
  auto [it, fresh] = state_index_.try_emplace(key_of(s), static_cast<StateId>(states_.size()));
  if (fresh) states_.push_back(s);
  return it->second;
}

std::uint32_t CompiledMachine::intern_support(std::vector<StateSet> supp) const {
  std::sort(supp.begin(), supp.end());
  supp.erase(std::unique(supp.begin(), supp.end()), supp.end());
  auto [it, fresh] = support_index_.try_emplace(supp, static_cast<std::uint32_t>(supports_.size()));
  if (fresh) supports_.push_back(std::move(supp));
  return it->second;
}

Counter CompiledMachine::bundle_counter(StateSet s) const {
  std::lock_guard lock(mu_);
  auto [it, fresh] = bundle_counters_.try_emplace(s, static_cast<Counter>(counter_names_.size()));
  if (fresh) counter_names_.push_back("c" + set_name(a_, s));
  return it->second;
}

Counter CompiledMachine::quad_counter(const Quadruple& q) const {
  auto [it, fresh] = quad_counters_.try_emplace(q, static_cast<Counter>(counter_names_.size()));
  if (fresh) counter_names_.push_back("c'" + quad_name(a_, q));
  return it->second;
}

const std::vector<Quadruple>& CompiledMachine::quads(Letter letter, StateSet s, bool eq) const {
  auto key = std::make_tuple(letter, s, eq);
  auto it = quad_cache_.find(key);
  if (it == quad_cache_.end()) it = quad_cache_.emplace(key, covering_quadruples(a_, letter, s, eq)).first;
  return it->second;
}

const std::vector<Quadruple>& CompiledMachine::cells(Letter letter, std::uint32_t supp) const {
  auto key = std::make_pair(letter, supp);
  auto it = cell_cache_.find(key);
  if (it != cell_cache_.end()) return it->second;
  std::vector<Quadruple> out;
  for (StateSet s : supports_[supp]) {
    const auto& qs = quads(letter, s, false);
    out.insert(out.end(), qs.begin(), qs.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return cell_cache_.emplace(key, std::move(out)).first->second;
}

bool CompiledMachine::is_final(StateId q) const {
  std::lock_guard lock(mu_);
  return states_[q].phase == kFinal;
}

bool CompiledMachine::prop(StateId q) const {
  std::lock_guard lock(mu_);
  return states_[q].prop;
}

std::size_t CompiledMachine::materialized_states() const {
  std::lock_guard lock(mu_);
  return states_.size();
}

std::string CompiledMachine::counter_name(Counter c) const {
  std::lock_guard lock(mu_);
  return c < counter_names_.size() ? counter_names_[c] : "c" + std::to_string(c);
}

std::string CompiledMachine::state_name(StateId q) const {
  std::lock_guard lock(mu_);
  const State& s = states_[q];
  std::string out = kPhaseNames[s.phase];
  if (s.root) out += "/root";
  if (s.prop) out += "/prop";
  if (s.phase != kStart && s.phase != kFinal && s.phase < kProp) out += "/" + a_.alphabet()[static_cast<std::size_t>(s.letter)];
  if (s.phase == kPos || s.phase == kIncAcc || s.phase == kMove) out += "/d" + std::to_string(s.dir);
  out += "/" + std::to_string(s.idx);
  out += "/s" + std::to_string(s.supp) + "/n" + std::to_string(s.nsupp);
  if (s.acc0 || s.acc1) out += "/" + set_name(a_, s.acc0) + set_name(a_, s.acc1);
  return out;
}

const std::vector<Transition>& CompiledMachine::transitions(StateId q) const {
  std::lock_guard lock(mu_);
  auto it = delta_.find(q);
  if (it != delta_.end()) return it->second;
  State s = states_[q];
  return delta_.emplace(q, generate(s)).first->second;
}

CompiledMachine::State CompiledMachine::loop_state(Letter letter, std::uint32_t idx, StateSet acc0, StateSet acc1,
                                                   std::uint32_t supp, bool prop) const {
  State s;
  s.phase = kLoop;
  s.letter = letter;
  s.idx = idx;
  s.acc0 = acc0;
  s.acc1 = acc1;
  s.supp = supp;
  s.prop = prop;
  return s;
}

CompiledMachine::State CompiledMachine::pos_state(Letter letter, int dir, std::uint32_t idx, StateSet acc,
                                                  std::uint32_t supp, bool prop) const {
  State s;
  s.phase = idx < cells(letter, supp).size() ? kPos : kIncAcc;
  s.letter = letter;
  s.dir = static_cast<std::uint8_t>(dir);
  s.idx = s.phase == kPos ? idx : 0;
  s.acc0 = acc;
  s.supp = supp;
  s.prop = prop;
  return s;
}

CompiledMachine::State CompiledMachine::move_state(Letter letter, int dir, std::uint32_t idx, std::uint32_t supp,
                                                   std::uint32_t nsupp, bool prop) const {
  if (idx >= cells(letter, supp).size()) return prop_state(nsupp, prop);
  State s;
  s.phase = kMove;
  s.letter = letter;
  s.dir = static_cast<std::uint8_t>(dir);
  s.idx = idx;
  s.supp = supp;
  s.nsupp = nsupp;
  s.prop = prop;
  return s;
}

CompiledMachine::State CompiledMachine::prop_state(std::uint32_t nsupp, bool prop) const {
  State s;
  s.phase = kFin;
  s.nsupp = nsupp;
  s.prop = prop;
  if (mode_ == Mode::Finite || prop) return s;
  bool meets = std::any_of(supports_[nsupp].begin(), supports_[nsupp].end(),
                           [&](StateSet x) { return (x & q2_) != 0; });
  if (!meets) {
    s.prop = true;
    return s;
  }
  s.phase = kProp;
  return s;
}

std::vector<Transition> CompiledMachine::generate(const State& s) const {
  std::vector<Transition> out;
  auto eps = [&](Instruction l, const State& to) { out.push_back({std::nullopt, std::move(l), intern(to), 0}); };
  switch (s.phase) {
    case kStart:
      for (Letter a = 0; a < a_.num_letters(); ++a) {
        if (s.root) {
          for (const auto& u : quads(a, singleton(a_.initial()), true))
            eps(nop(), loop_state(a, 0, u.store(0) | u.keep(0), u.store(1) | u.keep(1), s.supp, s.prop));
          continue;
        }
        eps(nop(), loop_state(a, 0, 0, 0, s.supp, s.prop));
        for (StateSet q_eq : supports_[s.supp])
          for (const auto& u : quads(a, q_eq, true))
            eps(Instruction::dec(bundle_counter(q_eq)),
                loop_state(a, 0, u.store(0) | u.keep(0), u.store(1) | u.keep(1), s.supp, s.prop));
      }
      break;
    case kLoop: {
      const auto& supp = supports_[s.supp];
      if (s.idx == supp.size()) {
        Transition t{s.letter, nop(), 0, 0};
        for (int d = 0; d < 2; ++d) {
          StateSet acc = d == 0 ? s.acc0 : s.acc1;
          State child;
          if (mode_ == Mode::Inclusion) {
            child = pos_state(s.letter, d, 0, acc, s.supp, s.prop);
          } else {
            child.phase = kIncAcc;
            child.letter = s.letter;
            child.dir = static_cast<std::uint8_t>(d);
            child.acc0 = acc;
            child.supp = s.supp;
            child.prop = s.prop;
          }
          (d == 0 ? t.to0 : t.to1) = intern(child);
        }
        out.push_back(std::move(t));
        break;
      }
      StateSet x = supp[s.idx];
      const auto& qs = quads(s.letter, x, false);
      State next = loop_state(s.letter, s.idx + 1, s.acc0, s.acc1, s.supp, s.prop);
      if (mode_ == Mode::Inclusion) {
        std::vector<Counter> targets;
        for (const auto& u : qs) targets.push_back(quad_counter(u));
        std::sort(targets.begin(), targets.end());
        eps(Instruction::transfer(bundle_counter(x), targets), next);
        break;
      }
      eps(Instruction::ifz(bundle_counter(x)), next);
      for (std::uint32_t k = 0; k < qs.size(); ++k) {
        State inc = s;
        inc.phase = kIncQuad;
        inc.item = k;
        eps(Instruction::dec(bundle_counter(x)), inc);
      }
      break;
    }
    case kIncQuad: {
      const auto& u = quads(s.letter, supports_[s.supp][s.idx], false)[s.item];
      eps(Instruction::inc(quad_counter(u)),
          loop_state(s.letter, s.idx, s.acc0 | u.store(0), s.acc1 | u.store(1), s.supp, s.prop));
      break;
    }
    case kPos: {
      const auto& u = cells(s.letter, s.supp)[s.idx];
      StateSet st = u.store(s.dir);
      if (subset_of(st, s.acc0)) {
        eps(nop(), pos_state(s.letter, s.dir, s.idx + 1, s.acc0, s.supp, s.prop));
        break;
      }
      eps(zero_test(quad_counter(u)), pos_state(s.letter, s.dir, s.idx + 1, s.acc0, s.supp, s.prop));
      eps(nop(), pos_state(s.letter, s.dir, s.idx + 1, s.acc0 | st, s.supp, s.prop));
      break;
    }
    case kIncAcc: {
      std::vector<StateSet> next;
      if (s.acc0 != 0) next.push_back(s.acc0);
      for (const auto& u : cells(s.letter, s.supp))
        if (u.keep(s.dir) != 0) next.push_back(u.keep(s.dir));
      std::uint32_t nsupp = intern_support(std::move(next));
      eps(s.acc0 != 0 ? Instruction::inc(bundle_counter(s.acc0)) : nop(),
          move_state(s.letter, s.dir, 0, s.supp, nsupp, s.prop));
      break;
    }
    case kMove: {
      const auto& u = cells(s.letter, s.supp)[s.idx];
      StateSet k = u.keep(s.dir);
      eps(Instruction::transfer(quad_counter(u), {k != 0 ? bundle_counter(k) : kSink}),
          move_state(s.letter, s.dir, s.idx + 1, s.supp, s.nsupp, s.prop));
      break;
    }
    case kProp:
    case kPropZero: {
      std::vector<StateSet> hit;
      for (StateSet x : supports_[s.nsupp])
        if ((x & q2_) != 0) hit.push_back(x);
      State fin;
      fin.phase = kFin;
      fin.nsupp = s.nsupp;
      if (s.phase == kProp) eps(nop(), fin);
      fin.prop = true;
      State chain = s;
      chain.phase = kPropZero;
      chain.idx = s.phase == kProp ? 1 : s.idx + 1;
      eps(zero_test(bundle_counter(hit[s.phase == kProp ? 0 : s.idx])), chain.idx < hit.size() ? chain : fin);
      break;
    }
    case kFin:
    case kFinZero: {
      std::vector<StateSet> open;
      for (StateSet x : supports_[s.nsupp])
        if (!subset_of(x, a_.finals())) open.push_back(x);
      State fin;
      fin.phase = kFinal;
      if (s.phase == kFin) {
        State start;
        start.phase = kStart;
        start.supp = s.nsupp;
        start.prop = s.prop;
        eps(nop(), start);
        if (open.empty()) {
          eps(nop(), fin);
          break;
        }
      }
      State chain;
      chain.phase = kFinZero;
      chain.nsupp = s.nsupp;
      chain.idx = s.phase == kFin ? 1 : s.idx + 1;
      eps(zero_test(bundle_counter(open[s.phase == kFin ? 0 : s.idx])), chain.idx < open.size() ? chain : fin);
      break;
    }
    default:
      break;
  }
  return out;
}

std::unique_ptr<CompiledMachine> compile_finite(const Atra& a) {
  return std::make_unique<CompiledMachine>(a, CompiledMachine::Mode::Finite);
}

std::unique_ptr<CompiledMachine> compile_inclusion(const ProductAtra& p) {
  return std::make_unique<CompiledMachine>(p.atra, CompiledMachine::Mode::Inclusion, p.q2);
}

}  // namespace dtsat
