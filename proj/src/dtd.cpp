#include <algorithm>
#include <map>

#include "dtsat/xpath.hpp"

namespace dtsat {

Dtd::Dtd(XmlSignature sig, std::vector<std::string> states, int initial, std::vector<int> finals,
         std::vector<Rule> rules)
    : sig_(std::move(sig)), states_(std::move(states)), initial_(initial), rules_(std::move(rules)) {
  const int n = num_states();
  const int letters = static_cast<int>(sig_.alphabet().size());
  if (initial_ < 0 || initial_ >= n) throw ValidationError("DTD initial state out of range");
  finals_.assign(static_cast<std::size_t>(n), false);
  for (int f : finals) {
    if (f < 0 || f >= n) throw ValidationError("DTD final state out of range");
    finals_[static_cast<std::size_t>(f)] = true;
  }
  std::sort(rules_.begin(), rules_.end());
  rules_.erase(std::unique(rules_.begin(), rules_.end()), rules_.end());
  by_state_letter_.assign(static_cast<std::size_t>(n * letters), {});
  for (const auto& r : rules_) {
    if (r.from < 0 || r.from >= n || r.to0 < 0 || r.to0 >= n || r.to1 < 0 || r.to1 >= n)
      throw ValidationError("DTD rule state out of range");
    if (r.letter < 0 || r.letter >= letters) throw ValidationError("DTD rule letter out of range");
    by_state_letter_[static_cast<std::size_t>(r.from * letters + r.letter)].push_back(r);
  }
}

const std::vector<Dtd::Rule>& Dtd::rules(int q, Letter a) const {
  const int letters = static_cast<int>(sig_.types.size() + sig_.attributes.size());
  return by_state_letter_[static_cast<std::size_t>(q * letters + a)];
}

Dtd universal_dtd(const XmlSignature& sig) {
  std::vector<Dtd::Rule> rules;
  for (Letter x = 0; x < static_cast<Letter>(sig.alphabet().size()); ++x) rules.push_back({0, x, 0, 0});
  return Dtd(sig, {"any"}, 0, {0}, rules);
}

Dtd well_formedness_dtd(const XmlSignature& sig) {
  // slot, leaf, then after[i]: the next attribute must come after attribute i
  const int types = static_cast<int>(sig.types.size());
  const int atts = static_cast<int>(sig.attributes.size());
  std::vector<std::string> names{"slot", "leaf"};
  for (int i = -1; i < atts - 1; ++i) names.push_back(i < 0 ? "atts" : "atts>" + sig.attributes[static_cast<std::size_t>(i)]);
  auto after = [](int i) { return 3 + i; };
  std::vector<Dtd::Rule> rules;
  for (Letter x = 0; x < types; ++x) {
    rules.push_back({0, x, 0, 0});
    if (atts > 0) rules.push_back({0, x, after(-1), 1});
  }
  for (int i = -1; i < atts - 1; ++i)
    for (int j = i + 1; j < atts; ++j) {
      rules.push_back({after(i), types + j, 0, 0});
      if (j < atts - 1) rules.push_back({after(i), types + j, after(j), 1});
    }
  return Dtd(sig, names, 0, {0, 1}, rules);
}

Dtd intersect(const Dtd& a, const Dtd& b) {
  if (a.alphabet() != b.alphabet()) throw ValidationError("DTD alphabet mismatch");
  std::map<std::pair<int, int>, int> index;
  std::vector<std::pair<int, int>> states;
  auto intern = [&](int p, int q) {
    auto [it, fresh] = index.try_emplace({p, q}, static_cast<int>(states.size()));
    if (fresh) states.emplace_back(p, q);
    return it->second;
  };
  intern(a.initial(), b.initial());
  std::vector<Dtd::Rule> rules;
  const Letter letters = static_cast<Letter>(a.alphabet().size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [p, q] = states[i];
    for (Letter x = 0; x < letters; ++x)
      for (const auto& r : a.rules(p, x))
        for (const auto& s : b.rules(q, x)) {
          int t0 = intern(r.to0, s.to0);
          int t1 = intern(r.to1, s.to1);
          rules.push_back({static_cast<int>(i), x, t0, t1});
        }
  }
  std::vector<std::string> names;
  std::vector<int> finals;
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [p, q] = states[i];
    names.push_back("(" + a.states()[static_cast<std::size_t>(p)] + "," + b.states()[static_cast<std::size_t>(q)] + ")");
    if (a.is_final(p) && b.is_final(q)) finals.push_back(static_cast<int>(i));
  }
  return Dtd(a.signature(), names, 0, finals, rules);
}

bool dtd_accepts(const Dtd& d, const DataTree& t) {
  if (t.alphabet() != d.alphabet()) throw ValidationError("DTD alphabet mismatch");
  const int n = d.num_states();
  // states accepting the subtree, bottom-up
  std::vector<std::vector<bool>> ok(static_cast<std::size_t>(t.size()));
  auto nodes = t.nonleaf_nodes();
  for (int v = 0; v < t.size(); ++v)
    if (t.node(v).is_leaf()) {
      ok[static_cast<std::size_t>(v)].assign(static_cast<std::size_t>(n), false);
      for (int q = 0; q < n; ++q) ok[static_cast<std::size_t>(v)][static_cast<std::size_t>(q)] = d.is_final(q);
    }
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const auto& nd = t.node(*it);
    auto& out = ok[static_cast<std::size_t>(*it)];
    out.assign(static_cast<std::size_t>(n), false);
    const auto& l = ok[static_cast<std::size_t>(nd.child[0])];
    const auto& r = ok[static_cast<std::size_t>(nd.child[1])];
    for (int q = 0; q < n; ++q)
      for (const auto& rule : d.rules(q, nd.letter))
        if (l[static_cast<std::size_t>(rule.to0)] && r[static_cast<std::size_t>(rule.to1)]) {
          out[static_cast<std::size_t>(q)] = true;
          break;
        }
  }
  return ok[0][static_cast<std::size_t>(d.initial())];
}

DtdProduct::DtdProduct(const Machine& m, Dtd d) : m_(m), d_(std::move(d)) {
  if (m.alphabet() != d_.alphabet()) throw ValidationError("DTD alphabet differs from the machine alphabet");
  initial_ = intern(m.initial(), d_.initial());
}

StateId DtdProduct::intern(StateId m, int d) const {
  std::lock_guard lock(mu_);
  const std::uint64_t key = (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint32_t>(d);
  auto [it, fresh] = index_.try_emplace(key, static_cast<StateId>(states_.size()));
  if (fresh) states_.emplace_back(m, d);
  return it->second;
}

bool DtdProduct::is_final(StateId q) const {
  std::unique_lock lock(mu_);
  auto [m, d] = states_.at(q);
  lock.unlock();
  return m_.is_final(m) && d_.is_final(d);
}

StateId DtdProduct::machine_state(StateId q) const {
  std::lock_guard lock(mu_);
  return states_.at(q).first;
}

int DtdProduct::dtd_state(StateId q) const {
  std::lock_guard lock(mu_);
  return states_.at(q).second;
}

const std::vector<Transition>& DtdProduct::transitions(StateId q) const {
  std::lock_guard lock(mu_);
  if (auto it = delta_.find(q); it != delta_.end()) return it->second;
  auto [m, d] = states_.at(q);
  std::vector<Transition> out;
  for (const auto& t : m_.transitions(m)) {
    if (!t.letter) {
      out.push_back({std::nullopt, t.instr, intern(t.to0, d), 0});
      continue;
    }
    for (const auto& r : d_.rules(d, *t.letter))
      out.push_back({t.letter, t.instr, intern(t.to0, r.to0), intern(t.to1, r.to1)});
  }
  return delta_.emplace(q, std::move(out)).first->second;
}

std::string DtdProduct::state_name(StateId q) const {
  std::unique_lock lock(mu_);
  auto [m, d] = states_.at(q);
  lock.unlock();
  return "(" + m_.state_name(m) + "," + d_.states()[static_cast<std::size_t>(d)] + ")";
}

std::unique_ptr<DtdProduct> product_with_dtd(const Machine& m, const Dtd& d) {
  return std::make_unique<DtdProduct>(m, d);
}

}  // namespace dtsat
