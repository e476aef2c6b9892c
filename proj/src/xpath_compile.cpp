#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "dtsat/xpath.hpp"

namespace dtsat {

namespace {

Formula left(int q) { return Formula::atom(q, 0, Update::Keep); }
Formula right(int q) { return Formula::atom(q, 1, Update::Keep); }

class Builder {
 public:
  explicit Builder(const XmlSignature& sig) : sig_(sig) {}

  int state(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<int>(names_.size()) - 1;
  }
  // eq < 0 sets both register outcomes
  void on(int q, Letter x, Formula f, int eq = -1) { entries_.push_back({q, x, eq, std::move(f)}); }
  void on_types(int q, const Formula& f) {
    for (Letter x = 0; x < static_cast<Letter>(sig_.types.size()); ++x) on(q, x, f);
  }
  void on_attributes(int q, const Formula& f, std::initializer_list<Letter> except = {}) {
    const Letter first = static_cast<Letter>(sig_.types.size());
    for (Letter x = first; x < first + static_cast<Letter>(sig_.attributes.size()); ++x)
      if (std::find(except.begin(), except.end(), x) == except.end()) on(q, x, f);
  }

  Atra build(int initial = 0) const {
    Atra a(sig_.alphabet(), names_, initial, 0);
    for (const auto& e : entries_) {
      if (e.eq != 0) a.set_delta(e.q, e.x, true, e.f);
      if (e.eq != 1) a.set_delta(e.q, e.x, false, e.f);
    }
    return a;
  }

 private:
  struct Entry {
    int q;
    Letter x;
    int eq;
    Formula f;
  };
  const XmlSignature& sig_;
  std::vector<std::string> names_;
  std::vector<Entry> entries_;
};

// Keeps the states reachable from the initial one; `formula(v, x, eq)` gives
// the transitions of virtual state v.
template <class F>
Atra restrict_reachable(const Alphabet& alphabet, const std::vector<std::string>& names, StateSet finals_lo,
                        StateSet finals_hi, int initial, F formula) {
  const int n = static_cast<int>(names.size());
  const int letters = static_cast<int>(alphabet.size());
  auto is_final = [&](int v) { return v < 64 ? contains(finals_lo, v) : contains(finals_hi, v - 64); };
  std::vector<int> map(static_cast<std::size_t>(n), -1);
  std::vector<int> order{initial};
  map[static_cast<std::size_t>(initial)] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter x = 0; x < letters; ++x)
      for (bool eq : {false, true})
        formula(order[i], x, eq).for_each_atom([&](int q, int, Update) {
          if (map[static_cast<std::size_t>(q)] < 0) {
            map[static_cast<std::size_t>(q)] = static_cast<int>(order.size());
            order.push_back(q);
          }
        });
  if (order.size() > static_cast<std::size_t>(kMaxStates))
    throw ValidationError("query automaton exceeds " + std::to_string(kMaxStates) + " states");
  std::vector<std::string> out_names;
  std::map<std::string, int> seen;
  StateSet finals = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::string nm = names[static_cast<std::size_t>(order[i])];
    if (int k = seen[nm]++; k > 0) nm += "#" + std::to_string(k);
    out_names.push_back(nm);
    if (is_final(order[i])) finals |= singleton(static_cast<int>(i));
  }
  Atra r(alphabet, out_names, 0, finals);
  auto rename = [&](int q) { return map[static_cast<std::size_t>(q)]; };
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter x = 0; x < letters; ++x)
      for (bool eq : {false, true})
        r.set_delta(static_cast<int>(i), x, eq, formula(order[i], x, eq).map_states(rename));
  return r;
}

Atra trim(const Atra& a) {
  return restrict_reachable(a.alphabet(), a.states(), a.finals(), 0, a.initial(),
                            [&](int q, Letter x, bool eq) { return a.delta(q, x, eq); });
}

Atra map_holes(const Atra& a, const Formula& by) {
  Atra r = a;
  for (int q = 0; q < a.num_states(); ++q)
    for (Letter x = 0; x < a.num_letters(); ++x)
      for (bool eq : {false, true}) r.set_delta(q, x, eq, a.delta(q, x, eq).replace_hole(by));
  return r;
}

Atra self_automaton(const XmlSignature& sig) {
  Builder b(sig);
  int q0 = b.state("self");
  b.on_types(q0, Formula::hole());
  return b.build();
}

Atra child_automaton(const XmlSignature& sig) {
  Builder b(sig);
  int q0 = b.state("child");
  int kid = b.state("child.at");
  int chain = b.state("child.chain");
  b.on_types(q0, left(kid));
  b.on_attributes(kid, left(kid));
  b.on_types(kid, Formula::disj({Formula::hole(), left(chain), right(kid)}));
  b.on_attributes(chain, Formula::disj(left(chain), right(kid)));
  return b.build();
}

Atra next_sibling_automaton(const XmlSignature& sig) {
  Builder b(sig);
  int q0 = b.state("next");
  int chain = b.state("next.chain");
  int at = b.state("next.at");
  b.on_types(q0, Formula::disj(right(at), left(chain)));
  b.on_attributes(chain, Formula::disj(left(chain), right(at)));
  b.on_types(at, Formula::hole());
  return b.build();
}

Atra child_star_automaton(const XmlSignature& sig) {
  Builder b(sig);
  int q0 = b.state("desc");
  int down = b.state("desc.at");
  int chain = b.state("desc.chain");
  b.on_types(q0, Formula::disj(Formula::hole(), left(down)));
  b.on_attributes(down, left(down));
  b.on_types(down, Formula::disj({Formula::hole(), left(down), left(chain), right(down)}));
  b.on_attributes(chain, Formula::disj(left(chain), right(down)));
  return b.build();
}

Atra next_sibling_star_automaton(const XmlSignature& sig) {
  Builder b(sig);
  int q0 = b.state("following");
  int chain = b.state("following.chain");
  b.on_types(q0, Formula::disj({Formula::hole(), right(q0), left(chain)}));
  b.on_attributes(chain, Formula::disj(left(chain), right(q0)));
  return b.build();
}

// Finds attribute a2 on the chain of the current Σ-node and tests its datum
// against the register.
Atra attribute_test(const XmlSignature& sig, Letter a2, bool eq) {
  Builder b(sig);
  int q0 = b.state("cmp.find");
  int walk = b.state("cmp.find.chain");
  b.on_types(q0, left(walk));
  b.on_attributes(walk, left(walk), {a2});
  b.on(walk, a2, Formula::top(), eq ? 1 : 0);
  return b.build();
}

Atra compile_cmp(const Qualifier& u, const XmlSignature& sig) {
  const Letter a1 = sig.attribute_letter(u.attr1);
  const Letter a2 = sig.attribute_letter(u.attr2);
  const bool eq = u.relation == Qualifier::Relation::Eq;
  Builder b(sig);
  int q0 = b.state("cmp");
  int walk = b.state("cmp.chain");
  b.on_types(q0, left(walk));
  if (u.head == Qualifier::Head::Self) {
    if (a1 == a2) {
      b.on_attributes(walk, left(walk), {a1});
      if (eq) b.on(walk, a1, Formula::top());
      return b.build();
    }
    int want2 = b.state("cmp.want2");
    int want1 = b.state("cmp.want1");
    b.on_attributes(walk, left(walk), {a1, a2});
    b.on(walk, a1, Formula::atom(want2, 0, Update::Store));
    b.on(walk, a2, Formula::atom(want1, 0, Update::Store));
    b.on_attributes(want2, left(want2), {a2});
    b.on(want2, a2, Formula::top(), eq ? 1 : 0);
    b.on_attributes(want1, left(want1), {a1});
    b.on(want1, a1, Formula::top(), eq ? 1 : 0);
    return b.build();
  }
  b.on_attributes(walk, left(walk), {a1});
  if (u.head == Qualifier::Head::Child) {
    int kid = b.state("cmp.child");
    int chain = b.state("cmp.child.chain");
    b.on(walk, a1, Formula::atom(kid, 0, Update::Store));
    b.on_attributes(kid, left(kid));
    b.on_types(kid, Formula::disj({Formula::hole(), left(chain), right(kid)}));
    b.on_attributes(chain, Formula::disj(left(chain), right(kid)));
  } else {
    int rest = b.state("cmp.next.chain");
    int at = b.state("cmp.next");
    b.on(walk, a1, Formula::disj(Formula::atom(rest, 0, Update::Store), Formula::atom(at, 1, Update::Store)));
    b.on_attributes(rest, Formula::disj(left(rest), right(at)));
    b.on_types(at, Formula::hole());
  }
  Atra tail = substitute(compile_query(*u.query, sig), attribute_test(sig, a2, eq));
  return substitute(b.build(), tail);
}

}  // namespace

Atra substitute(const Atra& b, const Atra& a) {
  if (a.alphabet() != b.alphabet()) throw ValidationError("substitute: alphabet mismatch");
  const int nb = b.num_states();
  std::vector<std::string> names = b.states();
  names.insert(names.end(), a.states().begin(), a.states().end());
  auto shift = [nb](int q) { return q + nb; };
  StateSet lo = b.finals(), hi = 0;
  for (int q : members(a.finals())) {
    int v = q + nb;
    if (v < 64)
      lo |= singleton(v);
    else
      hi |= singleton(v - 64);
  }
  return restrict_reachable(b.alphabet(), names, lo, hi, b.initial(), [&](int v, Letter x, bool eq) {
    if (v < nb) {
      const Formula& f = b.delta(v, x, eq);
      return f.has_hole() ? f.replace_hole(a.delta(a.initial(), x, eq).map_states(shift)) : f;
    }
    return a.delta(v - nb, x, eq).map_states(shift);
  });
}

bool hole_invariant(const Atra& b) {
  const int n = b.num_states();
  // (state, a store atom was used) reachability
  std::vector<std::array<bool, 2>> seen(static_cast<std::size_t>(n), {false, false});
  std::vector<std::pair<int, int>> stack{{b.initial(), 0}};
  seen[static_cast<std::size_t>(b.initial())][0] = true;
  while (!stack.empty()) {
    auto [q, used] = stack.back();
    stack.pop_back();
    for (Letter x = 0; x < b.num_letters(); ++x)
      for (bool eq : {false, true}) {
        const Formula& f = b.delta(q, x, eq);
        if (used && f.has_hole()) return false;
        f.for_each_atom([&](int r, int, Update u) {
          int nu = used || u == Update::Store ? 1 : 0;
          if (!seen[static_cast<std::size_t>(r)][static_cast<std::size_t>(nu)]) {
            seen[static_cast<std::size_t>(r)][static_cast<std::size_t>(nu)] = true;
            stack.emplace_back(r, nu);
          }
        });
      }
  }
  return true;
}

void validate_query_automaton(const Atra& b) {
  b.validate(true);
  if (!hole_invariant(b)) throw ValidationError("a hole is reachable through a store atom");
}

Atra compile_query(const Query& q, const XmlSignature& sig) {
  using K = Query::Kind;
  switch (q.kind) {
    case K::Self: return self_automaton(sig);
    case K::Child: return child_automaton(sig);
    case K::NextSib: return next_sibling_automaton(sig);
    case K::ChildStar: return child_star_automaton(sig);
    case K::NextSibStar: return next_sibling_star_automaton(sig);
    case K::Concat: return substitute(compile_query(*q.lhs, sig), compile_query(*q.rhs, sig));
    case K::Union: return trim(union_(compile_query(*q.lhs, sig), compile_query(*q.rhs, sig)));
    case K::Filter:
      return substitute(compile_query(*q.lhs, sig),
                        trim(intersect(self_automaton(sig), compile_qualifier(*q.qual, sig))));
  }
  throw ValidationError("unknown query node");
}

Atra compile_qualifier(const Qualifier& u, const XmlSignature& sig) {
  using K = Qualifier::Kind;
  switch (u.kind) {
    case K::Not: return dualize(compile_qualifier(*u.lhs, sig));
    case K::And: return trim(intersect(compile_qualifier(*u.lhs, sig), compile_qualifier(*u.rhs, sig)));
    case K::Exists: return map_holes(compile_query(*u.query, sig), Formula::top());
    case K::Type: {
      Builder b(sig);
      int q0 = b.state("type." + u.type);
      b.on(q0, sig.type_letter(u.type), Formula::top());
      return b.build();
    }
    case K::AttrCmp: return compile_cmp(u, sig);
  }
  throw ValidationError("unknown qualifier node");
}

}  // namespace dtsat
