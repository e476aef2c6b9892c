#pragma once

#include <functional>
#include <random>
#include <vector>

#include "dtsat/atra.hpp"
#include "dtsat/tree.hpp"

namespace testing_support {

using dtsat::Alphabet;
using dtsat::DataTree;
using dtsat::Datum;
using dtsat::Letter;

/// Preorder shapes of full binary trees: true marks a nonleaf node.
inline std::vector<std::vector<bool>> shapes(int nonleaf) {
  if (nonleaf == 0) return {{false}};
  std::vector<std::vector<bool>> out;
  for (int left = 0; left < nonleaf; ++left) {
    for (const auto& l : shapes(left)) {
      for (const auto& r : shapes(nonleaf - 1 - left)) {
        std::vector<bool> s{true};
        s.insert(s.end(), l.begin(), l.end());
        s.insert(s.end(), r.begin(), r.end());
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

inline DataTree build(const Alphabet& sigma, const std::vector<bool>& shape, const std::vector<Letter>& letters,
                      const std::vector<Datum>& data) {
  DataTree t(sigma);
  std::size_t pos = 0, lab = 0;
  std::function<void(int)> go = [&](int n) {
    if (!shape[pos++]) return;
    t.expand(n, letters[lab], data[lab]);
    ++lab;
    int l = t.node(n).child[0], r = t.node(n).child[1];
    go(l);
    go(r);
  };
  go(0);
  return t;
}

/// Every data tree with 1..max_nonleaf nonleaf nodes, letters from sigma and
/// data from {1..data_pool}. Data labellings are restricted to restricted-growth
/// sequences (one representative per renaming class).
inline void for_each_tree(const Alphabet& sigma, int max_nonleaf, int data_pool,
                          const std::function<void(const DataTree&)>& f) {
  const int nl = static_cast<int>(sigma.size());
  for (int n = 1; n <= max_nonleaf; ++n) {
    for (const auto& shape : shapes(n)) {
      std::vector<Letter> letters(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<Datum> data(static_cast<std::size_t>(n), 1);
        std::function<void(int, Datum)> rg = [&](int i, Datum maxd) {
          if (i == n) {
            f(build(sigma, shape, letters, data));
            return;
          }
          for (Datum d = 1; d <= std::min<Datum>(maxd + 1, static_cast<Datum>(data_pool)); ++d) {
            data[static_cast<std::size_t>(i)] = d;
            rg(i + 1, std::max(maxd, d));
          }
        };
        rg(0, 0);
        int i = 0;
        while (i < n && ++letters[static_cast<std::size_t>(i)] == nl) letters[static_cast<std::size_t>(i++)] = 0;
        if (i == n) break;
      }
    }
  }
}

/// Random automaton over `sigma` with `nstates` states and formulas of bounded depth.
inline dtsat::Atra random_atra(std::mt19937& rng, const Alphabet& sigma, int nstates, int depth = 2) {
  using dtsat::Formula;
  std::vector<std::string> names;
  for (int i = 0; i < nstates; ++i) names.push_back("s" + std::to_string(i));
  std::uniform_int_distribution<int> coin(0, 99);
  dtsat::StateSet finals = 0;
  for (int i = 0; i < nstates; ++i)
    if (coin(rng) < 50) finals |= dtsat::singleton(i);
  dtsat::Atra a(sigma, names, 0, finals);
  std::function<Formula(int)> gen = [&](int d) -> Formula {
    int r = coin(rng);
    if (d == 0 || r < 40) {
      if (r % 10 == 0) return Formula::top();
      if (r % 10 == 1) return Formula::bottom();
      return Formula::atom(coin(rng) % nstates, coin(rng) % 2,
                           coin(rng) % 2 ? dtsat::Update::Store : dtsat::Update::Keep);
    }
    return r < 70 ? Formula::conj(gen(d - 1), gen(d - 1)) : Formula::disj(gen(d - 1), gen(d - 1));
  };
  for (int q = 0; q < nstates; ++q)
    for (Letter l = 0; l < static_cast<Letter>(sigma.size()); ++l)
      for (bool eq : {false, true}) a.set_delta(q, l, eq, gen(depth));
  return a;
}

}  // namespace testing_support

namespace testing_support {

/// Five hand-written automata over {b1, *} used by several suites.
inline std::vector<dtsat::Atra> corpus() {
  using dtsat::Formula;
  using dtsat::Update;
  Alphabet sigma = dtsat::bk_alphabet(1);
  std::vector<dtsat::Atra> out{dtsat::make_bk(1, 1), dtsat::universal_automaton(sigma),
                               dtsat::empty_automaton(sigma)};
  // the root datum reappears on the left spine
  dtsat::Atra again(sigma, {"start", "seek", "done"}, 0, dtsat::singleton(2));
  for (Letter l = 0; l < 2; ++l) {
    again.set_delta(0, l, Formula::conj(Formula::atom(1, 0, Update::Keep), Formula::atom(2, 1, Update::Keep)));
    again.set_delta(1, l, true, Formula::top());
    again.set_delta(1, l, false, Formula::atom(1, 0, Update::Keep));
    again.set_delta(2, l, Formula::conj(Formula::atom(2, 0, Update::Keep), Formula::atom(2, 1, Update::Keep)));
  }
  out.push_back(again);
  // every b1 node differs from its parent; * nodes end the check
  dtsat::Atra fresh(sigma, {"root", "child"}, 0, dtsat::singleton(1));
  Letter b1 = 0, star = 1;
  Formula down = Formula::conj(Formula::atom(1, 0, Update::Store), Formula::atom(1, 1, Update::Store));
  fresh.set_delta(0, b1, down);
  fresh.set_delta(0, star, Formula::top());
  fresh.set_delta(1, b1, false, down);
  fresh.set_delta(1, star, Formula::disj(Formula::atom(1, 0, Update::Keep), Formula::atom(1, 1, Update::Keep)));
  out.push_back(fresh);
  return out;
}

/// The corpus plus three random 3-state automata.
inline std::vector<dtsat::Atra> extended_corpus() {
  auto out = corpus();
  std::mt19937 rng(2024);
  for (int i = 0; i < 3; ++i) out.push_back(random_atra(rng, dtsat::bk_alphabet(1), 3));
  return out;
}

}  // namespace testing_support

namespace testing_support {

/// Parses terms like "a:1(.,b:2(.,.))"; "." is a leaf.
inline DataTree term(const Alphabet& sigma, const std::string& s) {
  DataTree t(sigma);
  std::size_t pos = 0;
  std::function<void(int)> go = [&](int n) {
    if (s[pos] == '.') {
      ++pos;
      return;
    }
    std::size_t colon = s.find(':', pos);
    std::string name = s.substr(pos, colon - pos);
    std::size_t open = s.find('(', colon);
    Datum d = std::stoull(s.substr(colon + 1, open - colon - 1));
    t.expand(n, dtsat::letter_index(sigma, name), d);
    pos = open + 1;
    go(t.node(n).child[0]);
    ++pos;  // ','
    go(t.node(n).child[1]);
    ++pos;  // ')'
  };
  go(0);
  return t;
}

/// A B2 tree with four b2 nodes: root, its left child n1 and the two b2
/// children of n1's * child. Each b1 subtree holds the data it must cover.
inline DataTree b2_witness() {
  return term(dtsat::bk_alphabet(2),
              "b2:10(b2:1(*:99(b2:2(.,b1:1(b1:20(.,.),.)),b2:3(.,b1:1(b1:21(.,.),.))),b1:30(b1:31(.,.),.)),.)");
}

/// A b2-chain of length three below the root. The b1 subtree under the last
/// chain node starts with a fresh datum, so it can cover only one ancestor.
inline DataTree b2_chain3(bool reuse_root_datum) {
  std::string last = reuse_root_datum ? "b1:1(b1:2(.,.),.)" : "b1:40(b1:2(.,.),.)";
  return term(dtsat::bk_alphabet(2),
              "b2:10(b2:1(*:99(b2:2(*:98(b2:4(.," + last + "),b2:5(.," + last + ")),b1:1(b1:20(.,.),.)),"
              "b2:3(.,b1:1(b1:21(.,.),.))),b1:30(b1:31(.,.),.)),.)");
}

}  // namespace testing_support

#include "dtsat/counter.hpp"

namespace testing_support {

/// Random machine with counters 1..k. With `acyclic_eps`, ε-transitions only
/// go to states of higher index.
inline dtsat::ExplicitMachine random_machine(std::mt19937& rng, const Alphabet& sigma, int nstates, std::uint32_t k,
                                             int ntrans, bool acyclic_eps = true, bool with_ifz = true,
                                             bool with_transfer = true) {
  using dtsat::Instruction;
  std::uniform_int_distribution<int> coin(0, 99);
  std::vector<std::string> names;
  std::vector<dtsat::StateId> finals;
  for (int i = 0; i < nstates; ++i) {
    names.push_back("s" + std::to_string(i));
    if (coin(rng) < 35) finals.push_back(static_cast<dtsat::StateId>(i));
  }
  dtsat::ExplicitMachine m(sigma, names, 0, finals, k);
  auto counter = [&] { return static_cast<dtsat::Counter>(1 + coin(rng) % static_cast<int>(k)); };
  for (int i = 0; i < ntrans; ++i) {
    auto from = static_cast<dtsat::StateId>(coin(rng) % nstates);
    Instruction l;
    int kind = coin(rng) % 4;
    if (kind == 2 && !with_ifz) kind = 0;
    if (kind == 3 && !with_transfer) kind = 1;
    if (kind == 0) l = Instruction::inc(counter());
    if (kind == 1) l = Instruction::dec(counter());
    if (kind == 2) l = Instruction::ifz(counter());
    if (kind == 3) {
      std::vector<dtsat::Counter> to;
      for (dtsat::Counter c = 1; c <= k; ++c)
        if (coin(rng) < 50) to.push_back(c);
      l = Instruction::transfer(counter(), to);
    }
    if (coin(rng) < 30) {
      if (acyclic_eps && static_cast<int>(from) == nstates - 1) continue;
      int lo = acyclic_eps ? static_cast<int>(from) + 1 : 0;
      auto to = static_cast<dtsat::StateId>(lo + coin(rng) % (nstates - lo));
      m.add(from, std::nullopt, l, to);
    } else {
      m.add(from, static_cast<Letter>(coin(rng) % static_cast<int>(sigma.size())), l,
            static_cast<dtsat::StateId>(coin(rng) % nstates), static_cast<dtsat::StateId>(coin(rng) % nstates));
    }
  }
  return m;
}

}  // namespace testing_support
