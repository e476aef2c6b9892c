#include <algorithm>
#include <deque>
#include <set>

#include "doctest.h"
#include "dtsat/abstraction.hpp"
#include "abstraction_support.hpp"
#include "support.hpp"

using namespace dtsat;
using namespace testing_support;
using testing_support::term;

namespace {

Formula keep(int q, int d) { return Formula::atom(q, d, Update::Keep); }

Configuration config(std::vector<std::pair<int, Datum>> ts) {
  Configuration g;
  for (auto [q, d] : ts) g.push_back({q, d});
  return normalize(std::move(g));
}

Atra dead_root() {
  Atra a(bk_alphabet(1), {"q"}, 0, singleton(0));
  return a;
}

}  // namespace

TEST_CASE("abstract") {
  CHECK(abstract({}).empty());
  auto v = abstract(config({{0, 1}, {1, 1}, {0, 2}}));
  CHECK(v == AbstractConfiguration{{singleton(0) | singleton(1), 1}, {singleton(0), 1}});
}

TEST_CASE("abstraction is invariant under renaming and separates orbits") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> state(0, 2);
  std::uniform_int_distribution<int> datum(1, 3);
  auto random_config = [&] {
    std::vector<std::pair<int, Datum>> ts;
    int n = std::uniform_int_distribution<int>(0, 4)(rng);
    for (int i = 0; i < n; ++i) ts.push_back({state(rng), static_cast<Datum>(datum(rng))});
    return config(ts);
  };
  for (int i = 0; i < 300; ++i) {
    auto g = random_config();
    std::vector<Datum> perm{1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    Configuration h;
    for (const auto& th : g) h.push_back({th.state, perm[th.datum - 1] + 10});
    CHECK(abstract(g) == abstract(normalize(h)));

    auto g2 = random_config();
    bool related = false;
    std::sort(perm.begin(), perm.end());
    do {
      Configuration r;
      for (const auto& th : g) r.push_back({th.state, perm[th.datum - 1]});
      if (normalize(r) == g2) related = true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(related == (abstract(g) == abstract(g2)));
  }
}

TEST_CASE("abstract_successors") {
  Atra a(Alphabet{"a"}, {"q", "r"}, 0, 0);
  a.set_delta(0, 0, true, keep(1, 0));
  CHECK(abstract_successors(a, {}, 0, 0) == std::vector<AbstractPair>{{{}, {}}});
  auto ws = abstract_successors(a, {{singleton(0), 1}}, 0, singleton(0));
  REQUIRE(ws.size() == 1);
  CHECK(ws[0].first == AbstractConfiguration{{singleton(1), 1}});
  CHECK(ws[0].second.empty());
  CHECK_THROWS_AS(abstract_successors(a, {}, 0, singleton(0)), ValidationError);
  CHECK(abstract_successors(a, {{singleton(0), 1}}, 0, 0).empty());
}

TEST_CASE("abstract transitions simulate concrete ones and back") {
  for (const auto& a : testing_support::extended_corpus()) {
    for (const auto& g : small_configs(a, 3, 3)) {
      for (Letter l = 0; l < a.num_letters(); ++l) {
        for (Datum e = 1; e <= 4; ++e) {
          StateSet q_eq = bundle(g, e);
          auto ws = abstract_successors(a, abstract(g), l, q_eq);
          // concrete steps are matched from below by a minimal abstract pair
          for (const auto& [h0, h1] : step(a, g, l, e)) {
            AbstractPair c{abstract(h0), abstract(h1)};
            bool below = std::any_of(ws.begin(), ws.end(), [&](const AbstractPair& w) { return pair_leq(w, c); });
            CHECK(below);
          }
          // every minimal abstract pair is realised by a valid concrete pair
          std::vector<std::pair<Configuration, Configuration>> raw;
          auto realised = concrete_pairs(a, g, l, e, &raw);
          for (const auto& w : ws) CHECK(realised.count(w) == 1);
          auto minimal = step(a, g, l, e);
          for (const auto& [h0, h1] : raw) {
            bool valid = std::any_of(minimal.begin(), minimal.end(), [&](const auto& p) {
              return std::includes(h0.begin(), h0.end(), p.first.begin(), p.first.end()) &&
                     std::includes(h1.begin(), h1.end(), p.second.begin(), p.second.end());
            });
            CHECK(valid);
          }
        }
      }
    }
  }
}

TEST_CASE("product_safety") {
  Alphabet sigma = bk_alphabet(1);
  auto b1 = make_bk(1, 1);
  auto p = product_safety(b1, empty_automaton(sigma));
  CHECK(p.atra.num_states() == 1 + b1.num_states() + 1);
  CHECK((p.q1 & p.q2) == 0);
  CHECK(!contains(p.q1 | p.q2, 0));
  StateSet f1 = b1.finals() << 1;
  CHECK(p.atra.finals() == (f1 | p.q2));
  for (Letter l = 0; l < 2; ++l)
    for (bool eq : {false, true})
      for (int q : members(p.q2)) CHECK(minimal_models(p.atra.delta(q, l, eq)) == std::vector<Quadruple>{Quadruple{}});
  CHECK_THROWS_AS(product_safety(b1, empty_automaton(Alphabet{"x"})), ValidationError);
}

TEST_CASE("finite nonemptiness of B1") {
  auto b1 = make_bk(1, 1);
  auto r = atra_nonempty_finite(b1);
  REQUIRE(r.verdict == Verdict::Sat);
  REQUIRE(r.witness);
  CHECK(r.certified);
  CHECK(has_final_run(b1, *r.witness).accepted);
  auto inner = r.witness->nonleaf_nodes();
  CHECK(inner.size() == 2);
  for (int n : inner) CHECK(r.witness->node(n).letter == 0);
}

TEST_CASE("unsatisfiable root formula") {
  auto r = atra_nonempty_finite(dead_root());
  CHECK(r.verdict == Verdict::Unsat);
  CHECK(atra_nonempty_finite(empty_automaton(bk_alphabet(1))).verdict == Verdict::Unsat);
}

TEST_CASE("compiled machine accepts exactly the data-erased language") {
  for (const auto& a : testing_support::extended_corpus()) {
    auto m = compile_finite(a);
    testing_support::for_each_tree(a.alphabet(), 3, 1, [&](const DataTree& t) {
      bool abstract_run = itca_accepts(*m, t, 256);
      bool concrete = lift_witness(a, t).has_value();
      CHECK(abstract_run == concrete);
    });
  }
}

TEST_CASE("finite nonemptiness on the corpus") {
  FiniteOptions branchwise;
  branchwise.policy = SearchPolicy::Branchwise;
  branchwise.budget = {200'000, 24};
  const std::size_t named = testing_support::corpus().size();
  auto all = testing_support::extended_corpus();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& a = all[i];
    auto r = atra_nonempty_finite(a);
    REQUIRE(r.verdict != Verdict::Budget);
    bool small = false;
    testing_support::for_each_tree(a.alphabet(), 3, 3, [&](const DataTree& t) {
      small = small || has_final_run(a, t).accepted;
    });
    if (small) CHECK(r.verdict == Verdict::Sat);
    if (r.verdict == Verdict::Sat) {
      CHECK(r.certified);
      CHECK(has_final_run(a, *r.witness).accepted);
    }
    CHECK(atra_nonempty_finite(a, branchwise).verdict == r.verdict);
    // the random automata may exhaust the budget here, but never come out SAT
    auto contra = atra_nonempty_finite(intersect(a, dualize(a)), branchwise);
    CHECK(contra.verdict != Verdict::Sat);
    if (i < named) CHECK(contra.verdict == Verdict::Unsat);
  }
}

TEST_CASE("inclusion machines have no epsilon cycles") {
  Alphabet sigma = bk_alphabet(1);
  auto b1 = make_bk(1, 1);
  for (const auto& [x, y] : std::vector<std::pair<Atra, Atra>>{{b1, empty_automaton(sigma)},
                                                               {b1, b1},
                                                               {universal_automaton(sigma), b1}}) {
    auto m = compile_inclusion(product_safety(x, y));
    CHECK(epsilon_cycle_free(*m, 200'000));
    std::deque<StateId> queue{m->initial()};
    std::set<StateId> seen{m->initial()};
    while (!queue.empty()) {
      StateId q = queue.front();
      queue.pop_front();
      for (const auto& t : m->transitions(q)) {
        CHECK(t.instr.op != Instruction::Op::Ifz);
        for (StateId r : {t.to0, t.to1})
          if ((t.letter || r == t.to0) && seen.insert(r).second) queue.push_back(r);
      }
    }
  }
}

TEST_CASE("prop is set on the first pass against the empty automaton") {
  Alphabet sigma = bk_alphabet(1);
  auto m = compile_inclusion(product_safety(universal_automaton(sigma), empty_automaton(sigma)));
  // follow the first pass from the root up to the return to the start phase
  std::deque<std::pair<StateId, int>> queue{{m->initial(), 0}};
  bool found = false;
  while (!queue.empty() && !found) {
    auto [q, depth] = queue.front();
    queue.pop_front();
    if (m->prop(q)) found = true;
    if (depth > 40) continue;
    for (const auto& t : m->transitions(q)) {
      queue.push_back({t.to0, depth + 1});
      if (t.letter) queue.push_back({t.to1, depth + 1});
    }
  }
  CHECK(found);
}

TEST_CASE("safety inclusion") {
  Alphabet sigma = bk_alphabet(1);
  Atra none = empty_automaton(sigma);
  Budget budget{200'000, 24};
  CHECK_FALSE(atra_inclusion_safety(universal_automaton(sigma), none, budget));
  CHECK(atra_nonempty_safety(make_bk(1, 1), budget));
  CHECK_FALSE(atra_nonempty_safety(none, budget));
  for (const auto& a : testing_support::corpus()) {
    CHECK(atra_inclusion_safety(none, a, budget));
    CHECK(atra_inclusion_safety(a, a, budget));
    if (atra_nonempty_finite(a).verdict == Verdict::Sat) CHECK(atra_nonempty_safety(a, budget));
  }
}

TEST_CASE("safety inclusion on random automata never answers wrongly") {
  Budget budget{100'000, 16};
  auto all = testing_support::extended_corpus();
  for (std::size_t i = testing_support::corpus().size(); i < all.size(); ++i) {
    const auto& a = all[i];
    bool holds = true;
    try {
      holds = atra_inclusion_safety(a, a, budget);
    } catch (const BudgetExceeded&) {
    }
    CHECK(holds);
    if (atra_nonempty_finite(a).verdict == Verdict::Sat) CHECK(atra_nonempty_safety(a, budget));
  }
}
