#include "doctest.h"
#include "dtsat/counter.hpp"
#include "support.hpp"

using namespace dtsat;
using testing_support::random_machine;

namespace {

using Op = Instruction::Op;

bool in_up(const std::vector<Valuation>& b, const Valuation& v) {
  for (const auto& x : b)
    if (x.leq(v)) return true;
  return false;
}

// Every valuation over counters 1..k with entries at most `bound`.
std::vector<Valuation> box(std::uint32_t k, std::uint32_t bound) {
  std::vector<Valuation> out{Valuation{}};
  for (Counter c = 1; c <= k; ++c) {
    std::vector<Valuation> next;
    for (const auto& v : out)
      for (std::uint32_t x = 0; x <= bound; ++x) {
        Valuation w = v;
        w.set(c, x);
        next.push_back(w);
      }
    out = std::move(next);
  }
  return out;
}

Instruction random_instruction(std::mt19937& rng, std::uint32_t k) {
  std::uniform_int_distribution<std::uint32_t> pick(1, k);
  switch (rng() % 4) {
    case 0:
      return Instruction::inc(pick(rng));
    case 1:
      return Instruction::dec(pick(rng));
    case 2:
      return Instruction::ifz(pick(rng));
    default: {
      std::vector<Counter> to;
      for (Counter c = 1; c <= k; ++c)
        if (rng() % 2) to.push_back(c);
      return Instruction::transfer(pick(rng), to);
    }
  }
}

bool some_small_tree_accepted(const Machine& m, int max_nonleaf, std::size_t bound) {
  bool found = false;
  testing_support::for_each_tree(m.alphabet(), max_nonleaf, 1, [&](const DataTree& t) {
    if (!found && itca_accepts(m, t, bound)) found = true;
  });
  return found;
}

}  // namespace

TEST_CASE("valuations") {
  Valuation v{{2, 3}, {1, 1}};
  CHECK(v.get(1) == 1);
  CHECK(v.get(7) == 0);
  CHECK(v.sum() == 4);
  v.set(2, 0);
  CHECK(v.entries().size() == 1);
  CHECK(Valuation{{1, 1}}.leq(Valuation{{1, 2}, {3, 1}}));
  CHECK_FALSE(Valuation{{3, 2}}.leq(Valuation{{1, 2}, {3, 1}}));
  CHECK(Valuation{{1, 1}}.lub(Valuation{{2, 2}}) == Valuation{{1, 1}, {2, 2}});
  CHECK(Valuation{{1, 3}, {2, 1}}.minus(Valuation{{2, 4}}) == Valuation{{1, 3}});
}

TEST_CASE("instruction semantics") {
  Valuation v{{1, 2}};
  CHECK(exact_step(v, Instruction::inc(2)) == std::vector<Valuation>{Valuation{{1, 2}, {2, 1}}});
  CHECK(exact_step(Valuation{}, Instruction::dec(1)).empty());
  CHECK(lazy_step(Valuation{}, Instruction::dec(1)) == std::vector<Valuation>{Valuation{}});
  CHECK(exact_step(v, Instruction::ifz(1)).empty());
  CHECK(exact_step(v, Instruction::ifz(2)).size() == 1);
  CHECK(exact_step(v, Instruction::transfer(1, {})).empty());
  auto split = exact_step(Valuation{{1, 3}}, Instruction::transfer(1, {2, 3}));
  CHECK(split.size() == 4);
  for (const auto& w : split) {
    CHECK(w.get(1) == 0);
    CHECK(w.get(2) + w.get(3) == 3);
  }
  CHECK(Instruction::ifz(4).as_transfer() == Instruction::transfer(4, {}));
}

TEST_CASE("lazy steps are downward compatible with incrementing errors") {
  std::mt19937 rng(5);
  const std::uint32_t k = 3;
  auto small = box(k, 2);
  std::vector<Counter> support{1, 2, 3};
  for (int i = 0; i < 300; ++i) {
    auto l = random_instruction(rng, k);
    const auto& v = small[rng() % small.size()];
    Valuation w = v.plus(small[rng() % small.size()]);
    auto lazy = lazy_step(v, l);
    for (const auto& w2 : errorful_step(w, l, support, 1)) {
      bool below = false;
      for (const auto& v2 : lazy) below = below || v2.leq(w2);
      CHECK(below);
    }
  }
}

TEST_CASE("level order and successors") {
  Config a{0, Valuation{{1, 1}}, false}, b{0, Valuation{{1, 2}}, false}, c{1, {}, false};
  CHECK(level_leq(make_level({a, b}), make_level({b})));
  CHECK_FALSE(level_embeds(make_level({a, b}), make_level({b})));
  CHECK(level_embeds(make_level({a, c}), make_level({b, c})));
  CHECK_FALSE(level_leq(make_level({c}), make_level({a, b})));

  ExplicitMachine m({"a"}, {"q"}, 0, {}, 1);
  m.add(0, std::nullopt, Instruction::inc(1), 0);
  CHECK_FALSE(epsilon_cycle_free(m));
  auto succ = level_successors(m, make_level({Config{0, {}, false}}));
  REQUIRE(succ.size() == 1);
  CHECK(succ[0] == make_level({Config{0, Valuation{{1, 1}}, false}}));
  // final configurations vanish
  ExplicitMachine f({"a"}, {"p", "q"}, 0, {1}, 1);
  auto gone = level_successors(f, make_level({Config{1, Valuation{{1, 4}}, false}}));
  CHECK(gone == std::vector<Level>{Level{}});
}

TEST_CASE("final initial state with a letter self-loop") {
  ExplicitMachine m({"a", "b"}, {"q"}, 0, {0}, 1);
  m.add(0, 0, Instruction::inc(1), 0, 0);
  for (auto policy : {SearchPolicy::Focused, SearchPolicy::Synchronous}) {
    auto r = nonempty_finite(m, {Budget{}, policy, true});
    CHECK(r.verdict == Verdict::Sat);
    REQUIRE(r.witness);
    CHECK(r.witness->size() == 3);
    CHECK(r.witness->node(0).letter == 0);
    CHECK(itca_accepts(m, *r.witness, 1));
  }
  auto two_leaf = testing_support::build(m.alphabet(), {true, false, false}, {0}, {0});
  CHECK(itca_accepts(m, two_leaf, 1));
  auto wrong_letter = testing_support::build(m.alphabet(), {true, false, false}, {1}, {0});
  CHECK_FALSE(itca_accepts(m, wrong_letter, 1));
}

TEST_CASE("the root must read a letter even when the initial state is final") {
  ExplicitMachine m({"a"}, {"q"}, 0, {0}, 1);
  CHECK(nonempty_finite(m).verdict == Verdict::Unsat);
  CHECK(nonempty_finite(m, {Budget{}, SearchPolicy::Synchronous, true}).verdict == Verdict::Unsat);
  CHECK_FALSE(some_small_tree_accepted(m, 3, 1));
}

TEST_CASE("deadlocked machine") {
  ExplicitMachine m({"a"}, {"q"}, 0, {}, 1);
  CHECK(nonempty_finite(m).verdict == Verdict::Unsat);
}

TEST_CASE("counting machine needs a balanced tree") {
  // left children count up, right children must find the counter at zero
  ExplicitMachine m({"a"}, {"i", "l", "r", "f"}, 0, {3}, 1);
  m.add(0, 0, Instruction::inc(1), 1, 2);
  m.add(1, std::nullopt, Instruction::dec(1), 3);
  m.add(2, std::nullopt, Instruction::ifz(1), 3);
  // the right child sees 1, so ifz fails; only the dec path works
  auto r = nonempty_finite(m);
  CHECK(r.verdict == Verdict::Unsat);
  m.add(2, std::nullopt, Instruction::dec(1), 3);
  r = nonempty_finite(m);
  CHECK(r.verdict == Verdict::Sat);
  REQUIRE(r.witness);
  CHECK(itca_accepts(m, *r.witness, 2));
}

TEST_CASE("search policies agree with each other and with small trees") {
  std::mt19937 rng(17);
  Alphabet sigma{"a", "b"};
  int sat = 0, unsat = 0;
  for (int i = 0; i < 250; ++i) {
    int n = 2 + static_cast<int>(rng() % 3);
    auto m = random_machine(rng, sigma, n, 1 + static_cast<std::uint32_t>(rng() % 2), 3 + static_cast<int>(rng() % 6));
    Budget budget{20000, 8};
    auto focused = nonempty_finite(m, {budget, SearchPolicy::Focused, true});
    auto sync = nonempty_finite(m, {budget, SearchPolicy::Synchronous, true});
    auto branch = nonempty_finite(m, {budget, SearchPolicy::Branchwise, true});
    auto raw = nonempty_finite(m, {Budget{20000, 4}, SearchPolicy::Focused, false});
    bool small = some_small_tree_accepted(m, 3, static_cast<std::size_t>(n));
    if (small) CHECK(focused.verdict == Verdict::Sat);
    if (focused.verdict != Verdict::Budget && sync.verdict != Verdict::Budget) CHECK(focused.verdict == sync.verdict);
    if (focused.verdict != Verdict::Budget && branch.verdict != Verdict::Budget) CHECK(focused.verdict == branch.verdict);
    if (raw.verdict == Verdict::Sat) CHECK(focused.verdict == Verdict::Sat);
    if (raw.verdict == Verdict::Unsat) CHECK(focused.verdict == Verdict::Unsat);
    for (const auto* r : {&focused, &sync, &branch}) {
      if (r->verdict != Verdict::Sat) continue;
      REQUIRE(r->witness);
      CHECK(itca_accepts(m, *r->witness, static_cast<std::size_t>(n)));
    }
    sat += focused.verdict == Verdict::Sat;
    unsat += focused.verdict == Verdict::Unsat;
  }
  CHECK(sat > 20);
  CHECK(unsat > 20);
}

TEST_CASE("budget is reported, never a negative answer") {
  // every branch keeps incrementing
  ExplicitMachine g({"a"}, {"q", "f"}, 0, {1}, 1);
  g.add(0, 0, Instruction::inc(1), 0, 0);
  auto capped = nonempty_finite(g, {Budget{1000, 1}, SearchPolicy::Focused, true});
  CHECK(capped.verdict == Verdict::Budget);
}

TEST_CASE("pre_forall matches enumeration") {
  std::mt19937 rng(23);
  const std::uint32_t k = 3;
  auto vals = box(k, 3);
  for (int i = 0; i < 200; ++i) {
    auto l = random_instruction(rng, k);
    std::vector<Valuation> b;
    int nb = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < nb; ++j) b.push_back(box(k, 2)[rng() % 27]);
    auto pre = pre_forall(l, b);
    for (const auto& v : vals) {
      bool all = true;
      for (const auto& w : lazy_step(v, l)) all = all && in_up(b, w);
      CHECK_MESSAGE(in_up(pre, v) == all, "instruction op ", static_cast<int>(l.op));
    }
  }
}

TEST_CASE("dead sets match the iterated Pred-forall bases") {
  std::mt19937 rng(29);
  Alphabet sigma{"a"};
  int checked = 0;
  for (int i = 0; i < 120 && checked < 60; ++i) {
    auto m = random_machine(rng, sigma, 2 + static_cast<int>(rng() % 2), 1, 2 + static_cast<int>(rng() % 4));
    DeadSets dead(m, Budget{});
    std::vector<Level> term;
    bool ok = true;
    for (int round = 0; round < 12; ++round) {
      std::vector<Level> h;
      try {
        h = pred_forall_basis(m, term, {1}, 2);
      } catch (const BudgetExceeded&) {
        ok = false;
        break;
      }
      bool grew = false;
      for (auto& g : h) {
        CHECK(g.size() <= 1);
        if (!std::any_of(term.begin(), term.end(), [&](const Level& t) { return level_leq(t, g); })) {
          term.push_back(g);
          grew = true;
        }
      }
      if (!grew) break;
    }
    if (!ok) continue;
    ++checked;
    for (StateId q : reachable_states(m))
      for (bool root : {false, true})
        for (std::uint32_t x = 0; x <= 3; ++x) {
          Config c{q, Valuation{{1, x}}, root};
          if (!root && m.is_final(q)) continue;
          bool by_bases = std::any_of(term.begin(), term.end(), [&](const Level& t) { return level_leq(t, {c}); });
          CHECK(dead.dead(c) == by_bases);
        }
  }
  CHECK(checked >= 40);
}

TEST_CASE("infinite sequences through P-levels") {
  SUBCASE("final initial state reaches the empty level") {
    ExplicitMachine m({"a"}, {"q"}, 0, {0}, 1);
    m.add(0, 0, Instruction::inc(1), 0, 0);
    CHECK(exists_infinite_with_P(m, [](StateId) { return false; }).exists);
  }
  SUBCASE("deadlocked state outside P") {
    ExplicitMachine m({"a"}, {"q"}, 0, {}, 1);
    CHECK_FALSE(exists_infinite_with_P(m, [](StateId) { return false; }).exists);
  }
  SUBCASE("deadlocked state inside P") {
    ExplicitMachine m({"a"}, {"q"}, 0, {}, 1);
    CHECK_FALSE(exists_infinite_with_P(m, [](StateId) { return true; }).exists);
  }
  SUBCASE("an incrementing loop runs forever") {
    ExplicitMachine m({"a"}, {"q", "p"}, 0, {}, 1);
    m.add(0, 0, Instruction::inc(1), 0, 1);
    m.add(1, 0, Instruction::inc(1), 1, 1);
    CHECK(exists_infinite_with_P(m, [](StateId q) { return q == 1; }).exists == false);
    CHECK(exists_infinite_with_P(m, [](StateId) { return true; }).exists);
  }
}

TEST_CASE("symbolic procedure agrees with the three-basis procedure") {
  std::mt19937 rng(31);
  Alphabet sigma{"a"};
  int compared = 0, positive = 0;
  for (int i = 0; i < 200 && compared < 80; ++i) {
    int n = 2 + static_cast<int>(rng() % 2);
    auto m = random_machine(rng, sigma, n, 1, 2 + static_cast<int>(rng() % 4));
    StateId pstate = static_cast<StateId>(rng() % static_cast<unsigned>(n));
    StatePredicate p = [&](StateId q) { return q >= pstate; };
    try {
      bool fast = exists_infinite_with_P(m, p, Budget{20000, 12}).exists;
      bool slow = exists_infinite_by_bases(m, p, {1}, Budget{20000, 12});
      CHECK(fast == slow);
      ++compared;
      positive += fast;
    } catch (const BudgetExceeded&) {
    }
  }
  CHECK(compared >= 50);
  CHECK(positive > 5);
}
