// Acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abstraction_support.hpp"
#include "dtsat/abstraction.hpp"
#include "dtsat/counter.hpp"
#include "dtsat/xpath.hpp"
#include "support.hpp"
#include "xml_support.hpp"

using namespace dtsat;
using namespace testing_support;

namespace {

struct Report {
  bool ok = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (ok) detail << "first failure: " << why << "; ";
    ok = false;
  }
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<void(Report&)> run;
};

// Boolean closure.
void closure(Report& r) {
  auto corpus = testing_support::corpus();
  std::vector<DataTree> trees;
  std::size_t literal = 0;
  // every tree with at most five nodes, and larger ones up to five inner nodes
  for_each_tree(corpus[0].alphabet(), 5, 2, [&](const DataTree& t) {
    literal += t.size() <= 5;
    trees.push_back(t);
  });
  std::size_t mismatches = 0, checks = 0, accepted = 0;
  std::vector<std::vector<bool>> in(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Atra d = dualize(corpus[i]);
    for (const auto& t : trees) {
      bool a = has_final_run(corpus[i], t).accepted;
      in[i].push_back(a);
      accepted += a;
      ++checks;
      if (has_final_run(d, t).accepted == a) {
        ++mismatches;
        r.fail("dual of automaton " + std::to_string(i));
      }
    }
  }
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (i == j) continue;
      Atra both = intersect(corpus[i], corpus[j]), either = union_(corpus[i], corpus[j]);
      for (std::size_t k = 0; k < trees.size(); ++k) {
        checks += 2;
        if (has_final_run(both, trees[k]).accepted != (in[i][k] && in[j][k])) {
          ++mismatches;
          r.fail("intersection " + std::to_string(i) + "," + std::to_string(j));
        }
        if (has_final_run(either, trees[k]).accepted != (in[i][k] || in[j][k])) {
          ++mismatches;
          r.fail("union " + std::to_string(i) + "," + std::to_string(j));
        }
      }
    }
  r.detail << trees.size() << " trees (" << literal << " with at most 5 nodes), " << accepted << " of "
           << trees.size() * corpus.size() << " memberships positive, " << checks << " checks, "
           << mismatches << " mismatches";
}

std::size_t count_letter(const DataTree& t, Letter l) {
  std::size_t n = 0;
  for (int v : t.nonleaf_nodes()) n += t.node(v).letter == l;
  return n;
}

void bk_family(Report& r) {
  if (tower(0) != 1 || tower(1) != 2 || tower(2) != 4) r.fail("tower values");
  Atra b1 = make_bk(1, 1);
  const Alphabet s1 = b1.alphabet();
  auto w1 = term(s1, "b1:1(b1:2(.,.),.)");
  if (count_letter(w1, 0) != tower(1) || !has_final_run(b1, w1).accepted) r.fail("B1 witness");
  if (has_final_run(b1, term(s1, "b1:1(b1:2(b1:3(.,.),.),.)")).accepted) r.fail("B1 accepts a chain of three");
  Atra b2 = make_bk(2, 2);
  auto w2 = b2_witness();
  if (count_letter(w2, 1) != tower(2)) r.fail("B2 witness shape");
  if (!has_final_run(b2, w2).accepted) r.fail("B2 witness rejected");
  auto chain = b2_chain3(false);
  if (has_final_run(b2, chain).accepted) r.fail("B2 accepts a b2-chain of three");
  bool reuse = has_final_run(b2, b2_chain3(true)).accepted;
  r.detail << "B1 witness accepted, 3-chain rejected; B2 witness with " << count_letter(w2, 1)
           << " b2 nodes accepted, 3-chain with fresh data rejected (" << count_letter(chain, 1)
           << " b2 nodes); 3-chain reusing ancestor data " << (reuse ? "accepted" : "rejected");
}

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

std::vector<Instruction> all_instructions(std::uint32_t k) {
  std::vector<Instruction> out;
  for (Counter c = 1; c <= k; ++c) {
    out.push_back(Instruction::inc(c));
    out.push_back(Instruction::dec(c));
    out.push_back(Instruction::ifz(c));
    for (std::uint32_t mask = 0; mask < (1U << k); ++mask) {
      std::vector<Counter> to;
      for (Counter d = 1; d <= k; ++d)
        if (mask & (1U << (d - 1))) to.push_back(d);
      out.push_back(Instruction::transfer(c, to));
    }
  }
  return out;
}

void lazy_property(Report& r) {
  std::size_t checks = 0, violations = 0;
  for (std::uint32_t k = 1; k <= 2; ++k) {
    auto vals = box(k, 3);
    std::vector<Counter> support;
    for (Counter c = 1; c <= k; ++c) support.push_back(c);
    for (const auto& l : all_instructions(k))
      for (const auto& v : vals) {
        auto lazy = lazy_step(v, l);
        for (const auto& w : vals) {
          if (!v.leq(w)) continue;
          for (const auto& w2 : errorful_step(w, l, support, 2)) {
            ++checks;
            bool below = false;
            for (const auto& v2 : lazy) below = below || v2.leq(w2);
            if (!below) {
              ++violations;
              r.fail("instruction on counter " + std::to_string(l.counter));
            }
          }
        }
      }
  }
  r.detail << checks << " successor pairs, " << violations << " violations";
}

enum class Reach { Found, Absent, Bounded };

// Breadth-first search over levels without pruning. Levels with a valuation
// sum above `cap` or more than `width` configurations are dropped.
Reach empty_level_reachable(const Machine& m, std::uint64_t cap, std::size_t width, std::size_t max_levels) {
  Level start = make_level({Config{m.initial(), Valuation{}, true}});
  std::set<Level> seen{start};
  std::vector<Level> frontier{start};
  bool cut = false;
  while (!frontier.empty()) {
    std::vector<Level> next;
    for (const auto& g : frontier)
      for (auto& h : level_successors(m, g, 100'000)) {
        if (h.empty()) return Reach::Found;
        bool big = h.size() > width;
        for (const auto& c : h) big = big || c.val.sum() > cap;
        if (big) {
          cut = true;
          continue;
        }
        if (seen.size() >= max_levels) return Reach::Bounded;
        if (seen.insert(h).second) next.push_back(std::move(h));
      }
    frontier = std::move(next);
  }
  return cut ? Reach::Bounded : Reach::Absent;
}

void wsts_solver(Report& r) {
  std::mt19937 rng(4242);
  const Alphabet sigma{"a", "b"};
  int sat = 0, unsat = 0, decided = 0, mismatches = 0, certified = 0;
  for (int i = 0; i < 20; ++i) {
    int n = 2 + static_cast<int>(rng() % 2);
    auto k = 1 + static_cast<std::uint32_t>(rng() % 2);
    auto m = random_machine(rng, sigma, n, k, 4 + static_cast<int>(rng() % 7));
    FiniteOptions opts;
    opts.budget = {20'000, 16};
    auto res = nonempty_finite(m, opts);
    Reach oracle = Reach::Bounded;
    try {
      oracle = empty_level_reachable(m, 4, 6, 200'000);
    } catch (const BudgetExceeded&) {
    }
    if (res.verdict == Verdict::Budget) r.fail("machine " + std::to_string(i) + " exhausted the budget");
    sat += res.verdict == Verdict::Sat;
    unsat += res.verdict == Verdict::Unsat;
    if (oracle != Reach::Bounded) {
      ++decided;
      bool agree = (oracle == Reach::Found) == (res.verdict == Verdict::Sat);
      if (!agree) {
        ++mismatches;
        r.fail("machine " + std::to_string(i) + " disagrees with the exhaustive search");
      }
    }
    if (res.verdict == Verdict::Sat) {
      if (res.witness && itca_accepts(m, *res.witness, 64))
        ++certified;
      else
        r.fail("machine " + std::to_string(i) + " witness not certified");
    }
  }
  if (decided < 10) r.fail("fewer than 10 machines decided by the exhaustive search");
  r.detail << sat << " SAT (" << certified << " witnesses certified), " << unsat << " UNSAT; exhaustive search at "
           << "valuation sum 4 and level width 6 decided " << decided << " of 20, " << mismatches << " mismatches";
}

// Some data labelling of `shape` with restricted-growth data is accepted.
bool some_labelling_accepted(const Atra& a, const DataTree& shape) {
  DataTree t = shape;
  auto inner = t.nonleaf_nodes();
  std::function<bool(std::size_t, Datum)> go = [&](std::size_t i, Datum used) {
    if (i == inner.size()) return has_final_run(a, t).accepted;
    for (Datum d = 1; d <= used + 1; ++d) {
      t.node(inner[i]).datum = d;
      if (go(i + 1, std::max(used, d))) return true;
    }
    return false;
  };
  return go(0, 0);
}

void abstraction(Report& r) {
  std::size_t trees = 0, accepted = 0, mismatches = 0, steps = 0, sim_failures = 0;
  auto corpus = testing_support::corpus();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& a = corpus[i];
    auto m = compile_finite(a);
    for_each_tree(a.alphabet(), 4, 1, [&](const DataTree& t) {
      ++trees;
      bool abstract_run = itca_accepts(*m, t, 256);
      accepted += abstract_run;
      if (abstract_run != some_labelling_accepted(a, t)) {
        ++mismatches;
        r.fail("automaton " + std::to_string(i) + " on a tree with " + std::to_string(t.nonleaf_count()) +
               " inner nodes");
      }
    });
    for (const auto& g : small_configs(a, 3, 3))
      for (Letter l = 0; l < a.num_letters(); ++l)
        for (Datum e = 1; e <= 4; ++e) {
          ++steps;
          auto ws = abstract_successors(a, abstract(g), l, bundle(g, e));
          for (const auto& [h0, h1] : step(a, g, l, e)) {
            AbstractPair c{abstract(h0), abstract(h1)};
            bool below = false;
            for (const auto& w : ws) below = below || pair_leq(w, c);
            if (!below) {
              ++sim_failures;
              r.fail("concrete step without an abstract match");
            }
          }
          auto realised = concrete_pairs(a, g, l, e);
          for (const auto& w : ws)
            if (!realised.count(w)) {
              ++sim_failures;
              r.fail("abstract step without a concrete match");
            }
        }
  }
  r.detail << trees << " automaton/tree pairs (" << accepted << " accepted), " << mismatches << " mismatches; " << steps
           << " steps from configurations of size <= 3, " << sim_failures << " simulation failures";
}

void safety(Report& r) {
  const Budget budget{200'000, 24};
  Alphabet sigma = bk_alphabet(1);
  Atra none = empty_automaton(sigma);
  int checks = 0;
  auto expect = [&](bool got, bool want, const std::string& what) {
    ++checks;
    if (got != want) r.fail(what);
  };
  try {
    expect(atra_inclusion_safety(universal_automaton(sigma), none, budget), false, "universal included in empty");
    auto corpus = testing_support::corpus();
    int agree = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& a = corpus[i];
      const std::string id = std::to_string(i);
      expect(atra_inclusion_safety(a, a, budget), true, "reflexivity on automaton " + id);
      expect(atra_inclusion_safety(none, a, budget), true, "empty not included in automaton " + id);
      if (atra_nonempty_finite(a).verdict == Verdict::Sat) {
        ++agree;
        expect(atra_nonempty_safety(a, budget), true, "nonempty_safety on automaton " + id);
      }
    }
    r.detail << checks << " checks, " << agree << " finitely nonempty automata; budget " << budget.max_levels
             << " levels, valuation sum " << budget.max_valuation_sum << " for every case";
  } catch (const BudgetExceeded& e) {
    r.fail(std::string("budget exceeded: ") + e.what());
  }
}

void xpath_oracle(Report& r) {
  auto docs = documents(60, 31);
  std::size_t checks = 0, mismatches = 0, mixed = 0;
  for (const auto& s : kQueries) {
    auto query = parse_query(s, kSig);
    Atra a = compile_qualifier(*Qualifier::exists(query), kSig);
    std::set<bool> seen;
    for (const auto& doc : docs) {
      DataTree t = encode_xml(doc, kSig);
      bool sat = satisfies(t, kSig, *query);
      seen.insert(sat);
      ++checks;
      if (has_final_run(a, t).accepted != sat) {
        ++mismatches;
        r.fail(s);
      }
    }
    mixed += seen.size() == 2;
  }
  r.detail << kQueries.size() << " queries x " << docs.size() << " documents, " << mismatches << " mismatches, "
           << mixed << " queries with both verdicts";
}

void xpath_sat(Report& r) {
  FiniteOptions opts;
  opts.budget = {200'000, 24};
  const Budget budget{200'000, 24};
  const Dtd any = universal_dtd(kSig);
  auto q = [](const std::string& s) { return parse_query(s, kSig); };
  const std::vector<std::pair<std::string, Dtd>> positive = {
      {"e[a]", single_a()},
      {"c/c[b]", any},
      {"e[@a1 = e/@a2]", any},
      {"e[@a1 != c/@a2]", root_has_child()},
      {"c[b]", root_type_a()},
      {"rs*/c*[@a1 = (c/c*)/@a2]", any},
      {"e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]", root_has_child()},
  };
  const std::vector<std::pair<std::string, Dtd>> negative = {
      {"e[a & !a]", any},
      {"e[b]", root_type_a()},
      {"e[!(c?)]", root_has_child()},
      {"c", single_a()},
      {"e[!(rs*/c*[@a1 = (c/c*)/@a2]?) & @a1 = c/@a2]", root_has_child()},
  };
  int sat = 0, unsat = 0, agree = 0;
  for (const auto& [s, d] : positive) {
    auto query = q(s);
    auto res = xpath_sat_finite(*query, d, opts);
    bool ok = res.verdict == Verdict::Sat && res.witness && res.certified;
    if (ok) {
      DataTree t = encode_xml(*res.witness, kSig);
      ok = satisfies(t, kSig, *query) && dtd_accepts(d, t);
    }
    if (ok)
      ++sat;
    else
      r.fail(s + " not SAT with a certified witness");
  }
  for (const auto& [s, d] : negative) {
    if (xpath_sat_finite(*q(s), d, opts).verdict == Verdict::Unsat)
      ++unsat;
    else
      r.fail(s + " not UNSAT");
  }
  const std::vector<std::string> safety = {"e",        "e[!(c?)]",           "e[a & !a]",
                                           "rs/rs[a]", "e[!(c[@a1 = rs/@a2]?)]", "e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]"};
  for (const auto& s : safety) {
    auto query = q(s);
    if (!is_safety(classify(*query))) r.fail(s + " not classified safety");
    for (const Dtd& d : {any, root_has_child(), root_type_a(), single_a()}) {
      auto saf = xpath_sat_safety(*query, d, budget);
      auto fin = xpath_sat_finite(*query, d, opts);
      if (saf.verdict == Verdict::Budget || fin.verdict == Verdict::Budget) {
        r.fail(s + " exhausted the budget");
        continue;
      }
      if (fin.verdict == Verdict::Sat && saf.verdict != Verdict::Sat)
        r.fail(s + " has a finite witness but sat-saf says UNSAT");
      else
        ++agree;
    }
  }
  bool gated = true;
  for (const auto& s : {"e[c?]", "c"}) {
    try {
      xpath_sat_safety(*q(s), any, budget);
      gated = false;
    } catch (const ValidationError&) {
    }
  }
  if (!gated) r.fail("sat-saf accepted a query with a positive child step");
  r.detail << sat << "/" << positive.size() << " certified SAT, " << unsat << "/" << negative.size() << " UNSAT, "
           << agree << " safety/finite agreements, gate " << (gated ? "rejects" : "accepts") << " Exists(Child)";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "Boolean closure", 60, closure},
      {2, "B_k family", 120, bk_family},
      {3, "lazy semantics property", 30, lazy_property},
      {4, "counter machine solver", 120, wsts_solver},
      {5, "abstraction correspondence", 600, abstraction},
      {6, "safety pipeline coherence", 600, safety},
      {7, "XPath compiler agreement", 300, xpath_oracle},
      {8, "XPath satisfiability", 600, xpath_sat},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  bool all_ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Report r;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(r);
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) r.fail("time limit exceeded");
    all_ok = all_ok && r.ok;
    std::printf("[%s] %d %s: %s (%.1f s, limit %.0f s)\n", r.ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                r.detail.str().c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
