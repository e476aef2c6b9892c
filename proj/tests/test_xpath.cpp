#include <random>

#include "doctest.h"
#include "dtsat/abstraction.hpp"
#include "dtsat/xpath.hpp"
#include "support.hpp"
#include "xml_support.hpp"

using namespace dtsat;
using namespace testing_support;

namespace {

bool accepts_at(const Atra& a, const DataTree& t, int start, const std::vector<bool>* holes = nullptr) {
  MembershipOptions opts;
  opts.start = start;
  opts.hole_nodes = holes;
  return has_final_run(a, t, opts).accepted;
}

QueryPtr q(const std::string& s) { return parse_query(s, kSig); }

}  // namespace

TEST_CASE("parse_query") {
  CHECK(q("e")->kind == Query::Kind::Self);
  CHECK(q("cs*")->kind == Query::Kind::ChildStar);
  CHECK(to_string(*q("rs*/cs*[@a1 = (c/cs*)/@a2]")) == "rs*/c*[@a1 = (c/c*)/@a2]");
  auto p = q("rs*/c*[@a1 = (c/c*)/@a2]");
  REQUIRE(p->kind == Query::Kind::Concat);
  CHECK(p->lhs->kind == Query::Kind::NextSibStar);
  REQUIRE(p->rhs->kind == Query::Kind::Filter);
  const Qualifier& cmp = *p->rhs->qual;
  CHECK(cmp.kind == Qualifier::Kind::AttrCmp);
  CHECK(cmp.head == Qualifier::Head::Child);
  CHECK(cmp.query->kind == Query::Kind::ChildStar);
  CHECK(cmp.attr1 == "a1");
  CHECK(cmp.attr2 == "a2");
  for (const auto& s : kQueries) CHECK(to_string(*q(to_string(*q(s)))) == to_string(*q(s)));
  CHECK(to_string(*q("e/c/rs")) == "e/c/rs");
  CHECK(to_string(*q("e[!(c?) & a]")) == "e[!(c?) & a]");
  CHECK(to_string(*q("e[@a1 = e/@a2]")) == "e[@a1 = e/@a2]");
  CHECK(to_string(*q("e[e/@a1 = @a2]")) == "e[@a1 = e/@a2]");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(q("parent::a"), ForwardnessError);
  CHECK_THROWS_AS(q("c/p"), ForwardnessError);
  CHECK_THROWS_AS(q("ls*"), ForwardnessError);
  CHECK_THROWS_AS(q("e[c/@a1 = e/@a2]"), ForwardnessError);
  CHECK_THROWS_AS(q("e[@a1 = c*/@a2]"), ForwardnessError);
  CHECK_THROWS_AS(q("e[@a1 = (c | rs)/@a2]"), ForwardnessError);
  try {
    q("c/");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
  try {
    q("c[a");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);
  }
  CHECK_THROWS_AS(q("c[zz]"), ValidationError);
  CHECK_THROWS_AS(q("e[@zz = e/@a1]"), ValidationError);
  CHECK_THROWS_AS(q("c $"), ParseError);
  CHECK_THROWS_AS(q("a"), ParseError);
  try {
    q("parent::a");
  } catch (const ForwardnessError& e) {
    CHECK(std::string(e.what()).find("parent::") != std::string::npos);
  }
}

TEST_CASE("classify") {
  CHECK(classify(*q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]")) == Fragment::Safety);
  CHECK(classify(*q("rs*/c*[@a1 = (c/c*)/@a2]")) == Fragment::CoSafety);
  CHECK(classify(*q("e")) == Fragment::Both);
  CHECK(classify(*q("rs/rs[a]")) == Fragment::Both);
  CHECK(classify(*q("c")) == Fragment::CoSafety);
  CHECK(classify(*q("e[!(c?)] /c")) == Fragment::Neither);
  CHECK(classify(*q("e[!(e[@a1 = c/@a2]?)]")) == Fragment::Safety);
  CHECK(classify(*q("e[!(e[@a1 = rs/@a2]?)]")) == Fragment::Both);
  for (const auto& s : kQueries) {
    auto u = Qualifier::exists(q(s));
    Fragment f = classify(*u);
    Fragment g = classify(*Qualifier::negate(u));
    if (f == Fragment::Safety) CHECK(g == Fragment::CoSafety);
    if (f == Fragment::CoSafety) CHECK(g == Fragment::Safety);
    if (f == Fragment::Both || f == Fragment::Neither) CHECK(g == f);
    auto v = Qualifier::negate(Qualifier::exists(q("c")));
    CHECK(classify(*Qualifier::conj(u, v)) == classify(*Qualifier::conj(v, u)));
  }
}

TEST_CASE("eval on a hand-built document") {
  // n0 (a1=1) has child n1 (a2=1) which has child n2 (a2=2)
  Document doc{element("a", {{"a1", 1}}, {element("b", {{"a2", 1}}, {element("a", {{"a2", 2}})})})};
  DataTree t = encode_xml(doc, kSig);
  auto nodes = element_nodes(t, kSig);
  REQUIRE(nodes.size() == 3);
  const int n0 = nodes[0], n1 = nodes[1], n2 = nodes[2];

  NodePairs self = eval(t, kSig, *q("e"));
  CHECK(self == NodePairs{{n0, n0}, {n1, n1}, {n2, n2}});
  CHECK(eval(t, kSig, *q("c")) == NodePairs{{n0, n1}, {n1, n2}});
  CHECK(eval(t, kSig, *q("c*")).size() == 6);
  CHECK(eval(t, kSig, *q("rs")).empty());

  NodePairs p = eval(t, kSig, *q("rs*/c*[@a1 = (c/c*)/@a2]"));
  CHECK(p == NodePairs{{n0, n0}});
  CHECK_FALSE(satisfies(t, kSig, *q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]")));

  Document other{element("a", {{"a1", 3}}, {element("b", {{"a2", 1}}, {element("a", {{"a2", 2}})})})};
  CHECK(satisfies(encode_xml(other, kSig), kSig, *q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]")));

  auto filtered = eval(t, kSig, *q("c*[b]"));
  NodePairs expect;
  auto bs = eval_qual(t, kSig, *parse_qualifier("b", kSig));
  for (auto pr : eval(t, kSig, *q("c*")))
    if (bs.count(pr.second)) expect.insert(pr);
  CHECK(filtered == expect);
}

TEST_CASE("eval with root siblings") {
  Document doc{element("a", {{"a1", 2}}), element("b", {{"a1", 2}}), element("a")};
  DataTree t = encode_xml(doc, kSig);
  auto nodes = element_nodes(t, kSig);
  CHECK(eval(t, kSig, *q("rs")) == NodePairs{{nodes[0], nodes[1]}, {nodes[1], nodes[2]}});
  CHECK(eval(t, kSig, *q("rs*")).size() == 6);
  CHECK(satisfies(t, kSig, *q("e[@a1 = rs/@a1]")));
  CHECK_FALSE(satisfies(t, kSig, *q("e[@a1 != rs/@a1]")));
  CHECK(satisfies(t, kSig, *q("rs/rs[a]")));
}

TEST_CASE("compiled automata agree with eval") {
  auto docs = documents(60, 7);
  std::mt19937 rng(11);
  int mixed = 0;
  for (const auto& s : kQueries) {
    std::set<bool> outcomes;
    CAPTURE(s);
    auto query = q(s);
    Atra b = compile_query(*query, kSig);
    CHECK(b.num_states() <= kMaxStates);
    CHECK(hole_invariant(b));
    CHECK_NOTHROW(validate_query_automaton(b));
    Atra root = compile_qualifier(*Qualifier::exists(query), kSig);
    CHECK_FALSE(root.has_hole());
    for (const auto& doc : docs) {
      DataTree t = encode_xml(doc, kSig);
      CAPTURE(to_string(*q(s)));
      const bool sat = satisfies(t, kSig, *query);
      outcomes.insert(sat);
      CHECK(sat == has_final_run(root, t).accepted);
      NodePairs rel = eval(t, kSig, *query);
      auto nodes = element_nodes(t, kSig);
      for (int n : nodes)
        for (int trial = 0; trial < 3; ++trial) {
          std::vector<bool> holes(static_cast<std::size_t>(t.size()), false);
          bool expect = false;
          for (int m : nodes)
            if (rng() % 2) {
              holes[static_cast<std::size_t>(m)] = true;
              expect = expect || rel.count({n, m});
            }
          CHECK(accepts_at(b, t, n, &holes) == expect);
        }
    }
    mixed += outcomes.size() == 2 ? 1 : 0;
  }
  MESSAGE(mixed << " of " << kQueries.size() << " queries separate the documents");
  CHECK(mixed >= 12);
}

TEST_CASE("qualifier automata agree with eval at every node") {
  auto docs = documents(60, 3);
  const std::vector<std::string> quals = {"a", "!b", "a & c?", "!(c*[b]?)", "@a1 = e/@a2", "@a1 != rs/@a2",
                                          "@a2 = (c/rs*)/@a2", "!(@a1 = c/@a1) & rs?"};
  for (const auto& s : quals) {
    CAPTURE(s);
    auto u = parse_qualifier(s, kSig);
    Atra a = compile_qualifier(*u, kSig);
    for (const auto& doc : docs) {
      DataTree t = encode_xml(doc, kSig);
      auto sat = eval_qual(t, kSig, *u);
      for (int n : element_nodes(t, kSig)) CHECK(accepts_at(a, t, n) == (sat.count(n) > 0));
    }
  }
}

TEST_CASE("hole invariant") {
  Atra bad(kSig.alphabet(), {"s", "t"}, 0, 0);
  for (Letter x = 0; x < 2; ++x) {
    bad.set_delta(0, x, Formula::atom(1, 0, Update::Store));
    bad.set_delta(1, x, Formula::hole());
  }
  CHECK_FALSE(hole_invariant(bad));
  CHECK_THROWS_AS(validate_query_automaton(bad), ValidationError);
  Atra good = bad;
  for (Letter x = 0; x < 2; ++x) good.set_delta(0, x, Formula::atom(1, 0, Update::Keep));
  CHECK(hole_invariant(good));
}

TEST_CASE("substitute") {
  auto docs = documents(40, 5);
  const Atra top = universal_automaton(kSig.alphabet());
  for (const auto& s : {"c", "rs*", "c*[a]", "c | rs/rs"}) {
    Atra b = compile_query(*q(s), kSig);
    Atra by_sub = substitute(b, top);
    CHECK_FALSE(by_sub.has_hole());
    Atra by_exists = compile_qualifier(*Qualifier::exists(q(s)), kSig);
    for (const auto& doc : docs) {
      DataTree t = encode_xml(doc, kSig);
      CHECK(has_final_run(by_sub, t).accepted == has_final_run(by_exists, t).accepted);
    }
  }
  std::mt19937 rng(5);
  Atra p1 = compile_query(*q("c*"), kSig), p2 = compile_query(*q("rs[b]"), kSig), p3 = compile_query(*q("c"), kSig);
  Atra left_assoc = substitute(substitute(p1, p2), p3);
  Atra right_assoc = substitute(p1, substitute(p2, p3));
  for (const auto& doc : docs) {
    DataTree t = encode_xml(doc, kSig);
    std::vector<bool> holes(static_cast<std::size_t>(t.size()));
    for (std::size_t i = 0; i < holes.size(); ++i) holes[i] = rng() % 2;
    for (int n : element_nodes(t, kSig)) CHECK(accepts_at(left_assoc, t, n, &holes) == accepts_at(right_assoc, t, n, &holes));
  }
  CHECK_THROWS_AS(substitute(p1, universal_automaton({"x"})), ValidationError);
}

namespace {

FiniteOptions small_budget() {
  FiniteOptions o;
  o.budget = {200'000, 24};
  return o;
}

void check_certified(const XPathOutcome& r, const Query& query, const Dtd& d) {
  REQUIRE(r.verdict == Verdict::Sat);
  REQUIRE(r.witness);
  CHECK(r.certified);
  DataTree t = encode_xml(*r.witness, kSig);
  CHECK(satisfies(t, kSig, query));
  CHECK(dtd_accepts(d, t));
}

}  // namespace

TEST_CASE("well-formedness DTD accepts exactly the XML trees with sorted chains") {
  Dtd wf = well_formedness_dtd(kSig);
  int accepted = 0, total = 0;
  testing_support::for_each_tree(kSig.alphabet(), 4, 1, [&](const DataTree& t) {
    ++total;
    bool expect = is_xml_tree(t, kSig) && encode_xml(decode_xml(t, kSig), kSig).erase_data() == t.erase_data();
    CHECK(dtd_accepts(wf, t) == expect);
    accepted += expect ? 1 : 0;
  });
  CHECK(accepted > 20);
  CHECK(accepted < total);
}

TEST_CASE("DTD operations") {
  auto docs = documents(40, 9);
  Dtd any = universal_dtd(kSig);
  Dtd kid = root_has_child();
  Dtd both = intersect(kid, root_type_a());
  for (const auto& doc : docs) {
    DataTree t = encode_xml(doc, kSig);
    CHECK(dtd_accepts(any, t));
    CHECK(dtd_accepts(kid, t) == !doc[0].children.empty());
    CHECK(dtd_accepts(both, t) == (!doc[0].children.empty() && doc[0].type == "a"));
  }
  CHECK(dtd_accepts(single_a(), encode_xml({element("a")}, kSig)));
  CHECK_FALSE(dtd_accepts(single_a(), encode_xml({element("a"), element("a")}, kSig)));
  CHECK_THROWS_AS(Dtd(kSig, {"s"}, 0, {0}, {{0, 9, 0, 0}}), ValidationError);
}

TEST_CASE("product_with_dtd") {
  for (const auto& s : {"c", "e[a & !a]", "e[@a1 = e/@a2]", "c[b]"}) {
    CAPTURE(s);
    Atra a = compile_qualifier(*Qualifier::exists(q(s)), kSig);
    auto m = compile_finite(a);
    auto plain = nonempty_finite(*m, small_budget());
    auto prod = product_with_dtd(*m, universal_dtd(kSig));
    CHECK(nonempty_finite(*prod, small_budget()).verdict == plain.verdict);
    Dtd none(kSig, {"dead"}, 0, {}, {});
    CHECK(nonempty_finite(*product_with_dtd(*m, none), small_budget()).verdict == Verdict::Unsat);
  }
  auto m = compile_inclusion(product_safety(universal_automaton(kSig.alphabet()), empty_automaton(kSig.alphabet())));
  auto prod = product_with_dtd(*m, well_formedness_dtd(kSig));
  CHECK(epsilon_cycle_free(*prod));
  CHECK_THROWS_AS(product_with_dtd(*m, universal_dtd({{"x"}, {}})), ValidationError);
}

TEST_CASE("xpath_sat_finite") {
  Dtd any = universal_dtd(kSig);
  {
    auto query = q("e[a]");
    auto r = xpath_sat_finite(*query, single_a(), small_budget());
    check_certified(r, *query, single_a());
    CHECK(*r.witness == Document{element("a")});
  }
  CHECK(xpath_sat_finite(*q("e[a & !a]"), any, small_budget()).verdict == Verdict::Unsat);
  CHECK(xpath_sat_finite(*q("e[b]"), root_type_a(), small_budget()).verdict == Verdict::Unsat);
  CHECK(xpath_sat_finite(*q("e[!(c?)]"), root_has_child(), small_budget()).verdict == Verdict::Unsat);
  for (const auto& s : {"c/c[b]", "e[@a1 = e/@a2]", "e[@a1 != c/@a2]", "c[@a1 = rs/@a1]", "rs*/c*[@a1 = (c/c*)/@a2]"}) {
    CAPTURE(s);
    auto query = q(s);
    check_certified(xpath_sat_finite(*query, any, small_budget()), *query, any);
  }
  {
    auto query = q("c[b]");
    check_certified(xpath_sat_finite(*query, root_type_a(), small_budget()), *query, root_type_a());
  }
  // the root's a1 must differ from every a2 below it, and equal its child's a2
  auto contra = q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?) & @a1 = c/@a2]");
  CHECK(xpath_sat_finite(*contra, root_has_child(), small_budget()).verdict == Verdict::Unsat);
}

TEST_CASE("xpath_sat_safety") {
  Dtd any = universal_dtd(kSig);
  const Budget budget{200'000, 24};
  CHECK_THROWS_AS(xpath_sat_safety(*q("c"), any, budget), ValidationError);
  auto ex = q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]");
  CHECK(xpath_sat_safety(*ex, any, budget).verdict == Verdict::Sat);
  auto fin = xpath_sat_finite(*ex, any, small_budget());
  check_certified(fin, *ex, any);
  CHECK(encode_xml(*fin.witness, kSig).nonleaf_count() == 1);
  for (const auto& s : {"e", "e[!(c?)]", "e[a & !a]", "rs/rs[a]", "e[!(c[@a1 = rs/@a2]?)]"}) {
    CAPTURE(s);
    auto query = q(s);
    REQUIRE(is_safety(classify(*query)));
    for (const Dtd& d : {any, root_has_child(), root_type_a()}) {
      auto saf = xpath_sat_safety(*query, d, budget);
      auto finite = xpath_sat_finite(*query, d, small_budget());
      REQUIRE(saf.verdict != Verdict::Budget);
      REQUIRE(finite.verdict != Verdict::Budget);
      // a finite witness is also a witness among all trees
      if (finite.verdict == Verdict::Sat) CHECK(saf.verdict == Verdict::Sat);
    }
  }
  CHECK(xpath_sat_safety(*q("e[!(c?)]"), root_has_child(), budget).verdict == Verdict::Unsat);
}

TEST_CASE("Example safety query on two-node documents") {
  Atra a = compile_qualifier(*Qualifier::exists(q("e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]")), kSig);
  auto equal = encode_xml({element("a", {{"a1", 4}}, {element("b", {{"a2", 4}})})}, kSig);
  auto distinct = encode_xml({element("a", {{"a1", 4}}, {element("b", {{"a2", 5}})})}, kSig);
  CHECK_FALSE(has_final_run(a, equal).accepted);
  CHECK(has_final_run(a, distinct).accepted);
}

TEST_CASE("rejection of safety queries survives extensions") {
  // appending a last child or a last root sibling only replaces leaves of the encoding
  auto docs = documents(40, 13);
  std::mt19937 rng(17);
  for (const auto& s : {"e[!(rs*/c*[@a1 = (c/c*)/@a2]?)]", "e[!(c?)]", "e[!(c*[b]?)]", "e[!(c[@a1 != rs/@a2]?)]"}) {
    CAPTURE(s);
    Atra a = compile_qualifier(*Qualifier::exists(q(s)), kSig);
    for (const auto& doc : docs) {
      if (has_final_run(a, encode_xml(doc, kSig)).accepted) continue;
      for (int trial = 0; trial < 4; ++trial) {
        Document ext = doc;
        std::vector<std::vector<DocNode>*> lists{&ext};
        for (std::size_t i = 0; i < lists.size(); ++i)
          for (auto& n : *lists[i]) lists.push_back(&n.children);
        DocNode fresh = element(rng() % 2 ? "a" : "b");
        if (rng() % 2) fresh.atts["a1"] = 1 + rng() % 3;
        if (rng() % 2) fresh.atts["a2"] = 1 + rng() % 3;
        lists[rng() % lists.size()]->push_back(fresh);
        DataTree t = encode_xml(ext, kSig);
        CHECK_FALSE(has_final_run(a, t).accepted);
        CHECK_FALSE(satisfies(t, kSig, *q(s)));
      }
    }
  }
}
