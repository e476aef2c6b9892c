#include "dtsat/abstraction.hpp"
#include "dtsat/xpath.hpp"

namespace dtsat {

namespace {

constexpr std::size_t kMaxLabellings = 200'000;

// Data on attribute nodes, up to renaming, such that the document satisfies q.
// Element nodes keep fresh data.
std::optional<DataTree> lift_attributes(const DataTree& shape, const XmlSignature& sig, const Query& q) {
  DataTree t = shape;
  std::vector<int> atts;
  Datum fresh = 1'000'000;
  for (int v : t.nonleaf_nodes()) {
    if (sig.is_attribute(t.node(v).letter))
      atts.push_back(v);
    else
      t.node(v).datum = fresh++;
  }
  std::vector<Datum> label(atts.size(), 0);
  std::size_t tried = 0;
  // restricted growth strings
  auto rec = [&](auto&& self, std::size_t i, Datum used) -> bool {
    if (i == atts.size()) {
      if (++tried > kMaxLabellings) return false;
      for (std::size_t k = 0; k < atts.size(); ++k) t.node(atts[k]).datum = label[k];
      return satisfies(t, sig, q);
    }
    for (Datum d = 0; d <= used && tried <= kMaxLabellings; ++d) {
      label[i] = d;
      if (self(self, i + 1, std::max(used, d + 1))) return true;
    }
    return false;
  };
  if (rec(rec, 0, 0)) return t;
  return std::nullopt;
}

Dtd combined(const Dtd& d) { return intersect(well_formedness_dtd(d.signature()), d); }

}  // namespace

XPathOutcome xpath_sat_finite(const Query& q, const Dtd& d, const FiniteOptions& opts) {
  const XmlSignature& sig = d.signature();
  Atra a = compile_qualifier(*Qualifier::exists(std::make_shared<Query>(q)), sig);
  auto m = compile_finite(a);
  auto prod = product_with_dtd(*m, combined(d));
  auto r = nonempty_finite(*prod, opts);
  XPathOutcome out;
  out.verdict = r.verdict;
  out.stats = r.stats;
  if (r.verdict == Verdict::Sat && r.witness) {
    if (auto t = lift_attributes(*r.witness, sig, q)) {
      out.certified = dtd_accepts(d, *t);
      out.witness = decode_xml(*t, sig);
    } else {
      out.witness = decode_xml(*r.witness, sig);
    }
  }
  return out;
}

XPathOutcome xpath_sat_safety(const Query& q, const Dtd& d, const Budget& budget) {
  Fragment f = classify(q);
  if (!is_safety(f)) throw ValidationError("query is " + to_string(f) + ", not safety");
  const XmlSignature& sig = d.signature();
  Atra a = compile_qualifier(*Qualifier::exists(std::make_shared<Query>(q)), sig);
  auto m = compile_inclusion(product_safety(a, empty_automaton(a.alphabet())));
  auto prod = product_with_dtd(*m, combined(d));
  const auto& cm = *m;
  const auto& pm = *prod;
  XPathOutcome out;
  try {
    auto r = exists_infinite_with_P(pm, [&](StateId s) { return cm.prop(pm.machine_state(s)); }, budget);
    out.verdict = r.exists ? Verdict::Sat : Verdict::Unsat;
    out.stats = r.stats;
  } catch (const BudgetExceeded&) {
    out.verdict = Verdict::Budget;
  }
  return out;
}

}  // namespace dtsat
