#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>

#include "dtsat/abstraction.hpp"
#include "dtsat/json_io.hpp"
#include "dtsat/xpath.hpp"

using namespace dtsat;

namespace {

enum Exit { kPositive = 0, kNegative = 1, kUsage = 2, kBudget = 3, kInternal = 4 };

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not JSON: " + e.what());
  }
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

struct BudgetFlags {
  std::size_t levels = 0;
  std::size_t valsum = 0;

  Budget resolve() const {
    Budget b;
    if (const char* e = std::getenv("DTSAT_BUDGET_LEVELS")) b.max_levels = parse_env("DTSAT_BUDGET_LEVELS", e);
    if (const char* e = std::getenv("DTSAT_BUDGET_VALSUM")) b.max_valuation_sum = parse_env("DTSAT_BUDGET_VALSUM", e);
    if (levels) b.max_levels = levels;
    if (valsum) b.max_valuation_sum = valsum;
    return b;
  }

  static std::size_t parse_env(const char* name, const char* value) {
    try {
      std::size_t pos = 0;
      auto v = std::stoull(value, &pos);
      if (pos == std::string(value).size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string(name) + " must be a positive integer");
  }
};

void add_budget(CLI::App* cmd, BudgetFlags& b) {
  cmd->add_option("--levels,--budget", b.levels,
                  "Explored level cap (default 1000000, env DTSAT_BUDGET_LEVELS)");
  cmd->add_option("--valsum", b.valsum, "Valuation-sum cap (default 64, env DTSAT_BUDGET_VALSUM)");
}

int emit(Json out, int code, const Clock& clock) {
  if (out.contains("stats")) out["stats"]["wall_ms"] = clock.ms();
  std::cout << out.dump() << "\n";
  return code;
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Sat: return kPositive;
    case Verdict::Unsat: return kNegative;
    case Verdict::Budget: return kBudget;
  }
  return kInternal;
}

void write_automaton(const Atra& a, const std::string& out) {
  std::string text = atra_to_json(a).dump();
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write '" + out + "'");
  f << text << "\n";
}

// ---------------------------------------------------------------- xpath helpers

// Names used by a query when no signature is given.
XmlSignature infer_signature(const std::string& text) {
  static const std::set<std::string> kKeywords = {"e",  "c",  "rs",     "c*",       "cs*",      "rs*",
                                                  "p",  "p*", "ls",     "ls*",      "parent",   "ancestor",
                                                  "ancestor-or-self",   "preceding", "preceding-sibling"};
  XmlSignature sig;
  std::regex word(R"((@\s*)?([A-Za-z_][A-Za-z0-9_.\-]*\*?))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), word); it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[2];
    auto& list = (*it)[1].matched ? sig.attributes : sig.types;
    if (!(*it)[1].matched && kKeywords.count(name)) continue;
    if (std::find(list.begin(), list.end(), name) == list.end()) list.push_back(name);
  }
  return sig;
}

void merge(XmlSignature& into, const XmlSignature& from) {
  for (const auto& t : from.types)
    if (std::find(into.types.begin(), into.types.end(), t) == into.types.end()) into.types.push_back(t);
  for (const auto& a : from.attributes)
    if (std::find(into.attributes.begin(), into.attributes.end(), a) == into.attributes.end())
      into.attributes.push_back(a);
}

XmlSignature document_signature(const Document& d) {
  XmlSignature sig;
  std::function<void(const DocNode&)> go = [&](const DocNode& n) {
    merge(sig, {{n.type}, {}});
    for (const auto& [k, _] : n.atts) merge(sig, {{}, {k}});
    for (const auto& c : n.children) go(c);
  };
  for (const auto& n : d) go(n);
  return sig;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// A query, or a qualifier u read as e[u].
QueryPtr read_query(const std::string& text, const XmlSignature& sig) {
  try {
    return parse_query(text, sig);
  } catch (const ForwardnessError&) {
    throw;
  } catch (const ParseError& first) {
    try {
      return Query::filter(Query::self(), parse_qualifier(text, sig));
    } catch (const ParseError&) {
      throw first;
    }
  }
}

struct XPathFlags {
  std::string query;
  std::string dtd;
  std::string doc;
  std::string types;
  std::string attributes;
  BudgetFlags budget;
  std::string policy = "focused";
};

XmlSignature flag_signature(const XPathFlags& f) {
  return XmlSignature{split_list(f.types), split_list(f.attributes)};
}

Dtd resolve_dtd(const XPathFlags& f) {
  if (!f.dtd.empty()) return dtd_from_json(read_json(f.dtd));
  XmlSignature sig = flag_signature(f);
  merge(sig, infer_signature(f.query));
  if (sig.types.empty()) throw ValidationError("no element types: give --dtd or --types");
  return universal_dtd(sig);
}

SearchPolicy parse_policy(const std::string& s) {
  if (s == "focused") return SearchPolicy::Focused;
  if (s == "synchronous") return SearchPolicy::Synchronous;
  if (s == "branchwise") return SearchPolicy::Branchwise;
  throw ValidationError("unknown policy '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision procedures for forward alternating tree register automata, tree counter machines and forward XPath.\n"
               "Every command prints one line of JSON. Exit codes: 0 positive, 1 negative, 2 usage or validation error,\n"
               "3 budget exhausted, 4 internal error. Budgets default to 1000000 explored levels and valuation sum 64."};
  app.require_subcommand(1);
  app.add_flag("--json", "JSON output (the only mode)");
  Clock clock;
  std::function<int()> run;

  // ---------------------------------------------------------------- atra
  auto* atra = app.add_subcommand("atra", "Alternating tree 1-register automata");
  atra->require_subcommand(1);
  std::string a_file, b_file, t_file, out_file, mode = "fin";
  int k = 1, m = 0;
  BudgetFlags atra_budget;
  std::string atra_policy = "focused";

  auto* member = atra->add_subcommand("member", "Acceptance of a finite data tree");
  member->add_option("--mode", mode, "fin or saf; they coincide on finite trees")->check(CLI::IsMember({"fin", "saf"}));
  member->add_option("automaton", a_file)->required();
  member->add_option("tree", t_file)->required();
  member->callback([&] {
    run = [&] {
      Atra a = atra_from_json(read_json(a_file));
      DataTree t = tree_from_json(read_json(t_file));
      if (t.alphabet() != a.alphabet()) throw ValidationError("tree and automaton alphabets differ");
      for (const auto& n : t.nodes())
        if (n.truncated) throw ValidationError("membership needs a complete finite tree");
      auto r = has_final_run(a, t);
      if (r.accepted && !validate_run(a, t, r.run)) throw InternalError("run failed validation");
      return emit({{"result", r.accepted ? "ACCEPTED" : "REJECTED"}}, r.accepted ? kPositive : kNegative, clock);
    };
  });

  auto* nfin = atra->add_subcommand("nonempty-fin", "Nonemptiness over finite data trees");
  nfin->add_option("automaton", a_file)->required();
  add_budget(nfin, atra_budget);
  nfin->add_option("--policy", atra_policy, "focused, synchronous or branchwise");
  nfin->callback([&] {
    run = [&] {
      Atra a = atra_from_json(read_json(a_file));
      FiniteOptions opts;
      opts.budget = atra_budget.resolve();
      opts.policy = parse_policy(atra_policy);
      auto r = atra_nonempty_finite(a, opts);
      Json out{{"result", to_string(r.verdict)}, {"stats", stats_to_json(r.stats)}};
      if (r.verdict == Verdict::Sat) {
        if (!r.certified || !r.witness || !has_final_run(a, *r.witness).accepted)
          throw InternalError("witness could not be certified");
        out["witness"] = tree_to_json(*r.witness);
      }
      return emit(out, verdict_code(r.verdict), clock);
    };
  });

  auto* nsaf = atra->add_subcommand("nonempty-saf", "Nonemptiness over finite or infinite data trees (safety acceptance)");
  nsaf->add_option("automaton", a_file)->required();
  add_budget(nsaf, atra_budget);
  nsaf->callback([&] {
    run = [&] {
      Atra a = atra_from_json(read_json(a_file));
      bool ne = atra_nonempty_safety(a, atra_budget.resolve());
      return emit({{"result", ne ? "NONEMPTY" : "EMPTY"}, {"stats", Json::object()}}, ne ? kPositive : kNegative, clock);
    };
  });

  auto* incl = atra->add_subcommand("inclusion", "Safety-language inclusion L(a) ⊆ L(b)");
  incl->add_option("a", a_file)->required();
  incl->add_option("b", b_file)->required();
  add_budget(incl, atra_budget);
  incl->callback([&] {
    run = [&] {
      Atra a = atra_from_json(read_json(a_file));
      Atra b = atra_from_json(read_json(b_file));
      bool holds = atra_inclusion_safety(a, b, atra_budget.resolve());
      return emit({{"result", holds ? "HOLDS" : "FAILS"}, {"stats", Json::object()}}, holds ? kPositive : kNegative,
                  clock);
    };
  });

  auto* dual = atra->add_subcommand("dual", "Dual automaton (complement)");
  dual->add_option("automaton", a_file)->required();
  dual->add_option("--out", out_file, "Output file (default stdout)");
  dual->callback([&] {
    run = [&] {
      write_automaton(dualize(atra_from_json(read_json(a_file))), out_file);
      return kPositive;
    };
  });

  for (const auto& [name, conj] : {std::pair{"and", true}, std::pair{"or", false}}) {
    auto* op = atra->add_subcommand(name, conj ? "Intersection" : "Union");
    op->add_option("a", a_file)->required();
    op->add_option("b", b_file)->required();
    op->add_option("--out", out_file, "Output file (default stdout)");
    op->callback([&, conj = conj] {
      run = [&, conj] {
        Atra a = atra_from_json(read_json(a_file));
        Atra b = atra_from_json(read_json(b_file));
        write_automaton(conj ? intersect(a, b) : union_(a, b), out_file);
        return kPositive;
      };
    });
  }

  auto* bk = atra->add_subcommand("gen-bk", "The B_k automaton over {b1..bm, *}");
  bk->add_option("--k", k, "k >= 1")->required();
  bk->add_option("--m", m, "m >= k (default k)");
  bk->add_option("--out", out_file, "Output file (default stdout)");
  bk->callback([&] {
    run = [&] {
      write_automaton(make_bk(k, m ? m : k), out_file);
      return kPositive;
    };
  });

  // ---------------------------------------------------------------- itca
  auto* itca = app.add_subcommand("itca", "Incrementing tree counter automata");
  itca->require_subcommand(1);
  std::string m_file;
  std::size_t block_bound = 64;
  BudgetFlags itca_budget;
  std::string itca_policy = "focused";

  auto* inon = itca->add_subcommand("nonempty", "Nonemptiness over finite trees");
  inon->add_option("machine", m_file)->required();
  add_budget(inon, itca_budget);
  inon->add_option("--policy", itca_policy, "focused, synchronous or branchwise");
  inon->add_option("--block-bound", block_bound, "Block length used to re-check the witness (default 64)");
  inon->callback([&] {
    run = [&] {
      ExplicitMachine mach = machine_from_json(read_json(m_file));
      FiniteOptions opts;
      opts.budget = itca_budget.resolve();
      opts.policy = parse_policy(itca_policy);
      auto r = nonempty_finite(mach, opts);
      Json out{{"result", to_string(r.verdict)}, {"stats", stats_to_json(r.stats)}};
      if (r.verdict == Verdict::Sat) {
        if (!r.witness || !itca_accepts(mach, *r.witness, block_bound))
          throw InternalError("witness could not be certified");
        out["witness"] = tree_to_json(*r.witness);
      }
      return emit(out, verdict_code(r.verdict), clock);
    };
  });

  auto* imem = itca->add_subcommand("member", "Acceptance of a finite tree with bounded blocks");
  imem->add_option("machine", m_file)->required();
  imem->add_option("tree", t_file)->required();
  imem->add_option("--block-bound", block_bound, "Maximal block length (default 64)");
  imem->callback([&] {
    run = [&] {
      ExplicitMachine mach = machine_from_json(read_json(m_file));
      DataTree t = tree_from_json(read_json(t_file));
      if (t.alphabet() != mach.alphabet()) throw ValidationError("tree and machine alphabets differ");
      bool ok = itca_accepts(mach, t, block_bound);
      return emit({{"result", ok ? "ACCEPTED" : "REJECTED"}}, ok ? kPositive : kNegative, clock);
    };
  });

  // ---------------------------------------------------------------- xpath
  auto* xpath = app.add_subcommand("xpath", "Forward XPath");
  xpath->require_subcommand(1);
  XPathFlags xf;
  auto add_sig = [&](CLI::App* cmd) {
    cmd->add_option("--types", xf.types, "Comma-separated element types");
    cmd->add_option("--attributes", xf.attributes, "Comma-separated attribute names");
  };

  auto* parse = xpath->add_subcommand("parse", "Parse and print a query");
  parse->add_option("query", xf.query)->required();
  add_sig(parse);
  parse->callback([&] {
    run = [&] {
      XmlSignature sig = flag_signature(xf);
      merge(sig, infer_signature(xf.query));
      QueryPtr q = read_query(xf.query, sig);
      return emit({{"result", "OK"}, {"query", to_string(*q)}, {"fragment", to_string(classify(*q))}}, kPositive,
                  clock);
    };
  });

  auto* cls = xpath->add_subcommand("classify", "Safety / co-safety classification");
  cls->add_option("query", xf.query)->required();
  add_sig(cls);
  cls->callback([&] {
    run = [&] {
      XmlSignature sig = flag_signature(xf);
      merge(sig, infer_signature(xf.query));
      QueryPtr q = read_query(xf.query, sig);
      return emit({{"result", to_string(classify(*q))}}, kPositive, clock);
    };
  });

  auto* ev = xpath->add_subcommand("eval", "Evaluate a query on a document");
  ev->add_option("query", xf.query)->required();
  ev->add_option("--doc", xf.doc, "Document JSON")->required();
  add_sig(ev);
  ev->callback([&] {
    run = [&] {
      Document doc = document_from_json(read_json(xf.doc));
      XmlSignature sig = flag_signature(xf);
      merge(sig, document_signature(doc));
      merge(sig, infer_signature(xf.query));
      QueryPtr q = read_query(xf.query, sig);
      DataTree t = encode_xml(doc, sig);
      auto nodes = element_nodes(t, sig);
      auto id = [&](int n) { return std::find(nodes.begin(), nodes.end(), n) - nodes.begin(); };
      Json pairs = Json::array();
      for (auto [a, b] : eval(t, sig, *q)) pairs.push_back({id(a), id(b)});
      bool sat = satisfies(t, sig, *q);
      return emit({{"result", sat ? "SAT" : "UNSAT"}, {"pairs", pairs}}, sat ? kPositive : kNegative, clock);
    };
  });

  auto* sfin = xpath->add_subcommand("sat-fin", "Satisfiability over finite documents");
  sfin->add_option("query", xf.query)->required();
  sfin->add_option("--dtd", xf.dtd, "DTD JSON (default: every document over --types/--attributes)");
  add_sig(sfin);
  add_budget(sfin, xf.budget);
  sfin->add_option("--policy", xf.policy, "focused, synchronous or branchwise");
  sfin->callback([&] {
    run = [&] {
      Dtd d = resolve_dtd(xf);
      QueryPtr q = read_query(xf.query, d.signature());
      FiniteOptions opts;
      opts.budget = xf.budget.resolve();
      opts.policy = parse_policy(xf.policy);
      auto r = xpath_sat_finite(*q, d, opts);
      Json out{{"result", to_string(r.verdict)}, {"stats", stats_to_json(r.stats)}};
      if (r.verdict == Verdict::Sat) {
        if (!r.certified || !r.witness) throw InternalError("witness could not be certified");
        DataTree t = encode_xml(*r.witness, d.signature());
        if (!satisfies(t, d.signature(), *q) || !dtd_accepts(d, t)) throw InternalError("witness failed re-evaluation");
        out["witness"] = document_to_json(*r.witness);
      }
      return emit(out, verdict_code(r.verdict), clock);
    };
  });

  auto* ssaf = xpath->add_subcommand("sat-saf", "Satisfiability of a safety query over finite or infinite documents");
  ssaf->add_option("query", xf.query)->required();
  ssaf->add_option("--dtd", xf.dtd, "DTD JSON (default: every document over --types/--attributes)");
  add_sig(ssaf);
  add_budget(ssaf, xf.budget);
  ssaf->callback([&] {
    run = [&] {
      Dtd d = resolve_dtd(xf);
      QueryPtr q = read_query(xf.query, d.signature());
      auto r = xpath_sat_safety(*q, d, xf.budget.resolve());
      return emit({{"result", to_string(r.verdict)}, {"stats", stats_to_json(r.stats)}}, verdict_code(r.verdict),
                  clock);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPositive : kUsage;
  }
  try {
    return run();
  } catch (const BudgetExceeded& e) {
    return emit({{"result", "BUDGET"}, {"error", e.what()}, {"stats", Json::object()}}, kBudget, clock);
  } catch (const ValidationError& e) {
    return emit({{"result", "ERROR"}, {"error", e.what()}}, kUsage, clock);
  } catch (const nlohmann::json::exception& e) {
    return emit({{"result", "ERROR"}, {"error", e.what()}}, kUsage, clock);
  } catch (const InternalError& e) {
    return emit({{"result", "ERROR"}, {"error", std::string("internal: ") + e.what()}}, kInternal, clock);
  } catch (const std::exception& e) {
    return emit({{"result", "ERROR"}, {"error", std::string("internal: ") + e.what()}}, kInternal, clock);
  }
}
