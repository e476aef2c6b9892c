#include "dtsat/json_io.hpp"

#include <algorithm>

namespace dtsat {

namespace {

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

int index_of(const std::vector<std::string>& names, const std::string& n, const char* what) {
  auto it = std::find(names.begin(), names.end(), n);
  if (it == names.end()) throw ValidationError(std::string("unknown ") + what + " '" + n + "'");
  return static_cast<int>(it - names.begin());
}

}  // namespace

Json tree_to_json(const DataTree& t) {
  Json nodes = Json::array();
  for (const auto& r : to_raw(t)) {
    Json n{{"path", r.path}};
    n["letter"] = r.letter ? Json(*r.letter) : Json(nullptr);
    n["datum"] = r.datum ? Json(*r.datum) : Json(nullptr);
    if (r.truncated) n["truncated"] = true;
    nodes.push_back(n);
  }
  return {{"alphabet", t.alphabet()}, {"nodes", nodes}};
}

DataTree tree_from_json(const Json& j) {
  auto alphabet = field<Alphabet>(j, "alphabet");
  std::vector<RawNode> raw;
  for (const auto& n : field<Json>(j, "nodes")) {
    RawNode r;
    r.path = field<std::string>(n, "path");
    if (n.contains("letter") && !n["letter"].is_null()) r.letter = field<std::string>(n, "letter");
    if (n.contains("datum") && !n["datum"].is_null()) r.datum = field<Datum>(n, "datum");
    if (n.contains("truncated")) r.truncated = field<bool>(n, "truncated");
    raw.push_back(std::move(r));
  }
  return validate_tree(alphabet, raw);
}

Json atra_to_json(const Atra& a) {
  Json finals = Json::array();
  for (int q : members(a.finals())) finals.push_back(a.states()[static_cast<std::size_t>(q)]);
  Json delta = Json::array();
  for (int q = 0; q < a.num_states(); ++q)
    for (Letter x = 0; x < a.num_letters(); ++x)
      for (bool eq : {true, false}) {
        const Formula& f = a.delta(q, x, eq);
        if (f.is_false()) continue;
        delta.push_back({{"state", a.states()[static_cast<std::size_t>(q)]},
                         {"letter", a.alphabet()[static_cast<std::size_t>(x)]},
                         {"eq", eq},
                         {"formula", f.to_sexpr(a.states())}});
      }
  return {{"alphabet", a.alphabet()},
          {"states", a.states()},
          {"initial", a.states()[static_cast<std::size_t>(a.initial())]},
          {"finals", finals},
          {"delta", delta}};
}

Atra atra_from_json(const Json& j) {
  auto alphabet = field<Alphabet>(j, "alphabet");
  auto states = field<std::vector<std::string>>(j, "states");
  if (states.empty() || states.size() > static_cast<std::size_t>(kMaxStates))
    throw ValidationError("an automaton needs 1.." + std::to_string(kMaxStates) + " states");
  int initial = index_of(states, field<std::string>(j, "initial"), "state");
  StateSet finals = 0;
  for (const auto& f : field<std::vector<std::string>>(j, "finals")) finals |= singleton(index_of(states, f, "state"));
  Atra a(alphabet, states, initial, finals);
  for (const auto& e : field<Json>(j, "delta")) {
    int q = index_of(states, field<std::string>(e, "state"), "state");
    Letter x = index_of(alphabet, field<std::string>(e, "letter"), "letter");
    Formula f = Formula::parse_sexpr(field<std::string>(e, "formula"), states);
    if (e.contains("eq"))
      a.set_delta(q, x, field<bool>(e, "eq"), f);
    else
      a.set_delta(q, x, f);
  }
  a.validate(true);
  return a;
}

namespace {

Json instr_to_json(const Instruction& l) {
  switch (l.op) {
    case Instruction::Op::Inc: return {"inc", l.counter};
    case Instruction::Op::Dec: return {"dec", l.counter};
    case Instruction::Op::Ifz: return {"ifz", l.counter};
    case Instruction::Op::Transfer: return {"transf", l.counter, l.targets};
  }
  return nullptr;
}

Instruction instr_from_json(const Json& j) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_string() || !j[1].is_number_unsigned())
    throw ValidationError("malformed instruction " + j.dump());
  const auto op = j[0].get<std::string>();
  const auto c = j[1].get<Counter>();
  if (op == "inc") return Instruction::inc(c);
  if (op == "dec") return Instruction::dec(c);
  if (op == "ifz") return Instruction::ifz(c);
  if (op == "transf") {
    if (j.size() != 3 || !j[2].is_array()) throw ValidationError("transf needs a target list");
    return Instruction::transfer(c, j[2].get<std::vector<Counter>>());
  }
  throw ValidationError("unknown instruction '" + op + "'");
}

}  // namespace

Json machine_to_json(const ExplicitMachine& m) {
  Json finals = Json::array(), transitions = Json::array();
  for (StateId q = 0; q < m.num_states(); ++q) {
    if (m.is_final(q)) finals.push_back(m.state_name(q));
    for (const auto& t : m.transitions(q)) {
      Json to = Json::array({m.state_name(t.to0)});
      if (t.letter) to.push_back(m.state_name(t.to1));
      transitions.push_back({{"from", m.state_name(q)},
                             {"letter", t.letter ? Json(m.alphabet()[static_cast<std::size_t>(*t.letter)]) : Json(nullptr)},
                             {"instr", instr_to_json(t.instr)},
                             {"to", to}});
    }
  }
  return {{"alphabet", m.alphabet()},
          {"states", m.states()},
          {"initial", m.state_name(m.initial())},
          {"finals", finals},
          {"counters", m.counters()},
          {"transitions", transitions}};
}

ExplicitMachine machine_from_json(const Json& j) {
  auto alphabet = field<Alphabet>(j, "alphabet");
  auto states = field<std::vector<std::string>>(j, "states");
  auto state = [&](const std::string& n) { return static_cast<StateId>(index_of(states, n, "state")); };
  StateId initial = state(field<std::string>(j, "initial"));
  std::vector<StateId> finals;
  for (const auto& f : field<std::vector<std::string>>(j, "finals")) finals.push_back(state(f));
  ExplicitMachine m(alphabet, states, initial, finals, field<std::uint32_t>(j, "counters"));
  for (const auto& t : field<Json>(j, "transitions")) {
    StateId from = state(field<std::string>(t, "from"));
    std::optional<Letter> letter;
    if (t.contains("letter") && !t["letter"].is_null())
      letter = index_of(alphabet, field<std::string>(t, "letter"), "letter");
    auto to = field<std::vector<std::string>>(t, "to");
    if (to.size() != (letter ? 2U : 1U))
      throw ValidationError(letter ? "letter transitions need two targets" : "ε-transitions need one target");
    m.add(from, letter, instr_from_json(field<Json>(t, "instr")), state(to[0]), letter ? state(to[1]) : 0);
  }
  return m;
}

namespace {

Json doc_node_to_json(const DocNode& n) {
  Json kids = Json::array();
  for (const auto& c : n.children) kids.push_back(doc_node_to_json(c));
  Json atts = Json::object();
  for (const auto& [k, v] : n.atts) atts[k] = v;
  return {{"type", n.type}, {"atts", atts}, {"children", kids}};
}

DocNode doc_node_from_json(const Json& j) {
  DocNode n;
  n.type = field<std::string>(j, "type");
  if (j.contains("atts")) n.atts = field<std::map<std::string, Datum>>(j, "atts");
  if (j.contains("children"))
    for (const auto& c : field<Json>(j, "children")) n.children.push_back(doc_node_from_json(c));
  return n;
}

}  // namespace

Json document_to_json(const Document& d) {
  Json out = Json::array();
  for (const auto& n : d) out.push_back(doc_node_to_json(n));
  return out;
}

Document document_from_json(const Json& j) {
  Document d;
  if (j.is_object()) {
    d.push_back(doc_node_from_json(j));
  } else if (j.is_array()) {
    for (const auto& n : j) d.push_back(doc_node_from_json(n));
  } else {
    throw ValidationError("a document is an object or an array of objects");
  }
  if (d.empty()) throw ValidationError("empty document");
  return d;
}

Json dtd_to_json(const Dtd& d) {
  const auto& names = d.states();
  const Alphabet alphabet = d.alphabet();
  Json finals = Json::array(), rules = Json::array();
  for (int q = 0; q < d.num_states(); ++q)
    if (d.is_final(q)) finals.push_back(names[static_cast<std::size_t>(q)]);
  for (const auto& r : d.rules())
    rules.push_back({names[static_cast<std::size_t>(r.from)], alphabet[static_cast<std::size_t>(r.letter)],
                     names[static_cast<std::size_t>(r.to0)], names[static_cast<std::size_t>(r.to1)]});
  return {{"types", d.signature().types},
          {"attributes", d.signature().attributes},
          {"states", names},
          {"initial", names[static_cast<std::size_t>(d.initial())]},
          {"finals", finals},
          {"transitions", rules}};
}

Dtd dtd_from_json(const Json& j) {
  XmlSignature sig{field<std::vector<std::string>>(j, "types"),
                   j.contains("attributes") ? field<std::vector<std::string>>(j, "attributes")
                                            : std::vector<std::string>{}};
  const Alphabet alphabet = sig.alphabet();
  for (const auto& t : sig.types)
    if (std::count(alphabet.begin(), alphabet.end(), t) != 1)
      throw ValidationError("element types and attribute names must be distinct");
  auto states = field<std::vector<std::string>>(j, "states");
  int initial = index_of(states, field<std::string>(j, "initial"), "state");
  std::vector<int> finals;
  for (const auto& f : field<std::vector<std::string>>(j, "finals")) finals.push_back(index_of(states, f, "state"));
  std::vector<Dtd::Rule> rules;
  for (const auto& r : field<Json>(j, "transitions")) {
    if (!r.is_array() || r.size() != 4) throw ValidationError("a DTD transition is [from, letter, to0, to1]");
    auto s = r.get<std::vector<std::string>>();
    rules.push_back({index_of(states, s[0], "state"), index_of(alphabet, s[1], "letter"),
                     index_of(states, s[2], "state"), index_of(states, s[3], "state")});
  }
  return Dtd(sig, states, initial, finals, rules);
}

Json stats_to_json(const SolverStats& s) {
  return {{"levels", s.levels}, {"retained", s.retained}, {"max_valuation_sum", s.max_valuation_sum}};
}

}  // namespace dtsat
