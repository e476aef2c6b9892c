#pragma once

#include <json.hpp>

#include "dtsat/atra.hpp"
#include "dtsat/counter.hpp"
#include "dtsat/tree.hpp"
#include "dtsat/xpath.hpp"

namespace dtsat {

using Json = nlohmann::json;

/// {"alphabet": [...], "nodes": [{"path": "01", "letter": "a" | null, "datum": 7 | null}]}
Json tree_to_json(const DataTree& t);
DataTree tree_from_json(const Json& j);

/// {"alphabet", "states", "initial", "finals", "delta": [{"state", "letter", "eq", "formula"}]}
Json atra_to_json(const Atra& a);
Atra atra_from_json(const Json& j);

/// {"alphabet", "states", "initial", "finals", "counters": k,
///  "transitions": [{"from", "letter": a | null, "instr": ["inc", c], "to": [q0, q1]}]}
/// Instructions: ["inc", c] | ["dec", c] | ["ifz", c] | ["transf", c, [c...]].
Json machine_to_json(const ExplicitMachine& m);
ExplicitMachine machine_from_json(const Json& j);

/// A forest: [{"type": a, "atts": {name: datum}, "children": [...]}]. A single
/// object is read as a one-root forest.
Json document_to_json(const Document& d);
Document document_from_json(const Json& j);

/// {"types", "attributes", "states", "initial", "finals",
///  "transitions": [[from, letter, to0, to1]]}
Json dtd_to_json(const Dtd& d);
Dtd dtd_from_json(const Json& j);

Json stats_to_json(const SolverStats& s);

}  // namespace dtsat
