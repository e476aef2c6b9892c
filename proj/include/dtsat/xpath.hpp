#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dtsat/atra.hpp"
#include "dtsat/counter.hpp"
#include "dtsat/tree.hpp"

namespace dtsat {

struct Query;
struct Qualifier;
using QueryPtr = std::shared_ptr<const Query>;
using QualifierPtr = std::shared_ptr<const Qualifier>;

struct Query {
  enum class Kind : std::uint8_t { Self, Child, NextSib, ChildStar, NextSibStar, Concat, Union, Filter };
  Kind kind = Kind::Self;
  QueryPtr lhs, rhs;  // Concat, Union; Filter uses lhs
  QualifierPtr qual;  // Filter

  static QueryPtr self();
  static QueryPtr child();
  static QueryPtr next_sibling();
  static QueryPtr child_star();
  static QueryPtr next_sibling_star();
  static QueryPtr concat(QueryPtr a, QueryPtr b);
  static QueryPtr union_(QueryPtr a, QueryPtr b);
  static QueryPtr filter(QueryPtr p, QualifierPtr u);
};

struct Qualifier {
  enum class Kind : std::uint8_t { Not, And, Exists, Type, AttrCmp };
  enum class Relation : std::uint8_t { Eq, Neq };
  /// First step of the right path of a comparison: ε, ▽/tail or ▷/tail.
  enum class Head : std::uint8_t { Self, Child, NextSib };

  Kind kind = Kind::Type;
  QualifierPtr lhs, rhs;  // Not uses lhs
  QueryPtr query;         // Exists; comparison tail
  std::string type;
  std::string attr1, attr2;
  Relation relation = Relation::Eq;
  Head head = Head::Self;

  static QualifierPtr negate(QualifierPtr u);
  static QualifierPtr conj(QualifierPtr a, QualifierPtr b);
  static QualifierPtr exists(QueryPtr p);
  static QualifierPtr type_test(std::string a);
  /// @attr1 rel (head/tail)/@attr2; the tail is ignored when head is Self.
  static QualifierPtr attr_cmp(std::string attr1, Relation rel, Head head, QueryPtr tail, std::string attr2);
};

std::string to_string(const Query& q);
std::string to_string(const Qualifier& u);

/// Syntax error at a character offset.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// The input is well formed but outside the forward fragment.
class ForwardnessError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

QueryPtr parse_query(const std::string& text, const XmlSignature& sig);
QualifierPtr parse_qualifier(const std::string& text, const XmlSignature& sig);

enum class Fragment { Safety, CoSafety, Both, Neither };
std::string to_string(Fragment f);
/// Parity of negations above every ▽, ▽* and ▷*.
Fragment classify(const Query& q);
Fragment classify(const Qualifier& u);
inline bool is_safety(Fragment f) { return f == Fragment::Safety || f == Fragment::Both; }

/// Σ-labelled nodes of an XML tree in document order.
std::vector<int> element_nodes(const DataTree& t, const XmlSignature& sig);

using NodePairs = std::set<std::pair<int, int>>;
/// Direct semantics over an XML tree; nodes are tree indices of Σ-labelled nodes.
NodePairs eval(const DataTree& t, const XmlSignature& sig, const Query& q);
std::set<int> eval_qual(const DataTree& t, const XmlSignature& sig, const Qualifier& u);
/// Some pair starts at the root.
bool satisfies(const DataTree& t, const XmlSignature& sig, const Query& q);

/// Automaton for the qualifier, run at a Σ-labelled node.
Atra compile_qualifier(const Qualifier& u, const XmlSignature& sig);
/// Query automaton: holes mark target nodes.
Atra compile_query(const Query& q, const XmlSignature& sig);
/// Disjoint union keeping b's initial state, each hole in δ_b(q, x, p)
/// replaced by δ_a(q_I', x, p). Unreachable states are dropped.
Atra substitute(const Atra& b, const Atra& a);
/// No successor-graph path from the initial state to a state with a hole in
/// its transitions uses a store atom.
bool hole_invariant(const Atra& b);
/// Throws ValidationError unless b is a well-formed query automaton.
void validate_query_automaton(const Atra& b);

/// Nondeterministic tree automaton without ε-transitions or counters.
/// Leaves must carry final states.
class Dtd {
 public:
  struct Rule {
    int from;
    Letter letter;
    int to0;
    int to1;
    auto operator<=>(const Rule&) const = default;
  };

  Dtd() = default;
  Dtd(XmlSignature sig, std::vector<std::string> states, int initial, std::vector<int> finals,
      std::vector<Rule> rules);

  const XmlSignature& signature() const { return sig_; }
  Alphabet alphabet() const { return sig_.alphabet(); }
  const std::vector<std::string>& states() const { return states_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  int initial() const { return initial_; }
  bool is_final(int q) const { return finals_[static_cast<std::size_t>(q)]; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<Rule>& rules(int q, Letter a) const;

 private:
  XmlSignature sig_;
  std::vector<std::string> states_;
  int initial_ = 0;
  std::vector<bool> finals_;
  std::vector<Rule> rules_;
  std::vector<std::vector<Rule>> by_state_letter_;
};

/// One final state looping on every letter.
Dtd universal_dtd(const XmlSignature& sig);
/// Accepts exactly the XML trees whose attribute chains are in signature order.
Dtd well_formedness_dtd(const XmlSignature& sig);
Dtd intersect(const Dtd& a, const Dtd& b);
bool dtd_accepts(const Dtd& d, const DataTree& t);

/// Synchronous product of a counter machine with a DTD.
class DtdProduct : public Machine {
 public:
  DtdProduct(const Machine& m, Dtd d);

  const Alphabet& alphabet() const override { return m_.alphabet(); }
  StateId initial() const override { return initial_; }
  bool is_final(StateId q) const override;
  const std::vector<Transition>& transitions(StateId q) const override;
  std::string state_name(StateId q) const override;
  std::string counter_name(Counter c) const override { return m_.counter_name(c); }

  StateId machine_state(StateId q) const;
  int dtd_state(StateId q) const;

 private:
  StateId intern(StateId m, int d) const;

  const Machine& m_;
  Dtd d_;
  StateId initial_ = 0;
  mutable std::recursive_mutex mu_;
  mutable std::vector<std::pair<StateId, int>> states_;
  mutable std::unordered_map<std::uint64_t, StateId> index_;
  mutable std::unordered_map<StateId, std::vector<Transition>> delta_;
};

std::unique_ptr<DtdProduct> product_with_dtd(const Machine& m, const Dtd& d);

struct XPathOutcome {
  Verdict verdict = Verdict::Unsat;
  std::optional<Document> witness;
  SolverStats stats;
  bool certified = false;
};

/// Satisfiability over finite documents valid for d.
XPathOutcome xpath_sat_finite(const Query& q, const Dtd& d, const FiniteOptions& opts = {});
/// Satisfiability over finite or infinite documents valid for d; q must be a
/// safety query. Never returns a witness.
XPathOutcome xpath_sat_safety(const Query& q, const Dtd& d, const Budget& budget = {});

}  // namespace dtsat
