#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtsat/common.hpp"
#include "dtsat/formula.hpp"
#include "dtsat/tree.hpp"

namespace dtsat {

struct Thread {
  int state = 0;
  Datum datum = 0;
  auto operator<=>(const Thread&) const = default;
};

/// Sorted, duplicate-free set of threads.
using Configuration = std::vector<Thread>;
Configuration normalize(Configuration g);

/// Forward alternating tree 1-register automaton. δ is a dense table over
/// Q × Σ × {tt, ff}; entries never set are False.
class Atra {
 public:
  Atra() = default;
  Atra(Alphabet alphabet, std::vector<std::string> states, int initial, StateSet finals);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<std::string>& states() const { return states_; }
  int num_states() const { return static_cast<int>(states_.size()); }
  int num_letters() const { return static_cast<int>(alphabet_.size()); }
  int initial() const { return initial_; }
  StateSet finals() const { return finals_; }
  bool is_final(int q) const { return contains(finals_, q); }
  StateSet all_states() const;

  const Formula& delta(int q, Letter a, bool eq) const { return delta_[index(q, a, eq)]; }
  void set_delta(int q, Letter a, bool eq, Formula f) { delta_[index(q, a, eq)] = std::move(f); }
  /// Sets both the tt and ff entries.
  void set_delta(int q, Letter a, const Formula& f) {
    set_delta(q, a, true, f);
    set_delta(q, a, false, f);
  }
  void set_finals(StateSet f) { finals_ = f; }
  void set_initial(int q) { initial_ = q; }

  int state_index(const std::string& name) const;
  bool has_hole() const;

  /// Checks atom ranges and, unless allow_hole, the absence of holes.
  void validate(bool allow_hole = false) const;

 private:
  std::size_t index(int q, Letter a, bool eq) const {
    return (static_cast<std::size_t>(q) * alphabet_.size() + static_cast<std::size_t>(a)) * 2 + (eq ? 1 : 0);
  }

  Alphabet alphabet_;
  std::vector<std::string> states_;
  int initial_ = 0;
  StateSet finals_ = 0;
  std::vector<Formula> delta_;
};

/// Threads induced in child `dir` by model `r` of a thread with register `reg`
/// at a node carrying `datum`.
void induced_threads(const Quadruple& r, int dir, Datum datum, Datum reg, Configuration& out);

/// Minimal successor pairs of G at a node labelled (letter, datum).
std::vector<std::pair<Configuration, Configuration>> step(const Atra& a, const Configuration& g, Letter letter,
                                                          Datum datum,
                                                          std::optional<bool> hole = std::nullopt);

/// Per-node configurations; indices follow DataTree node indices.
using Run = std::vector<Configuration>;

struct MembershipOptions {
  /// Nodes at which the hole atom is true; empty means the automaton has no holes.
  const std::vector<bool>* hole_nodes = nullptr;
  /// Start node (a subtree root) instead of the tree root.
  int start = 0;
  /// Register value of the initial thread; defaults to the start node's datum.
  std::optional<Datum> initial_register;
};

struct MembershipResult {
  bool accepted = false;
  Run run;  // filled when accepted
};

/// Final-run search on a finite tree. Per-thread acceptance is memoized on
/// (node, state, register).
MembershipResult has_final_run(const Atra& a, const DataTree& t, const MembershipOptions& opts = {});

/// Checks the lower-bound run relation and finality at leaves.
bool validate_run(const Atra& a, const DataTree& t, const Run& run, std::string* why = nullptr);

Atra dualize(const Atra& a);
Atra intersect(const Atra& a1, const Atra& a2);
Atra union_(const Atra& a1, const Atra& a2);

/// One-state automaton with no final states and δ ≡ ⊥.
Atra empty_automaton(const Alphabet& alphabet);
/// One final state with δ ≡ ⊤.
Atra universal_automaton(const Alphabet& alphabet);

/// Alphabet {b1, ..., bm, *}.
Alphabet bk_alphabet(int m);
Atra make_bk(int k, int m);
/// 2⇑k; throws BudgetExceeded when it does not fit in 64 bits.
std::uint64_t tower(int k);

}  // namespace dtsat
