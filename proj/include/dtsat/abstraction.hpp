#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>

#include "dtsat/atra.hpp"
#include "dtsat/counter.hpp"

namespace dtsat {

/// Number of data per bundle; only nonzero counts are stored.
using AbstractConfiguration = std::map<StateSet, std::uint32_t>;

AbstractConfiguration abstract(const Configuration& g);
/// Pointwise ≤.
bool abstract_leq(const AbstractConfiguration& a, const AbstractConfiguration& b);

/// Minimal quadruples covering one minimal model of δ(q, a, eq) for every q in S.
std::vector<Quadruple> covering_quadruples(const Atra& a, Letter letter, StateSet s, bool eq);

using AbstractPair = std::pair<AbstractConfiguration, AbstractConfiguration>;

/// Minimal pairs (w0, w1) with v →_a^{Q₌} w0, w1. Throws ValidationError when
/// Q₌ is nonempty and v(Q₌) = 0.
std::vector<AbstractPair> abstract_successors(const Atra& a, const AbstractConfiguration& v, Letter letter,
                                              StateSet q_eq);

/// A_∩ for a1 and the dual of a2, with its state partition.
struct ProductAtra {
  Atra atra;
  StateSet q1 = 0;
  StateSet q2 = 0;
};
ProductAtra product_safety(const Atra& a1, const Atra& a2);

/// Implicit counter machine guessing abstract runs. In finite mode it is an
/// ITCA (loop (3) with ε-cycles); in inclusion mode it is an ε-cycle-free
/// ITCANT with atomic transfers and a prop register.
class CompiledMachine : public Machine {
 public:
  enum class Mode { Finite, Inclusion };

  CompiledMachine(Atra a, Mode mode, StateSet q2 = 0);

  const Alphabet& alphabet() const override { return a_.alphabet(); }
  StateId initial() const override { return initial_; }
  bool is_final(StateId q) const override;
  const std::vector<Transition>& transitions(StateId q) const override;
  std::string state_name(StateId q) const override;
  std::string counter_name(Counter c) const override;

  /// States whose prop register is set.
  bool prop(StateId q) const;
  Mode mode() const { return mode_; }
  const Atra& automaton() const { return a_; }
  std::size_t materialized_states() const;

  /// Counter holding the number of data with bundle S.
  Counter bundle_counter(StateSet s) const;

  struct State {
    std::uint8_t phase = 0;
    bool root = false;
    bool prop = false;
    std::uint8_t dir = 0;
    Letter letter = 0;
    std::uint32_t idx = 0;
    std::uint32_t supp = 0;
    std::uint32_t nsupp = 0;
    std::uint32_t item = 0;
    StateSet qeq = 0;
    StateSet acc0 = 0;
    StateSet acc1 = 0;
  };

 private:
  StateId intern(const State& s) const;
  std::uint32_t intern_support(std::vector<StateSet> supp) const;
  Counter quad_counter(const Quadruple& q) const;
  std::vector<Transition> generate(const State& s) const;
  State loop_state(Letter letter, std::uint32_t idx, StateSet acc0, StateSet acc1, std::uint32_t supp,
                   bool prop) const;
  State pos_state(Letter letter, int dir, std::uint32_t idx, StateSet acc, std::uint32_t supp, bool prop) const;
  State move_state(Letter letter, int dir, std::uint32_t idx, std::uint32_t supp, std::uint32_t nsupp,
                   bool prop) const;
  State prop_state(std::uint32_t nsupp, bool prop) const;
  const std::vector<Quadruple>& quads(Letter letter, StateSet s, bool eq) const;
  const std::vector<Quadruple>& cells(Letter letter, std::uint32_t supp) const;

  Atra a_;
  Mode mode_;
  StateSet q2_;
  StateId initial_ = 0;

  mutable std::recursive_mutex mu_;
  mutable std::vector<State> states_;
  mutable std::unordered_map<std::string, StateId> state_index_;
  mutable std::unordered_map<StateId, std::vector<Transition>> delta_;
  mutable std::vector<std::vector<StateSet>> supports_;
  mutable std::map<std::vector<StateSet>, std::uint32_t> support_index_;
  mutable std::map<StateSet, Counter> bundle_counters_;
  mutable std::map<Quadruple, Counter> quad_counters_;
  mutable std::vector<std::string> counter_names_;
  mutable std::map<std::tuple<Letter, StateSet, bool>, std::vector<Quadruple>> quad_cache_;
  mutable std::map<std::pair<Letter, std::uint32_t>, std::vector<Quadruple>> cell_cache_;
};

std::unique_ptr<CompiledMachine> compile_finite(const Atra& a);
std::unique_ptr<CompiledMachine> compile_inclusion(const ProductAtra& p);

struct AtraFiniteOutcome {
  Verdict verdict = Verdict::Unsat;
  std::optional<DataTree> witness;  // data tree accepted by the automaton
  SolverStats stats;
  bool certified = false;
};

/// Finite-tree nonemptiness through the compiled ITCA.
AtraFiniteOutcome atra_nonempty_finite(const Atra& a, const FiniteOptions& opts = {});

/// Data labelling of `shape` with at most #nonleaf distinct data accepted by
/// `a`, by search over labellings up to renaming.
std::optional<DataTree> lift_witness(const Atra& a, const DataTree& shape);

/// L_saf(a1) ⊆ L_saf(a2). Throws BudgetExceeded.
bool atra_inclusion_safety(const Atra& a1, const Atra& a2, const Budget& budget = {});
/// L_saf(a) ≠ ∅, as non-inclusion in the empty automaton.
bool atra_nonempty_safety(const Atra& a, const Budget& budget = {});

}  // namespace dtsat
