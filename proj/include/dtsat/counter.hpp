#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dtsat/common.hpp"
#include "dtsat/tree.hpp"

namespace dtsat {

using Counter = std::uint32_t;
using StateId = std::uint32_t;

/// Sparse counter valuation; absent counters are 0. Entries are sorted and nonzero.
class Valuation {
 public:
  Valuation() = default;
  Valuation(std::initializer_list<std::pair<Counter, std::uint32_t>> init);

  std::uint32_t get(Counter c) const;
  void set(Counter c, std::uint32_t v);
  void add(Counter c, std::uint32_t v) { set(c, get(c) + v); }
  std::uint64_t sum() const;
  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<Counter, std::uint32_t>>& entries() const { return entries_; }

  /// Pointwise ≤.
  bool leq(const Valuation& o) const;
  Valuation lub(const Valuation& o) const;
  /// Pointwise max(0, this - o).
  Valuation minus(const Valuation& o) const;
  Valuation plus(const Valuation& o) const;

  auto operator<=>(const Valuation&) const = default;
  bool operator==(const Valuation&) const = default;

 private:
  std::vector<std::pair<Counter, std::uint32_t>> entries_;
};

struct ValuationHash {
  std::size_t operator()(const Valuation& v) const noexcept;
};

struct Instruction {
  enum class Op : std::uint8_t { Inc, Dec, Ifz, Transfer };
  Op op = Op::Ifz;
  Counter counter = 0;
  std::vector<Counter> targets;  // Transfer only; sorted

  static Instruction inc(Counter c) { return {Op::Inc, c, {}}; }
  static Instruction dec(Counter c) { return {Op::Dec, c, {}}; }
  static Instruction ifz(Counter c) { return {Op::Ifz, c, {}}; }
  static Instruction transfer(Counter c, std::vector<Counter> to);
  /// ifz c ≡ transf c ∅
  Instruction as_transfer() const;
  bool operator==(const Instruction&) const = default;
};

/// Error-free semantics.
std::vector<Valuation> exact_step(const Valuation& v, const Instruction& l);
/// Error-free semantics plus decrementing 0 to 0.
std::vector<Valuation> lazy_step(const Valuation& v, const Instruction& l);
/// Semantics with incrementing errors, inflating each counter in `support` by up
/// to `inflation` before and after the exact step (test oracle).
std::vector<Valuation> errorful_step(const Valuation& v, const Instruction& l, const std::vector<Counter>& support,
                                     std::uint32_t inflation);

struct Transition {
  std::optional<Letter> letter;  // nullopt for ε
  Instruction instr;
  StateId to0 = 0;
  StateId to1 = 0;  // letter transitions only
};

/// Counter machine with ε-transitions. Transitions are produced on demand so
/// compiled machines never materialize their state space.
class Machine {
 public:
  virtual ~Machine() = default;
  virtual const Alphabet& alphabet() const = 0;
  virtual StateId initial() const = 0;
  virtual bool is_final(StateId q) const = 0;
  virtual const std::vector<Transition>& transitions(StateId q) const = 0;
  virtual std::string state_name(StateId q) const = 0;
  virtual std::string counter_name(Counter c) const { return "c" + std::to_string(c); }
};

/// Table-backed machine. Counters are 1..k.
class ExplicitMachine : public Machine {
 public:
  ExplicitMachine(Alphabet alphabet, std::vector<std::string> states, StateId initial, std::vector<StateId> finals,
                  std::uint32_t k);

  void add(StateId from, std::optional<Letter> letter, Instruction instr, StateId to0, StateId to1 = 0);

  const Alphabet& alphabet() const override { return alphabet_; }
  StateId initial() const override { return initial_; }
  bool is_final(StateId q) const override { return finals_[q]; }
  const std::vector<Transition>& transitions(StateId q) const override { return delta_[q]; }
  std::string state_name(StateId q) const override { return states_[q]; }

  std::size_t num_states() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  std::uint32_t counters() const { return k_; }
  bool uses_ifz() const;
  bool uses_transfer() const;
  bool epsilon_cycle_free() const;

 private:
  Alphabet alphabet_;
  std::vector<std::string> states_;
  StateId initial_;
  std::vector<bool> finals_;
  std::uint32_t k_;
  std::vector<std::vector<Transition>> delta_;
};

/// Checks for ε-cycles among the states reachable from the initial state, up to
/// `max_states` explored states (throws BudgetExceeded beyond).
bool epsilon_cycle_free(const Machine& m, std::size_t max_states = 2'000'000);

struct Config {
  StateId state = 0;
  Valuation val;
  bool root = false;  // initial configuration before its first letter transition
  auto operator<=>(const Config&) const = default;
  bool operator==(const Config&) const = default;
};

bool config_leq(const Config& a, const Config& b);

/// Sorted, duplicate-free set of configurations.
using Level = std::vector<Config>;
Level make_level(std::vector<Config> cs);

/// g ⪯ h: every configuration of g is below some configuration of h.
bool level_leq(const Level& g, const Level& h);
/// Injective version of ⪯ (multiset embedding).
bool level_embeds(const Level& g, const Level& h);

/// One lazy move of a single configuration: the results (one for ε, two for a letter).
struct Move {
  const Transition* transition = nullptr;
  std::vector<Config> results;
};
std::vector<Move> config_moves(const Machine& m, const Config& c);

/// Configurations that the level semantics removes.
inline bool removable(const Machine& m, const Config& c) { return !c.root && m.is_final(c.state); }

/// All successors of g under the synchronous level semantics.
std::vector<Level> level_successors(const Machine& m, const Level& g, std::size_t limit = 1'000'000);

enum class Verdict { Sat, Unsat, Budget };
std::string to_string(Verdict v);

struct SolverStats {
  std::size_t levels = 0;
  std::size_t retained = 0;
  std::uint64_t max_valuation_sum = 0;
};

enum class SearchPolicy {
  Synchronous,  // every configuration steps at once, pruned with ⪯
  Focused,      // one configuration steps at a time, pruned with the injective order
  Branchwise,   // each configuration solved on its own, depth first
};

struct FiniteOptions {
  Budget budget;
  SearchPolicy policy = SearchPolicy::Focused;
  bool prune = true;
};

struct FiniteOutcome {
  Verdict verdict = Verdict::Unsat;
  std::optional<DataTree> witness;
  SolverStats stats;
};

/// Reachability of the empty level from the initial level.
FiniteOutcome nonempty_finite(const Machine& m, const FiniteOptions& opts = {});

/// Acceptance on a finite tree with blocks of at most `block_bound` configurations.
bool itca_accepts(const Machine& m, const DataTree& t, std::size_t block_bound);

/// Forward exploration retaining levels not above an earlier retained one.
std::vector<Level> reach_basis(const Machine& m, const Budget& budget = {});

/// Set of machine states (by id) used as the P of the infinite-sequence problem.
using StatePredicate = std::function<bool(StateId)>;

struct InfiniteOutcome {
  bool exists = false;
  SolverStats stats;
  std::size_t control_states = 0;
};

/// Existence of an infinite level sequence from the initial level passing
/// through a level whose states all satisfy P. Final configurations leave the
/// level before P is checked. Searched branchwise: every branch has to reach a
/// configuration in P that is not dead. Throws BudgetExceeded.
InfiniteOutcome exists_infinite_with_P(const Machine& m, const StatePredicate& p, const Budget& budget = {});

/// Basis of {v : every lazy result of l from v lies in ↑b}.
std::vector<Valuation> pre_forall(const Instruction& l, const std::vector<Valuation>& b);

/// Minimal dead configurations per control state: a configuration is dead when
/// no infinite level sequence starts from its singleton level.
class DeadSets {
 public:
  DeadSets(const Machine& m, const Budget& budget);
  bool dead(const Config& c) const;
  const std::vector<Valuation>& basis(StateId q, bool root) const;
  std::size_t control_states() const { return nodes_.size(); }

 private:
  struct Node {
    StateId state = 0;
    bool root = false;
    std::vector<Valuation> basis;
    std::vector<std::size_t> preds;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  static std::uint64_t key(StateId q, bool root) { return (static_cast<std::uint64_t>(q) << 1) | (root ? 1 : 0); }
};

/// Upward-closed basis of Pred∀ by bounded enumeration (test oracle). Levels
/// range over configurations of states reachable in the control graph with
/// every counter in `counters` at most K(basis), and at most `max_level_size`
/// configurations.
std::vector<Level> pred_forall_basis(const Machine& m, const std::vector<Level>& basis,
                                     const std::vector<Counter>& counters, std::size_t max_level_size = 2);
std::uint64_t bound_k(const std::vector<Level>& basis);

/// The three-basis procedure (𝔾_R, 𝔾_T by iterating Pred∀, 𝔾_N) for explicit machines.
bool exists_infinite_by_bases(const Machine& m, const StatePredicate& p, const std::vector<Counter>& counters,
                              const Budget& budget = {});

/// States reachable in the control graph (counters ignored).
std::vector<StateId> reachable_states(const Machine& m, std::size_t max_states = 2'000'000);

}  // namespace dtsat
