#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtsat/common.hpp"

namespace dtsat {

/// Subset of automaton states as a bitmask (automata have at most 64 states).
using StateSet = std::uint64_t;
inline constexpr int kMaxStates = 64;

inline bool subset_of(StateSet a, StateSet b) { return (a & ~b) == 0; }
inline StateSet singleton(int q) { return StateSet{1} << q; }
inline bool contains(StateSet s, int q) { return (s >> q) & 1U; }
inline int set_size(StateSet s) { return std::popcount(s); }
std::vector<int> members(StateSet s);

enum class Update : std::uint8_t { Store, Keep };

/// Positive Boolean formula over atoms q(d, store|keep), plus the hole atom of
/// query automata. Immutable; copies share structure.
class Formula {
 public:
  enum class Kind : std::uint8_t { True, False, Atom, And, Or, Hole };

  Formula();  // False
  static Formula top();
  static Formula bottom();
  static Formula hole();
  static Formula atom(int state, int dir, Update update);
  /// Conjunction/disjunction with unit and zero simplification.
  static Formula conj(const Formula& a, const Formula& b);
  static Formula disj(const Formula& a, const Formula& b);
  static Formula conj(const std::vector<Formula>& fs);
  static Formula disj(const std::vector<Formula>& fs);

  Kind kind() const;
  int state() const;
  int dir() const;
  Update update() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  bool is_true() const { return kind() == Kind::True; }
  bool is_false() const { return kind() == Kind::False; }
  bool has_hole() const;

  /// Swaps True/False and And/Or; atoms and holes unchanged.
  Formula dual() const;
  Formula map_states(const std::function<int(int)>& f) const;
  Formula replace_hole(const Formula& by) const;
  /// Visits every atom.
  void for_each_atom(const std::function<void(int state, int dir, Update)>& f) const;

  /// S-expression: (and f f) | (or f f) | true | false | hole | (atom q 0|1 store|keep).
  std::string to_sexpr(const std::vector<std::string>& state_names) const;
  static Formula parse_sexpr(const std::string& text, const std::vector<std::string>& state_names);

  bool operator==(const Formula& other) const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// The four state sets R_0^store, R_0^keep, R_1^store, R_1^keep.
struct Quadruple {
  std::array<StateSet, 4> sets{};

  static constexpr int index(int dir, Update u) { return dir * 2 + (u == Update::Keep ? 1 : 0); }
  StateSet get(int dir, Update u) const { return sets[static_cast<std::size_t>(index(dir, u))]; }
  StateSet& at(int dir, Update u) { return sets[static_cast<std::size_t>(index(dir, u))]; }
  StateSet store(int dir) const { return get(dir, Update::Store); }
  StateSet keep(int dir) const { return get(dir, Update::Keep); }

  bool leq(const Quadruple& o) const {
    for (std::size_t i = 0; i < 4; ++i)
      if (!subset_of(sets[i], o.sets[i])) return false;
    return true;
  }
  Quadruple join(const Quadruple& o) const {
    Quadruple r;
    for (std::size_t i = 0; i < 4; ++i) r.sets[i] = sets[i] | o.sets[i];
    return r;
  }
  bool operator==(const Quadruple&) const = default;
  auto operator<=>(const Quadruple&) const = default;
};

struct QuadrupleHash {
  std::size_t operator()(const Quadruple& q) const noexcept;
};

/// Satisfaction of a formula by a quadruple; `hole` gives the hole's value.
bool satisfies(const Quadruple& r, const Formula& f, std::optional<bool> hole = std::nullopt);

/// The ⊆-minimal satisfying quadruples (an antichain). Empty iff unsatisfiable.
/// Throws ValidationError if f has a hole and no hole value is given.
std::vector<Quadruple> minimal_models(const Formula& f, std::optional<bool> hole = std::nullopt);

}  // namespace dtsat
