#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtsat {

/// Opaque datum identifier. Only equality is meaningful.
using Datum = std::uint64_t;

/// Index into an alphabet vector.
using Letter = int;

using Alphabet = std::vector<std::string>;

/// Input or structural validation failure (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver hit one of its resource caps (CLI exit code 3).
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resource caps shared by the counter-machine solvers.
struct Budget {
  std::size_t max_levels = 1'000'000;
  std::size_t max_valuation_sum = 64;
};

Letter letter_index(const Alphabet& alphabet, const std::string& name);

}  // namespace dtsat
