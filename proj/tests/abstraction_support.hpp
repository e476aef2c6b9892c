#pragma once

#include <functional>
#include <set>

#include "dtsat/abstraction.hpp"

namespace testing_support {

using namespace dtsat;

inline bool pair_leq(const AbstractPair& a, const AbstractPair& b) {
  return abstract_leq(a.first, b.first) && abstract_leq(a.second, b.second);
}

// Bundle of datum e in g.
inline StateSet bundle(const Configuration& g, Datum e) {
  StateSet s = 0;
  for (const auto& th : g)
    if (th.datum == e) s |= singleton(th.state);
  return s;
}

// Configurations with up to `size` threads over states of `a` and data 1..data.
inline std::vector<Configuration> small_configs(const Atra& a, int size, int data) {
  std::vector<Thread> all;
  for (int q = 0; q < a.num_states(); ++q)
    for (Datum d = 1; d <= static_cast<Datum>(data); ++d) all.push_back({q, d});
  std::vector<Configuration> out;
  Configuration cur;
  std::function<void(std::size_t)> go = [&](std::size_t from) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == size) return;
    for (std::size_t i = from; i < all.size(); ++i) {
      cur.push_back(all[i]);
      go(i + 1);
      cur.pop_back();
    }
  };
  go(0);
  return out;
}

// Every successor pair obtained by choosing one minimal model per thread.
inline std::set<AbstractPair> concrete_pairs(const Atra& a, const Configuration& g, Letter letter, Datum e,
                                      std::vector<std::pair<Configuration, Configuration>>* raw = nullptr) {
  std::vector<std::vector<Quadruple>> models;
  for (const auto& th : g) models.push_back(minimal_models(a.delta(th.state, letter, th.datum == e)));
  std::set<AbstractPair> out;
  std::vector<const Quadruple*> pick;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == g.size()) {
      Configuration h[2];
      for (int d = 0; d < 2; ++d) {
        for (std::size_t j = 0; j < g.size(); ++j) induced_threads(*pick[j], d, e, g[j].datum, h[d]);
        h[d] = normalize(std::move(h[d]));
      }
      out.insert({abstract(h[0]), abstract(h[1])});
      if (raw) raw->push_back({h[0], h[1]});
      return;
    }
    for (const auto& m : models[i]) {
      pick.push_back(&m);
      go(i + 1);
      pick.pop_back();
    }
  };
  go(0);
  return out;
}

}  // namespace testing_support
