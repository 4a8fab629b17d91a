#pragma once

#include "tadiag/diagnosis.hpp"
#include "tadiag/parser.hpp"
#include "tadiag/ta.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tadiag {

/// Checks the observer contract: no silent/fault edges, TRUE invariants,
/// and per location/event either stay-put (event unobserved) or a family
/// of guards that partitions the clock space (deterministic + complete),
/// checked region by region at the observer's granularity. Returns the
/// list of violations; empty means valid.
std::vector<std::string> validate_observer(const ObserverSpec& o);

/// Transducer semantics: runs the observer on w and keeps exactly the
/// letters observed at their occurrence time. Duration is preserved.
TimedWord observe(const ObserverSpec& o, const TimedWord& w);

struct ObsProduct {
  TimedAutomaton ta;
  std::vector<std::pair<int, int>> loc_pair;   // product loc -> (plant, obs)
  std::vector<std::pair<int, int>> edge_pair;  // -> (plant edge, obs edge)
                                               // obs edge -1 = stay-put/alone
};

/// Product of a plant with an observer: plant events pair with the matching
/// observer move and keep their label only while observed; silent and fault
/// moves of the plant go alone. Invariants come from the plant.
ObsProduct product_obs(const TimedAutomaton& a, const ObserverSpec& o);

Verdict check_obs_diag(const TimedAutomaton& a, const ObserverSpec& o,
                       long long delta);
std::optional<long long> min_delta_obs(const TimedAutomaton& a,
                                       const ObserverSpec& o);

/// One-location observer that watches every event of `a` all the time.
ObserverSpec always_observer(const TimedAutomaton& a,
                             const std::vector<std::string>& watched,
                             long long loc_cost = 0);

/// All regions of the observer's clock space at its granularity.
std::vector<Region> observer_regions(const ObserverSpec& o, long long* k_out);

}  // namespace tadiag
