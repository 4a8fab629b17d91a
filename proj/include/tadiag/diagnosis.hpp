#pragma once

#include "tadiag/region.hpp"
#include "tadiag/ta.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tadiag {

struct WitnessRun {
  Run run;
  TimedWord trace;  // full trace over the automaton's alphabet
};

struct Verdict {
  bool diagnosable = true;
  long long delta_checked = 0;
  std::optional<WitnessRun> faulty;
  std::optional<WitnessRun> nonfaulty;
};

/// Product of the fault monitor with the fault-free copy, synchronized on
/// the observable events; everything else is silent and interleaves.
struct TwinPlant {
  TimedAutomaton ta;
  FaultMonitor monitor;    // left component (its labels before relabeling)
  Restriction nonfaulty;   // right component (before clock renaming)
  std::vector<std::pair<int, int>> loc_pair;   // twin loc -> (left, right)
  std::vector<std::pair<int, int>> edge_pair;  // twin edge -> (left, right)
  bool left_delta_faulty(int twin_loc) const;
  bool left_non_faulty(int twin_loc) const;
};

TwinPlant build_twin_plant(const TimedAutomaton& a,
                           const std::set<std::string>& sigma_o,
                           long long delta);

Verdict check_delta_diag(const TimedAutomaton& a,
                         const std::set<std::string>& sigma_o,
                         long long delta);

/// Delay bound beyond which ambiguity pumps a region cycle: the state count
/// of the region graph of the twin plant built without the fault-age clock,
/// plus one. Complete only up to Zeno ambiguity.
long long delta_bound(const TimedAutomaton& a,
                      const std::set<std::string>& sigma_o);

Verdict check_diag(const TimedAutomaton& a,
                   const std::set<std::string>& sigma_o);

std::optional<long long> min_delta(const TimedAutomaton& a,
                                   const std::set<std::string>& sigma_o);

std::optional<std::set<std::string>> min_sensor_set(const TimedAutomaton& a,
                                                    int n);
std::optional<std::pair<int, std::set<std::string>>> min_cardinality(
    const TimedAutomaton& a);

Verdict check_mask_diag(const TimedAutomaton& a, const Mask& m,
                        std::optional<long long> delta = std::nullopt);
std::optional<Mask> min_mask(const TimedAutomaton& a, int n);
std::optional<std::pair<int, Mask>> min_mask_size(const TimedAutomaton& a);

std::string verdict_to_json(const TimedAutomaton& a, const Verdict& v);
std::string twin_plant_dot(const TwinPlant& tp);

}  // namespace tadiag
