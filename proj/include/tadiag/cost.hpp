#pragma once

#include "tadiag/parser.hpp"
#include "tadiag/region.hpp"
#include "tadiag/ta.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tadiag {

/// Cost of a valid run: sum of location rate x delay plus edge costs.
/// Returns (cost, duration). Throws on an invalid run.
std::pair<Rat, Rat> run_cost(const TimedAutomaton& a, const Run& run);

/// Corner-point abstraction of a (bounded or capped) priced automaton:
/// nodes are region-graph states paired with an integer corner of the
/// region's closure (clocks above K capped at K+1). Arcs carry a cost
/// weight and an integer time weight: unit delays between corners of one
/// region (time 1, weight rate x 1), zero-time region advances, and
/// discrete edges (time 0, weight = edge cost).
struct CornerGraph {
  struct Node {
    int rg_state = 0;
    std::vector<long long> corner;
  };
  struct Arc {
    int dst = 0;
    long long weight = 0;
    long long time = 0;
    int edge = -1;  // region-graph edge index; -1 delay, -2 region advance
  };
  RegionGraph rg;
  std::vector<Node> nodes;
  std::vector<std::vector<Arc>> arcs;
  std::vector<int> initials;

  std::string node_str(int n) const;
};

CornerGraph build_corner_graph(const TimedAutomaton& a, long long m = 1);

struct MeanCostResult {
  std::optional<Rat> value;
  bool zeno = false;           // a zero-time cycle with nonzero cost exists
  std::vector<int> cycle;      // witness corner-graph node cycle
  std::string error;           // nonempty when no value could be computed
};

/// Maximum over reachable time-diverging corner cycles of cost per time
/// unit; equals the maximal mean cost of the priced automaton.
MeanCostResult max_mean_cost(const TimedAutomaton& a, long long m = 1);
MeanCostResult min_mean_cost(const TimedAutomaton& a, long long m = 1);

/// Ratio-cycle search on an arbitrary corner graph (exposed for tests).
MeanCostResult max_ratio_cycle(const CornerGraph& g);

/// Maximal mean observation cost of running the observer on the plant:
/// rates come from observer locations, one-off costs from observer edges.
MeanCostResult observer_cost(const TimedAutomaton& a, const ObserverSpec& o);

}  // namespace tadiag
