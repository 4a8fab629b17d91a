#pragma once

#include "tadiag/ta.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tadiag {

/// Alur-Dill region over integer-constant constraints bounded by K.
/// Per clock: either "above K", or an integer part ip in 0..K plus its
/// fractional-ordering group. Clocks with ord == -1 have fraction zero;
/// otherwise ord is the rank of the clock's fractional value among the
/// positive fractions (0 = smallest), shared by clocks with equal fractions.
struct Region {
  struct ClockPart {
    bool above = false;
    long long ip = 0;
    int ord = -1;
  };
  std::vector<ClockPart> parts;  // indexed like the automaton's clock list
  int groups = 0;                // number of distinct positive fractions

  friend bool operator==(const Region& a, const Region& b) {
    if (a.groups != b.groups || a.parts.size() != b.parts.size()) return false;
    for (size_t i = 0; i < a.parts.size(); ++i) {
      const ClockPart &x = a.parts[i], &y = b.parts[i];
      if (x.above != y.above || (!x.above && x.ip != y.ip) || x.ord != y.ord)
        return false;
    }
    return true;
  }
  friend bool operator<(const Region& a, const Region& b);
};

Region region_of(const std::vector<std::string>& clocks,
                 const ClockValuation& v, long long K);

/// The next region reached by letting time pass; nullopt for the maximal
/// region (all clocks above K), which absorbs time.
std::optional<Region> time_successor(const Region& r, long long K);

/// Whether every valuation of r satisfies g (integer constants <= K; all
/// valuations of a region agree on such atoms).
bool region_satisfies(const Region& r, const Guard& g,
                      const std::vector<std::string>& clocks);

Region region_reset(const Region& r, const std::vector<std::string>& clocks,
                    const std::vector<std::string>& resets);

/// True when the region is time-open: a positive delay can elapse without
/// leaving it (all unbounded, or some positive fraction strictly below 1
/// with no fraction-zero clock below K). Used by cost accounting.
bool region_time_open(const Region& r);

std::string region_str(const Region& r, const std::vector<std::string>& clocks,
                       long long K);

/// A representative valuation: each integer part plus a distinct fraction
/// per ordering group (k-th group gets fraction k/(groups+1)); above-K
/// clocks take K + 1/2.
ClockValuation region_sample(const Region& r,
                             const std::vector<std::string>& clocks,
                             long long K);

// ---------------------------------------------------------------------------

struct RegionGraph {
  struct State {
    int loc = 0;
    Region region;
  };
  struct Arc {
    int dst = 0;
    int edge = -1;  // index into ta.edges, or -1 for the time successor
  };
  TimedAutomaton ta;  // the scaled automaton the graph quotients
  long long scale = 1;
  long long K = 0;
  std::vector<State> states;
  std::vector<std::vector<Arc>> out;
  std::vector<int> initials;

  int state_index(int loc, const Region& r) const;
  std::string state_str(int s) const;
};

/// Region graph of `a` at granularity 1/m (constants are scaled by m and
/// must become integers). min_k forces a larger constant ceiling when the
/// caller will evaluate guards beyond the automaton's own constants.
RegionGraph build_region_graph(const TimedAutomaton& a, long long m = 1,
                               long long min_k = 0);

/// Like build_region_graph but exploring from several initial locations.
RegionGraph build_region_graph_multi(const TimedAutomaton& a,
                                     const std::vector<int>& initial_locs,
                                     long long m = 1, long long min_k = 0);

/// Turns a path of graph-state indices into a concrete run of the unscaled
/// automaton: τ arcs become delays into the next region (midpoint choice),
/// edge arcs become discrete steps.
Run concretize_path(const RegionGraph& rg, const std::vector<int>& path);

/// Same, but with the arcs given explicitly (no ambiguity when several
/// arcs join the same pair of states).
Run concretize_arcs(const RegionGraph& rg, int start,
                    const std::vector<RegionGraph::Arc>& arcs);

std::string region_graph_dot(const RegionGraph& rg);
std::string ta_dot(const TimedAutomaton& a);

}  // namespace tadiag
