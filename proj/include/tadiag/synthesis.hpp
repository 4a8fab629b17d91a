#pragma once

#include "tadiag/parser.hpp"
#include "tadiag/region.hpp"
#include "tadiag/ta.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tadiag {

/// Observation resource: the clocks the observer may use, the largest
/// constant, and the granularity 1/gran_den of its guards.
struct Resource {
  std::vector<std::string> clocks;
  long long max = 0;
  long long gran_den = 1;
};

/// One guard per cell of the resource's granularity grid, in canonical
/// order: per clock the cells y=k/m, k/m<y<(k+1)/m, ..., y>max. Cells are
/// pairwise disjoint and cover the whole clock space. For one clock they
/// are exactly the regions of the resource.
std::vector<Guard> minimal_guards(const Resource& mu);

/// The universal observer automaton: one location per subset of the
/// alphabet, and an edge for every tuple (S, g, a, R, S').
struct Universal {
  TimedAutomaton ta;
  struct EdgeInfo {
    int guard_id = 0;
    int event = 0;       // index into sigma
    int reset_mask = 0;  // bit i = mu.clocks[i]
    int src_set = 0;     // bit i = sigma[i]
    int dst_set = 0;
  };
  std::vector<EdgeInfo> info;  // aligned with ta.edges
  std::vector<Guard> guards;
  std::vector<std::string> sigma;
  Resource mu;
};

Universal build_universal(const std::vector<std::string>& sigma,
                          const Resource& mu);

/// The observation safety game. Round states belong to Player 1 (the
/// plant picks which guard cell and event gets observed next); square
/// states belong to Player 0 (the observer picks resets and the next
/// observation set). Also retains the pipeline artifacts it was built
/// from: the region graph of the monitored plant times the universal
/// automaton, the projected letter automaton, and the subset construction.
struct GameGraph {
  struct Choice {
    int reset_mask = 0;
    int next_obs = 0;
    int to = 0;  // round id
  };
  struct Square {
    int from = 0;  // round id
    int guard_id = 0;
    int event = 0;  // index into sigma
    std::vector<Choice> choices;
  };
  struct Round {
    std::vector<int> members;  // region-graph states, sorted
    int obs_set = 0;
    bool bad = false;
    std::vector<int> squares;
  };
  struct Letter {
    int guard_id = 0;
    int event = 0;
    int reset_mask = 0;
    int next_obs = 0;
  };
  struct NfaArc {
    int letter = -1;  // -1 = silent
    int dst = 0;
  };

  std::vector<Round> rounds;
  std::vector<Square> squares;
  std::vector<std::pair<int, int>> initial;  // (obs set mask, round id)
  std::vector<Guard> guards;
  std::vector<std::string> sigma;
  Resource mu;
  long long delta = 0;

  RegionGraph rg;  // of the product, at the resource granularity
  std::vector<std::vector<NfaArc>> nfa;
  std::vector<Letter> letters;
  std::vector<int> rg_initial_per_set;        // indexed by obs-set mask
  std::vector<std::pair<int, int>> prod_loc;  // product loc -> (monitor, set)
  FaultMonitor monitor;

  std::set<std::string> event_set(int mask) const;
  std::vector<std::string> reset_list(int mask) const;
};

GameGraph build_game(const TimedAutomaton& a, long long delta,
                     const Resource& mu);

struct Winning {
  std::vector<char> round_win;
  std::vector<char> square_win;
  std::vector<std::vector<int>> choice_win;  // winning choice ids per square
  std::vector<std::pair<int, int>> initial_win;
};

/// Complement of the Player-1 attractor of the Bad rounds.
Winning solve_safety(const GameGraph& g);

/// The winning subgraph with all surviving square choices: the
/// most-permissive observer representation.
struct ObserverTemplate {
  GameGraph game;
  Winning win;
  bool empty() const { return win.initial_win.empty(); }
};

ObserverTemplate extract_template(const GameGraph& g, const Winning& w);

/// Positional choice rule: given a square and its winning choice ids,
/// return the chosen id.
using Policy =
    std::function<int(const GameGraph&, int square, const std::vector<int>&)>;

/// Cuts one observer out of the template: pick a winning initial
/// observation set (smallest by size then name order unless s0_mask is
/// given) and one winning choice per square (default: least next
/// observation set, then fewest resets). The result is completed with
/// stay-put self-loops and validates as a deterministic observer.
ObserverSpec instantiate(const ObserverTemplate& t, const Policy& policy = {},
                         std::optional<int> s0_mask = std::nullopt);

std::string template_to_json(const ObserverTemplate& t);
std::string game_dot(const GameGraph& g, const Winning* w = nullptr);

}  // namespace tadiag
