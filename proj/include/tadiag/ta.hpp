#pragma once

#include "tadiag/rational.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tadiag {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Edge label: an event of the alphabet, the silent action, or the fault.
/// The silent action and the fault are never members of the alphabet.
struct Label {
  enum class Kind { Event, Tau, Fault };
  Kind kind = Kind::Tau;
  std::string event;  // nonempty iff kind == Event

  static Label tau() { return {Kind::Tau, ""}; }
  static Label fault() { return {Kind::Fault, ""}; }
  static Label ev(std::string name) { return {Kind::Event, std::move(name)}; }

  bool is_event() const { return kind == Kind::Event; }
  bool is_tau() const { return kind == Kind::Tau; }
  bool is_fault() const { return kind == Kind::Fault; }
  std::string str() const;

  friend bool operator==(const Label& a, const Label& b) {
    return a.kind == b.kind && a.event == b.event;
  }
};

// ---------------------------------------------------------------------------
// Clock constraints and valuations
// ---------------------------------------------------------------------------

enum class Rel { Lt, Le, Eq, Ge, Gt };

std::string rel_str(Rel r);

struct Atom {
  std::string clock;
  Rel rel = Rel::Le;
  Rat bound{0};

  bool eval(const Rat& value) const;
  std::string str() const;
};

/// Conjunction of atomic constraints; an empty atom list is TRUE.
struct Guard {
  std::vector<Atom> atoms;

  bool is_true() const { return atoms.empty(); }
  bool upper_bounds_only() const;  // all relations in {<, <=}
  std::string str() const;         // "x<=2 and y>1", "true" when empty

  friend bool operator==(const Guard& a, const Guard& b);
};

using ClockValuation = std::map<std::string, Rat>;

ClockValuation delay(const ClockValuation& v, const Rat& delta);
ClockValuation reset(const ClockValuation& v,
                     const std::vector<std::string>& clocks);
bool satisfies(const ClockValuation& v, const Guard& g);

// ---------------------------------------------------------------------------
// Timed words
// ---------------------------------------------------------------------------

/// delays.size() == events.size() + 1: a word starts and ends with a delay.
struct TimedWord {
  std::vector<Rat> delays{Rat(0)};
  std::vector<std::string> events;

  Rat duration() const;
  std::string str() const;

  friend bool operator==(const TimedWord& a, const TimedWord& b) {
    return a.delays == b.delays && a.events == b.events;
  }
};

TimedWord project(const TimedWord& w, const std::set<std::string>& sigma);
std::vector<std::string> untime(const TimedWord& w);
/// Concatenation with delay merging at the seam.
TimedWord concat(const TimedWord& u, const TimedWord& v);

// ---------------------------------------------------------------------------
// Timed automata
// ---------------------------------------------------------------------------

struct Edge {
  int src = 0;
  int dst = 0;
  Guard guard;
  Label label;
  std::vector<std::string> resets;
  long long cost = 0;
};

struct Location {
  std::string name;
  Guard invariant;  // upper-bound atoms only
  long long cost = 0;
  bool is_final = true;
  bool is_repeated = false;
  std::vector<std::string> tags;

  bool has_tag(const std::string& t) const;
};

/// Location tags used by the fault-monitor construction.
inline constexpr const char* kTagNonFaulty = "non-faulty";
inline constexpr const char* kTagFaulty = "faulty";
inline constexpr const char* kTagDeltaFaulty = "delta-faulty";

struct TimedAutomaton {
  std::string name = "ta";
  std::vector<Location> locations;
  int initial = 0;
  std::vector<std::string> clocks;
  std::vector<std::string> alphabet;  // sorted event names, excludes tau/fault
  std::vector<Edge> edges;

  int location_index(const std::string& n) const;  // -1 if absent
  int clock_index(const std::string& n) const;     // -1 if absent
  bool has_event(const std::string& e) const;
  ClockValuation zero_valuation() const;
  /// Largest constant appearing in guards/invariants once scaled by m;
  /// throws if some scaled constant is not an integer.
  long long max_constant(long long scale = 1) const;
  /// Copy with every guard/invariant constant multiplied by m and every
  /// edge cost multiplied by m (keeps mean costs invariant under scaling).
  TimedAutomaton scaled(long long m) const;
  void validate() const;  // structural sanity, throws Error
};

/// Drops locations unreachable in the location graph (guards ignored).
/// loc_map/edge_map, when given, receive new-index -> old-index tables.
TimedAutomaton prune_unreachable(const TimedAutomaton& a,
                                 std::vector<int>* loc_map = nullptr,
                                 std::vector<int>* edge_map = nullptr);

// ---------------------------------------------------------------------------
// Product
// ---------------------------------------------------------------------------

struct ProductResult {
  TimedAutomaton ta;
  std::vector<std::pair<int, int>> loc_pair;   // product loc -> (loc1, loc2)
  std::vector<std::pair<int, int>> edge_pair;  // product edge -> (e1, e2), -1 = none
};

/// Binary product: shared non-tau labels synchronize, private labels and
/// tau/fault interleave. Requires disjoint clock sets.
ProductResult product(const TimedAutomaton& a1, const TimedAutomaton& a2);

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

/// map: event -> class in 1..n, or 0 for the erasing class.
struct Mask {
  int n = 0;
  std::map<std::string, int> map;
};

/// Compacts a non-surjective mask onto {1..n'}; emits a warning per gap.
Mask normalize_mask(const Mask& m, std::vector<std::string>* warnings = nullptr);
TimedAutomaton apply_mask(const TimedAutomaton& a, const Mask& m);
TimedWord mask_word(const Mask& m, const TimedWord& w);

// ---------------------------------------------------------------------------
// Fault monitoring
// ---------------------------------------------------------------------------

struct FaultMonitor {
  TimedAutomaton ta;
  std::string z_clock;
  std::vector<int> copy_of;    // monitor loc -> copy index 1..3
  std::vector<int> orig_loc;   // monitor loc -> source location
  std::vector<int> orig_edge;  // monitor edge -> source edge, -1 for the switch
};

/// Three-copy monitor: copy 1 runs fault-free, the fault jumps to copy 2
/// resetting a fresh clock z, and a silent switch guarded z > delta enters
/// copy 3. Copy-3 locations are exactly the states whose fault is strictly
/// older than delta. Invariants are carried into every copy so monitor runs
/// stay in bijection with runs of the source automaton.
FaultMonitor build_fault_monitor(const TimedAutomaton& a, long long delta);

struct Restriction {
  TimedAutomaton ta;
  std::vector<int> orig_loc;
  std::vector<int> orig_edge;
};

/// Removes all fault edges and prunes what becomes unreachable.
Restriction restrict_nonfaulty(const TimedAutomaton& a);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct RunStep {
  bool is_delay = true;
  Rat delta{0};
  int edge = -1;

  static RunStep delay_step(Rat d) { return {true, std::move(d), -1}; }
  static RunStep edge_step(int e) { return {false, Rat(0), e}; }
};

struct Run {
  std::vector<RunStep> steps;
};

struct SimState {
  int loc = 0;
  ClockValuation val;
};

/// Replays a run from the initial state, revalidating every delay against
/// the invariant and every discrete move against its guard.
std::optional<SimState> simulate(const TimedAutomaton& a, const Run& run,
                                 std::string* error = nullptr);

/// Trace of a run: the alphabet projection of its delays and labels.
TimedWord trace_of(const TimedAutomaton& a, const Run& run);

/// Total duration of a run.
Rat run_duration(const Run& run);

/// Copy of the run with all delays divided by m.
Run unscale_run(const Run& run, long long m);

}  // namespace tadiag
