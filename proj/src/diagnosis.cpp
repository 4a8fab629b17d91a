#include "tadiag/diagnosis.hpp"

#include "tadiag/parser.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>

namespace tadiag {

namespace {

// relabels events outside sigma_o to tau
TimedAutomaton hide_events(const TimedAutomaton& a,
                           const std::set<std::string>& sigma_o) {
  TimedAutomaton out = a;
  for (auto& e : out.edges)
    if (e.label.is_event() && !sigma_o.count(e.label.event))
      e.label = Label::tau();
  out.alphabet.clear();
  for (const auto& e : a.alphabet)
    if (sigma_o.count(e)) out.alphabet.push_back(e);
  return out;
}

TimedAutomaton rename_clocks(const TimedAutomaton& a,
                             const std::string& suffix) {
  TimedAutomaton out = a;
  for (auto& c : out.clocks) c += suffix;
  for (auto& l : out.locations)
    for (auto& at : l.invariant.atoms) at.clock += suffix;
  for (auto& e : out.edges) {
    for (auto& at : e.guard.atoms) at.clock += suffix;
    for (auto& c : e.resets) c += suffix;
  }
  return out;
}

void check_sigma(const TimedAutomaton& a,
                 const std::set<std::string>& sigma_o) {
  for (const auto& e : sigma_o)
    if (!a.has_event(e))
      throw Error("observable event '" + e + "' is not in the alphabet");
}

}  // namespace

bool TwinPlant::left_delta_faulty(int twin_loc) const {
  int l = loc_pair[twin_loc].first;
  return monitor.ta.locations[l].has_tag(kTagDeltaFaulty);
}

bool TwinPlant::left_non_faulty(int twin_loc) const {
  int l = loc_pair[twin_loc].first;
  return monitor.ta.locations[l].has_tag(kTagNonFaulty);
}

TwinPlant build_twin_plant(const TimedAutomaton& a,
                           const std::set<std::string>& sigma_o,
                           long long delta) {
  check_sigma(a, sigma_o);
  TwinPlant tp;
  tp.monitor = build_fault_monitor(a, delta);
  tp.nonfaulty = restrict_nonfaulty(a);
  TimedAutomaton left = hide_events(tp.monitor.ta, sigma_o);
  TimedAutomaton right =
      rename_clocks(hide_events(tp.nonfaulty.ta, sigma_o), "_nf");
  ProductResult pr = product(left, right);
  tp.ta = pr.ta;
  tp.ta.name = a.name + "_twin";
  tp.loc_pair = pr.loc_pair;
  tp.edge_pair = pr.edge_pair;
  return tp;
}

namespace {

// splits a concrete twin-plant run into runs of the original automaton
WitnessRun side_run(const TimedAutomaton& a, const TwinPlant& tp,
                    const Run& twin_run, bool left) {
  Run r;
  for (const auto& s : twin_run.steps) {
    if (s.is_delay) {
      r.steps.push_back(s);
      continue;
    }
    auto [le, re] = tp.edge_pair[s.edge];
    int comp_edge = left ? le : re;
    if (comp_edge < 0) continue;  // the other component moved alone
    int orig = left ? tp.monitor.orig_edge[comp_edge]
                    : tp.nonfaulty.orig_edge[comp_edge];
    if (orig < 0) continue;  // monitor-internal switch
    r.steps.push_back(RunStep::edge_step(orig));
  }
  WitnessRun w;
  w.run = r;
  w.trace = trace_of(a, r);
  return w;
}

}  // namespace

Verdict check_delta_diag(const TimedAutomaton& a,
                         const std::set<std::string>& sigma_o,
                         long long delta) {
  if (delta < 0) throw Error("delta must be nonnegative");
  Verdict v;
  v.delta_checked = delta;
  TwinPlant tp = build_twin_plant(a, sigma_o, delta);
  RegionGraph rg = build_region_graph(tp.ta);

  // breadth-first search for a reachable state whose left component has
  // aged past delta since its fault
  std::vector<int> prev(rg.states.size(), -1);
  std::vector<RegionGraph::Arc> via(rg.states.size());
  std::vector<bool> seen(rg.states.size(), false);
  std::deque<int> q;
  for (int s : rg.initials) {
    seen[s] = true;
    q.push_back(s);
  }
  int bad = -1;
  while (!q.empty() && bad < 0) {
    int s = q.front();
    q.pop_front();
    if (tp.left_delta_faulty(rg.states[s].loc)) {
      bad = s;
      break;
    }
    for (const auto& arc : rg.out[s]) {
      if (seen[arc.dst]) continue;
      seen[arc.dst] = true;
      prev[arc.dst] = s;
      via[arc.dst] = arc;
      q.push_back(arc.dst);
    }
  }
  if (bad < 0) {
    v.diagnosable = true;
    return v;
  }
  v.diagnosable = false;
  std::vector<RegionGraph::Arc> arcs;
  int cur = bad;
  while (prev[cur] >= 0) {
    arcs.push_back(via[cur]);
    cur = prev[cur];
  }
  std::reverse(arcs.begin(), arcs.end());
  Run twin_run = concretize_arcs(rg, cur, arcs);
  v.faulty = side_run(a, tp, twin_run, true);
  v.nonfaulty = side_run(a, tp, twin_run, false);
  return v;
}

long long delta_bound(const TimedAutomaton& a,
                      const std::set<std::string>& sigma_o) {
  check_sigma(a, sigma_o);
  // two-copy fault monitor without the fault-age clock: only reachability
  // of faulty states matters for the bound
  int n = static_cast<int>(a.locations.size());
  TimedAutomaton m;
  m.name = a.name + "_flag";
  m.clocks = a.clocks;
  m.alphabet = a.alphabet;
  m.initial = a.initial;
  for (int copy = 0; copy < 2; ++copy)
    for (int l = 0; l < n; ++l) {
      Location loc = a.locations[l];
      loc.name += copy ? "'" : "";
      m.locations.push_back(loc);
    }
  for (const Edge& e : a.edges) {
    if (e.label.is_fault()) {
      Edge ne = e;
      ne.dst = n + e.dst;
      m.edges.push_back(ne);
      ne.src = n + e.src;
      ne.dst = n + e.dst;
      m.edges.push_back(ne);
    } else {
      for (int base : {0, n}) {
        Edge ne = e;
        ne.src = base + e.src;
        ne.dst = base + e.dst;
        m.edges.push_back(ne);
      }
    }
  }
  TimedAutomaton left = hide_events(prune_unreachable(m), sigma_o);
  TimedAutomaton right =
      rename_clocks(hide_events(restrict_nonfaulty(a).ta, sigma_o), "_nf");
  RegionGraph rg = build_region_graph(product(left, right).ta);
  return static_cast<long long>(rg.states.size()) + 1;
}

Verdict check_diag(const TimedAutomaton& a,
                   const std::set<std::string>& sigma_o) {
  return check_delta_diag(a, sigma_o, delta_bound(a, sigma_o));
}

std::optional<long long> min_delta(const TimedAutomaton& a,
                                   const std::set<std::string>& sigma_o) {
  long long hi = delta_bound(a, sigma_o);
  if (!check_delta_diag(a, sigma_o, hi).diagnosable) return std::nullopt;
  long long lo = 0;
  while (lo < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (check_delta_diag(a, sigma_o, mid).diagnosable)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::optional<std::set<std::string>> min_sensor_set(const TimedAutomaton& a,
                                                    int n) {
  int total = static_cast<int>(a.alphabet.size());
  if (n < 0 || n > total) throw Error("sensor count out of range");
  std::vector<std::string> events = a.alphabet;
  std::sort(events.begin(), events.end());
  // lexicographically ordered size-n subsets via sorted selector masks
  std::vector<bool> pick(total, false);
  std::fill(pick.begin(), pick.begin() + n, true);
  do {
    std::set<std::string> sigma;
    for (int i = 0; i < total; ++i)
      if (pick[i]) sigma.insert(events[i]);
    if (check_diag(a, sigma).diagnosable) return sigma;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return std::nullopt;
}

std::optional<std::pair<int, std::set<std::string>>> min_cardinality(
    const TimedAutomaton& a) {
  int total = static_cast<int>(a.alphabet.size());
  int lo = 0, hi = total;
  if (!min_sensor_set(a, total)) return std::nullopt;
  std::optional<std::set<std::string>> best;
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    if (auto s = min_sensor_set(a, mid)) {
      best = s;
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (!best) best = min_sensor_set(a, lo);
  return std::make_pair(lo, *best);
}

Verdict check_mask_diag(const TimedAutomaton& a, const Mask& m,
                        std::optional<long long> delta) {
  for (const auto& e : a.alphabet)
    if (!m.map.count(e)) throw Error("mask undefined on event " + e);
  TimedAutomaton masked = apply_mask(a, m);
  std::set<std::string> sigma(masked.alphabet.begin(), masked.alphabet.end());
  return delta ? check_delta_diag(masked, sigma, *delta)
               : check_diag(masked, sigma);
}

std::optional<Mask> min_mask(const TimedAutomaton& a, int n) {
  int total = static_cast<int>(a.alphabet.size());
  if (n < 1 || n > total) throw Error("mask size out of range");
  std::vector<std::string> events = a.alphabet;
  std::sort(events.begin(), events.end());
  // enumerate assignments in lexicographic order with classes 1..n before
  // the erasing class
  std::vector<int> assign(total, 1);
  while (true) {
    Mask m;
    m.n = n;
    std::set<int> used;
    for (int i = 0; i < total; ++i) {
      m.map[events[i]] = assign[i] > n ? 0 : assign[i];
      if (assign[i] <= n) used.insert(assign[i]);
    }
    if (static_cast<int>(used.size()) == n &&
        check_mask_diag(a, m).diagnosable)
      return m;
    int i = total - 1;
    while (i >= 0 && assign[i] == n + 1) {
      assign[i] = 1;
      --i;
    }
    if (i < 0) break;
    ++assign[i];
  }
  return std::nullopt;
}

std::optional<std::pair<int, Mask>> min_mask_size(const TimedAutomaton& a) {
  int total = static_cast<int>(a.alphabet.size());
  int lo = 1, hi = total;
  if (!min_mask(a, total)) {
    // a diagnosable identity-size mask exists iff any mask does; still try
    // smaller sizes since surjectivity makes sizes incomparable in general
    bool any = false;
    for (int k = 1; k <= total && !any; ++k) any = min_mask(a, k).has_value();
    if (!any) return std::nullopt;
  }
  std::optional<Mask> best;
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    if (auto m = min_mask(a, mid)) {
      best = m;
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (!best) best = min_mask(a, lo);
  if (!best) return std::nullopt;
  return std::make_pair(lo, *best);
}

std::string verdict_to_json(const TimedAutomaton& a, const Verdict& v) {
  nlohmann::ordered_json j;
  j["diagnosable"] = v.diagnosable;
  j["delta"] = v.delta_checked;
  if (!v.diagnosable && v.faulty && v.nonfaulty) {
    auto run_json = [&](const WitnessRun& w) {
      nlohmann::ordered_json side;
      side["trace"] = nlohmann::ordered_json::parse(
          timed_word_to_json(w.trace));
      nlohmann::ordered_json steps = nlohmann::ordered_json::array();
      SimState st{a.initial, a.zero_valuation()};
      for (const auto& s : w.run.steps) {
        nlohmann::ordered_json step;
        step["loc"] = a.locations[st.loc].name;
        nlohmann::ordered_json val;
        for (const auto& [c, x] : st.val) val[c] = rat_str(x);
        step["val"] = val;
        if (s.is_delay) {
          step["step"] = "delay " + rat_str(s.delta);
          st.val = delay(st.val, s.delta);
        } else {
          step["step"] = "edge " + std::to_string(s.edge);
          st.val = reset(st.val, a.edges[s.edge].resets);
          st.loc = a.edges[s.edge].dst;
        }
        steps.push_back(step);
      }
      side["run"] = steps;
      return side;
    };
    nlohmann::ordered_json w;
    w["faulty"] = run_json(*v.faulty);
    w["nonfaulty"] = run_json(*v.nonfaulty);
    j["witness"] = w;
  }
  return j.dump(2);
}

std::string twin_plant_dot(const TwinPlant& tp) { return ta_dot(tp.ta); }

}  // namespace tadiag
