#include "tadiag/observer.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace tadiag {

namespace {

std::set<std::string> obs_set(const ObserverSpec& o, int loc) {
  return {o.observe[loc].begin(), o.observe[loc].end()};
}

}  // namespace

std::vector<Region> observer_regions(const ObserverSpec& o, long long* k_out) {
  TimedAutomaton t = o.ta.scaled(o.gran_den);
  long long K = t.max_constant();
  if (k_out) *k_out = K;
  // every region up to constant K is hit by a grid valuation whose
  // fractions are multiples of 1/(|Y|+1)
  long long D = static_cast<long long>(t.clocks.size()) + 1;
  std::vector<Region> regions;
  std::set<Region> seen;
  std::vector<long long> idx(t.clocks.size(), 0);
  long long top = (K + 1) * D;
  while (true) {
    ClockValuation v;
    for (size_t i = 0; i < t.clocks.size(); ++i)
      v[t.clocks[i]] = Rat(idx[i], D);
    Region r = region_of(t.clocks, v, K);
    if (seen.insert(r).second) regions.push_back(r);
    size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (idx[i] < top) {
        ++idx[i];
        break;
      }
      idx[i] = 0;
    }
    if (i == idx.size()) break;
    if (idx.empty()) break;
  }
  if (t.clocks.empty()) {
    Region r;
    regions = {r};
  }
  return regions;
}

std::vector<std::string> validate_observer(const ObserverSpec& o) {
  std::vector<std::string> errs;
  const TimedAutomaton& a = o.ta;
  if (o.observe.size() != a.locations.size())
    return {"observation sets do not match the location list"};
  for (const auto& l : a.locations)
    if (!l.invariant.is_true())
      errs.push_back("location " + l.name + ": invariant must be TRUE");
  for (const auto& e : a.edges)
    if (!e.label.is_event())
      errs.push_back("edge " + a.locations[e.src].name + "->" +
                     a.locations[e.dst].name + ": silent/fault labels are "
                     "not allowed in an observer");
  if (!errs.empty()) return errs;

  long long K = 0;
  std::vector<Region> regions = observer_regions(o, &K);
  TimedAutomaton t = a.scaled(o.gran_den);
  for (size_t n = 0; n < a.locations.size(); ++n) {
    auto watched = obs_set(o, static_cast<int>(n));
    for (const auto& ev : a.alphabet) {
      std::vector<int> edges;
      for (size_t i = 0; i < t.edges.size(); ++i)
        if (t.edges[i].src == static_cast<int>(n) &&
            t.edges[i].label == Label::ev(ev))
          edges.push_back(static_cast<int>(i));
      if (!watched.count(ev)) {
        for (int i : edges) {
          const Edge& e = t.edges[i];
          if (e.dst != static_cast<int>(n) || !e.resets.empty())
            errs.push_back("location " + a.locations[n].name + ", event " +
                           ev + ": unobserved event must not change the "
                           "location nor reset clocks");
        }
        continue;
      }
      for (const Region& r : regions) {
        int enabled = 0;
        for (int i : edges)
          if (region_satisfies(r, t.edges[i].guard, t.clocks)) ++enabled;
        if (enabled == 0)
          errs.push_back("location " + a.locations[n].name + ", event " + ev +
                         ": no edge enabled in region " +
                         region_str(r, t.clocks, K) + " (incomplete)");
        else if (enabled > 1)
          errs.push_back("location " + a.locations[n].name + ", event " + ev +
                         ": " + std::to_string(enabled) +
                         " edges enabled in region " +
                         region_str(r, t.clocks, K) + " (nondeterministic)");
      }
    }
  }
  return errs;
}

TimedWord observe(const ObserverSpec& o, const TimedWord& w) {
  const TimedAutomaton& a = o.ta;
  int loc = a.initial;
  ClockValuation v = a.zero_valuation();
  TimedWord out;
  for (size_t i = 0; i < w.events.size(); ++i) {
    v = delay(v, w.delays[i]);
    out.delays.back() += w.delays[i];
    const std::string& ev = w.events[i];
    auto watched = obs_set(o, loc);
    if (!watched.count(ev)) continue;  // stay put, nothing emitted
    int taken = -1;
    for (size_t e = 0; e < a.edges.size(); ++e)
      if (a.edges[e].src == loc && a.edges[e].label == Label::ev(ev) &&
          satisfies(v, a.edges[e].guard)) {
        taken = static_cast<int>(e);
        break;
      }
    if (taken < 0)
      throw Error("observer is incomplete: no move on " + ev + " at " +
                  a.locations[loc].name);
    v = reset(v, a.edges[taken].resets);
    loc = a.edges[taken].dst;
    out.events.push_back(ev);
    out.delays.push_back(Rat(0));
  }
  out.delays.back() += w.delays.back();
  return out;
}

ObsProduct product_obs(const TimedAutomaton& a, const ObserverSpec& o) {
  for (const auto& c : a.clocks)
    if (o.ta.clock_index(c) >= 0)
      throw Error("plant and observer share clock " + c);
  const TimedAutomaton& ob = o.ta;
  ObsProduct res;
  TimedAutomaton& p = res.ta;
  p.name = a.name + "(x)" + ob.name;
  p.clocks = a.clocks;
  p.clocks.insert(p.clocks.end(), ob.clocks.begin(), ob.clocks.end());
  p.alphabet = a.alphabet;

  std::map<std::pair<int, int>, int> index;
  std::deque<int> q;
  auto intern = [&](int l, int n) {
    auto key = std::make_pair(l, n);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    Location loc = a.locations[l];
    loc.name += "|" + ob.locations[n].name;
    loc.cost = ob.locations[n].cost;  // observation cost lives in locations
    int id = static_cast<int>(p.locations.size());
    p.locations.push_back(loc);
    res.loc_pair.emplace_back(l, n);
    index[key] = id;
    q.push_back(id);
    return id;
  };
  p.initial = intern(a.initial, ob.initial);
  while (!q.empty()) {
    int id = q.front();
    q.pop_front();
    auto [l, n] = res.loc_pair[id];
    auto watched = obs_set(o, n);
    for (size_t i = 0; i < a.edges.size(); ++i) {
      const Edge& e = a.edges[i];
      if (e.src != l) continue;
      if (!e.label.is_event()) {
        // silent and fault moves leave the observer in place
        Edge ne = e;
        ne.src = id;
        ne.dst = intern(e.dst, n);
        ne.cost = 0;
        p.edges.push_back(ne);
        res.edge_pair.emplace_back(static_cast<int>(i), -1);
        continue;
      }
      if (!watched.count(e.label.event)) {
        // unobserved: observer stays put, the event becomes silent
        Edge ne = e;
        ne.src = id;
        ne.dst = intern(e.dst, n);
        ne.label = Label::tau();
        ne.cost = 0;
        p.edges.push_back(ne);
        res.edge_pair.emplace_back(static_cast<int>(i), -1);
        continue;
      }
      for (size_t j = 0; j < ob.edges.size(); ++j) {
        const Edge& oe = ob.edges[j];
        if (oe.src != n || !(oe.label == e.label)) continue;
        Edge ne = e;
        ne.src = id;
        ne.dst = intern(e.dst, oe.dst);
        ne.guard.atoms.insert(ne.guard.atoms.end(), oe.guard.atoms.begin(),
                              oe.guard.atoms.end());
        ne.resets.insert(ne.resets.end(), oe.resets.begin(), oe.resets.end());
        ne.cost = oe.cost;  // the observation cost of the move
        p.edges.push_back(ne);
        res.edge_pair.emplace_back(static_cast<int>(i),
                                   static_cast<int>(j));
      }
    }
  }
  return res;
}

Verdict check_obs_diag(const TimedAutomaton& a, const ObserverSpec& o,
                       long long delta) {
  auto errs = validate_observer(o);
  if (!errs.empty()) throw Error("invalid observer: " + errs.front());
  ObsProduct prod = product_obs(a, o);
  TimedAutomaton scaled = prod.ta.scaled(o.gran_den);
  std::set<std::string> sigma(a.alphabet.begin(), a.alphabet.end());
  Verdict v = check_delta_diag(scaled, sigma, delta * o.gran_den);
  v.delta_checked = delta;
  if (v.faulty) {
    v.faulty->run = unscale_run(v.faulty->run, o.gran_den);
    v.faulty->trace = trace_of(prod.ta, v.faulty->run);
  }
  if (v.nonfaulty) {
    v.nonfaulty->run = unscale_run(v.nonfaulty->run, o.gran_den);
    v.nonfaulty->trace = trace_of(prod.ta, v.nonfaulty->run);
  }
  return v;
}

std::optional<long long> min_delta_obs(const TimedAutomaton& a,
                                       const ObserverSpec& o) {
  ObsProduct prod = product_obs(a, o);
  TimedAutomaton scaled = prod.ta.scaled(o.gran_den);
  std::set<std::string> sigma(a.alphabet.begin(), a.alphabet.end());
  long long hi = delta_bound(scaled, sigma);  // scaled time units; generous
  if (!check_obs_diag(a, o, hi).diagnosable) return std::nullopt;
  long long lo = 0;
  while (lo < hi) {
    long long mid = lo + (hi - lo) / 2;
    if (check_obs_diag(a, o, mid).diagnosable)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

ObserverSpec always_observer(const TimedAutomaton& a,
                             const std::vector<std::string>& watched,
                             long long loc_cost) {
  ObserverSpec o;
  o.ta.name = "always";
  o.ta.alphabet = a.alphabet;
  Location n0;
  n0.name = "n0";
  n0.cost = loc_cost;
  o.ta.locations.push_back(n0);
  o.ta.initial = 0;
  for (const auto& ev : watched) {
    Edge e;
    e.src = e.dst = 0;
    e.label = Label::ev(ev);
    o.ta.edges.push_back(e);
  }
  o.observe.push_back(watched);
  return o;
}

}  // namespace tadiag
