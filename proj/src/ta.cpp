#include "tadiag/ta.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace tadiag {

std::string Label::str() const {
  switch (kind) {
    case Kind::Tau:
      return "tau";
    case Kind::Fault:
      return "fault";
    default:
      return event;
  }
}

std::string rel_str(Rel r) {
  switch (r) {
    case Rel::Lt:
      return "<";
    case Rel::Le:
      return "<=";
    case Rel::Eq:
      return "=";
    case Rel::Ge:
      return ">=";
    default:
      return ">";
  }
}

bool Atom::eval(const Rat& value) const {
  switch (rel) {
    case Rel::Lt:
      return value < bound;
    case Rel::Le:
      return value <= bound;
    case Rel::Eq:
      return value == bound;
    case Rel::Ge:
      return value >= bound;
    default:
      return value > bound;
  }
}

std::string Atom::str() const {
  return clock + " " + rel_str(rel) + " " + rat_str(bound);
}

bool Guard::upper_bounds_only() const {
  for (const auto& a : atoms)
    if (a.rel != Rel::Lt && a.rel != Rel::Le) return false;
  return true;
}

std::string Guard::str() const {
  if (atoms.empty()) return "true";
  std::string s;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (i) s += " and ";
    s += atoms[i].str();
  }
  return s;
}

bool operator==(const Guard& a, const Guard& b) {
  if (a.atoms.size() != b.atoms.size()) return false;
  for (size_t i = 0; i < a.atoms.size(); ++i) {
    const Atom &x = a.atoms[i], &y = b.atoms[i];
    if (x.clock != y.clock || x.rel != y.rel || x.bound != y.bound)
      return false;
  }
  return true;
}

ClockValuation delay(const ClockValuation& v, const Rat& delta) {
  ClockValuation out = v;
  for (auto& [c, val] : out) val += delta;
  return out;
}

ClockValuation reset(const ClockValuation& v,
                     const std::vector<std::string>& clocks) {
  ClockValuation out = v;
  for (const auto& c : clocks) out[c] = Rat(0);
  return out;
}

bool satisfies(const ClockValuation& v, const Guard& g) {
  for (const auto& a : g.atoms) {
    auto it = v.find(a.clock);
    if (it == v.end()) throw Error("unknown clock in guard: " + a.clock);
    if (!a.eval(it->second)) return false;
  }
  return true;
}

Rat TimedWord::duration() const {
  Rat d(0);
  for (const auto& x : delays) d += x;
  return d;
}

std::string TimedWord::str() const {
  std::string s = rat_str(delays[0]);
  for (size_t i = 0; i < events.size(); ++i)
    s += " " + events[i] + " " + rat_str(delays[i + 1]);
  return s;
}

TimedWord project(const TimedWord& w, const std::set<std::string>& sigma) {
  TimedWord out;
  out.delays = {w.delays[0]};
  for (size_t i = 0; i < w.events.size(); ++i) {
    if (sigma.count(w.events[i])) {
      out.events.push_back(w.events[i]);
      out.delays.push_back(w.delays[i + 1]);
    } else {
      out.delays.back() += w.delays[i + 1];
    }
  }
  return out;
}

std::vector<std::string> untime(const TimedWord& w) { return w.events; }

TimedWord concat(const TimedWord& u, const TimedWord& v) {
  TimedWord out = u;
  out.delays.back() += v.delays[0];
  for (size_t i = 0; i < v.events.size(); ++i) {
    out.events.push_back(v.events[i]);
    out.delays.push_back(v.delays[i + 1]);
  }
  return out;
}

bool Location::has_tag(const std::string& t) const {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

int TimedAutomaton::location_index(const std::string& n) const {
  for (size_t i = 0; i < locations.size(); ++i)
    if (locations[i].name == n) return static_cast<int>(i);
  return -1;
}

int TimedAutomaton::clock_index(const std::string& n) const {
  for (size_t i = 0; i < clocks.size(); ++i)
    if (clocks[i] == n) return static_cast<int>(i);
  return -1;
}

bool TimedAutomaton::has_event(const std::string& e) const {
  return std::find(alphabet.begin(), alphabet.end(), e) != alphabet.end();
}

ClockValuation TimedAutomaton::zero_valuation() const {
  ClockValuation v;
  for (const auto& c : clocks) v[c] = Rat(0);
  return v;
}

long long TimedAutomaton::max_constant(long long scale) const {
  long long k = 0;
  auto visit = [&](const Guard& g) {
    for (const auto& a : g.atoms) {
      Rat b = a.bound * Rat(scale);
      if (b.denominator() != 1)
        throw Error("constant " + rat_str(a.bound) +
                    " is not an integer at granularity 1/" +
                    std::to_string(scale));
      k = std::max(k, b.numerator());
    }
  };
  for (const auto& l : locations) visit(l.invariant);
  for (const auto& e : edges) visit(e.guard);
  return k;
}

TimedAutomaton TimedAutomaton::scaled(long long m) const {
  TimedAutomaton out = *this;
  if (m == 1) return out;
  for (auto& l : out.locations)
    for (auto& a : l.invariant.atoms) a.bound *= Rat(m);
  for (auto& e : out.edges) {
    for (auto& a : e.guard.atoms) a.bound *= Rat(m);
    e.cost *= m;
  }
  return out;
}

void TimedAutomaton::validate() const {
  if (locations.empty()) throw Error("automaton has no locations");
  if (initial < 0 || initial >= static_cast<int>(locations.size()))
    throw Error("bad initial location index");
  std::set<std::string> locnames, clockset(clocks.begin(), clocks.end());
  for (const auto& l : locations) {
    if (!locnames.insert(l.name).second)
      throw Error("duplicate location: " + l.name);
    if (!l.invariant.upper_bounds_only())
      throw Error("invariant of " + l.name + " must use only < or <=");
    for (const auto& a : l.invariant.atoms)
      if (!clockset.count(a.clock))
        throw Error("unknown clock in invariant: " + a.clock);
  }
  if (clockset.size() != clocks.size()) throw Error("duplicate clock");
  std::set<std::string> evset(alphabet.begin(), alphabet.end());
  if (evset.size() != alphabet.size()) throw Error("duplicate event");
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= static_cast<int>(locations.size()) ||
        e.dst < 0 || e.dst >= static_cast<int>(locations.size()))
      throw Error("edge endpoint out of range");
    if (e.label.is_event() && !evset.count(e.label.event))
      throw Error("edge label not in alphabet: " + e.label.event);
    for (const auto& a : e.guard.atoms)
      if (!clockset.count(a.clock))
        throw Error("unknown clock in guard: " + a.clock);
    for (const auto& c : e.resets)
      if (!clockset.count(c)) throw Error("unknown clock in reset: " + c);
  }
}

TimedAutomaton prune_unreachable(const TimedAutomaton& a,
                                 std::vector<int>* loc_map,
                                 std::vector<int>* edge_map) {
  std::vector<bool> seen(a.locations.size(), false);
  std::deque<int> q{a.initial};
  seen[a.initial] = true;
  while (!q.empty()) {
    int l = q.front();
    q.pop_front();
    for (const auto& e : a.edges)
      if (e.src == l && !seen[e.dst]) {
        seen[e.dst] = true;
        q.push_back(e.dst);
      }
  }
  std::vector<int> newidx(a.locations.size(), -1);
  TimedAutomaton out;
  out.name = a.name;
  out.clocks = a.clocks;
  out.alphabet = a.alphabet;
  if (loc_map) loc_map->clear();
  if (edge_map) edge_map->clear();
  for (size_t i = 0; i < a.locations.size(); ++i)
    if (seen[i]) {
      newidx[i] = static_cast<int>(out.locations.size());
      out.locations.push_back(a.locations[i]);
      if (loc_map) loc_map->push_back(static_cast<int>(i));
    }
  out.initial = newidx[a.initial];
  for (size_t i = 0; i < a.edges.size(); ++i) {
    const Edge& e = a.edges[i];
    if (!seen[e.src]) continue;
    Edge ne = e;
    ne.src = newidx[e.src];
    ne.dst = newidx[e.dst];
    out.edges.push_back(ne);
    if (edge_map) edge_map->push_back(static_cast<int>(i));
  }
  return out;
}

ProductResult product(const TimedAutomaton& a1, const TimedAutomaton& a2) {
  for (const auto& c : a1.clocks)
    if (a2.clock_index(c) >= 0)
      throw Error("product requires disjoint clocks; shared clock " + c);
  std::set<std::string> ev1(a1.alphabet.begin(), a1.alphabet.end());
  std::set<std::string> ev2(a2.alphabet.begin(), a2.alphabet.end());
  std::set<std::string> shared;
  for (const auto& e : ev1)
    if (ev2.count(e)) shared.insert(e);

  ProductResult res;
  TimedAutomaton& p = res.ta;
  p.name = a1.name + "*" + a2.name;
  p.clocks = a1.clocks;
  p.clocks.insert(p.clocks.end(), a2.clocks.begin(), a2.clocks.end());
  std::set<std::string> evs = ev1;
  evs.insert(ev2.begin(), ev2.end());
  p.alphabet.assign(evs.begin(), evs.end());

  std::map<std::pair<int, int>, int> index;
  auto loc_of = [&](int l1, int l2) {
    auto key = std::make_pair(l1, l2);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    Location loc;
    loc.name = a1.locations[l1].name + "|" + a2.locations[l2].name;
    loc.invariant.atoms = a1.locations[l1].invariant.atoms;
    for (const auto& at : a2.locations[l2].invariant.atoms)
      loc.invariant.atoms.push_back(at);
    loc.cost = a1.locations[l1].cost + a2.locations[l2].cost;
    loc.is_final =
        a1.locations[l1].is_final && a2.locations[l2].is_final;
    loc.is_repeated =
        a1.locations[l1].is_repeated && a2.locations[l2].is_repeated;
    int id = static_cast<int>(p.locations.size());
    p.locations.push_back(loc);
    res.loc_pair.push_back(key);
    index[key] = id;
    return id;
  };

  int init = loc_of(a1.initial, a2.initial);
  p.initial = init;
  std::deque<int> q{init};
  std::set<int> done{init};
  auto merge_guard = [](const Guard& g1, const Guard& g2) {
    Guard g = g1;
    g.atoms.insert(g.atoms.end(), g2.atoms.begin(), g2.atoms.end());
    return g;
  };
  while (!q.empty()) {
    int id = q.front();
    q.pop_front();
    auto [l1, l2] = res.loc_pair[id];
    auto push = [&](int nid) {
      if (done.insert(nid).second) q.push_back(nid);
    };
    for (size_t i = 0; i < a1.edges.size(); ++i) {
      const Edge& e1 = a1.edges[i];
      if (e1.src != l1) continue;
      bool sync = e1.label.is_event() && shared.count(e1.label.event);
      if (!sync) {
        int nid = loc_of(e1.dst, l2);
        p.edges.push_back({id, nid, e1.guard, e1.label, e1.resets, e1.cost});
        res.edge_pair.emplace_back(static_cast<int>(i), -1);
        push(nid);
      } else {
        for (size_t j = 0; j < a2.edges.size(); ++j) {
          const Edge& e2 = a2.edges[j];
          if (e2.src != l2 || !(e2.label == e1.label)) continue;
          int nid = loc_of(e1.dst, e2.dst);
          std::vector<std::string> rs = e1.resets;
          rs.insert(rs.end(), e2.resets.begin(), e2.resets.end());
          p.edges.push_back({id, nid, merge_guard(e1.guard, e2.guard),
                             e1.label, rs, e1.cost + e2.cost});
          res.edge_pair.emplace_back(static_cast<int>(i),
                                     static_cast<int>(j));
          push(nid);
        }
      }
    }
    for (size_t j = 0; j < a2.edges.size(); ++j) {
      const Edge& e2 = a2.edges[j];
      if (e2.src != l2) continue;
      bool sync = e2.label.is_event() && shared.count(e2.label.event);
      if (sync) continue;
      int nid = loc_of(l1, e2.dst);
      p.edges.push_back({id, nid, e2.guard, e2.label, e2.resets, e2.cost});
      res.edge_pair.emplace_back(-1, static_cast<int>(j));
      push(nid);
    }
  }
  return res;
}

Mask normalize_mask(const Mask& m, std::vector<std::string>* warnings) {
  std::set<int> used;
  for (const auto& [e, c] : m.map)
    if (c > 0) used.insert(c);
  std::map<int, int> renum;
  int next = 1;
  for (int c = 1; c <= m.n; ++c) {
    if (used.count(c)) {
      renum[c] = next++;
    } else if (warnings) {
      warnings->push_back("mask class " + std::to_string(c) +
                          " is unused; renumbering");
    }
  }
  Mask out;
  out.n = next - 1;
  for (const auto& [e, c] : m.map) out.map[e] = c > 0 ? renum[c] : 0;
  return out;
}

TimedAutomaton apply_mask(const TimedAutomaton& a, const Mask& m) {
  TimedAutomaton out = a;
  std::set<std::string> alpha;
  for (auto& e : out.edges) {
    if (!e.label.is_event()) continue;
    auto it = m.map.find(e.label.event);
    int cls = it == m.map.end() ? 0 : it->second;
    if (cls == 0)
      e.label = Label::tau();
    else
      e.label = Label::ev(std::to_string(cls));
  }
  for (int c = 1; c <= m.n; ++c) alpha.insert(std::to_string(c));
  out.alphabet.assign(alpha.begin(), alpha.end());
  std::sort(out.alphabet.begin(), out.alphabet.end());
  return out;
}

TimedWord mask_word(const Mask& m, const TimedWord& w) {
  TimedWord out;
  out.delays = {w.delays[0]};
  for (size_t i = 0; i < w.events.size(); ++i) {
    auto it = m.map.find(w.events[i]);
    int cls = it == m.map.end() ? 0 : it->second;
    if (cls == 0) {
      out.delays.back() += w.delays[i + 1];
    } else {
      out.events.push_back(std::to_string(cls));
      out.delays.push_back(w.delays[i + 1]);
    }
  }
  return out;
}

FaultMonitor build_fault_monitor(const TimedAutomaton& a, long long delta) {
  std::string z = "z";
  while (a.clock_index(z) >= 0) z += "_";
  int n = static_cast<int>(a.locations.size());

  TimedAutomaton m;
  m.name = a.name + "_mon";
  m.clocks = a.clocks;
  m.clocks.push_back(z);
  m.alphabet = a.alphabet;
  m.initial = a.initial;
  std::vector<int> copy_of, orig_loc;
  for (int copy = 1; copy <= 3; ++copy) {
    const char* tag = copy == 1   ? kTagNonFaulty
                      : copy == 2 ? kTagFaulty
                                  : kTagDeltaFaulty;
    for (int l = 0; l < n; ++l) {
      Location loc = a.locations[l];
      loc.name += copy == 1 ? "" : (copy == 2 ? "'" : "''");
      loc.tags.push_back(tag);
      m.locations.push_back(loc);
      copy_of.push_back(copy);
      orig_loc.push_back(l);
    }
  }
  std::vector<int> orig_edge;
  for (size_t i = 0; i < a.edges.size(); ++i) {
    const Edge& e = a.edges[i];
    if (e.label.is_fault()) {
      // fault jumps from copy 1 to copy 2 and starts the fault clock
      Edge ne = e;
      ne.src = e.src;
      ne.dst = n + e.dst;
      ne.resets.push_back(z);
      m.edges.push_back(ne);
      orig_edge.push_back(static_cast<int>(i));
    } else {
      for (int base : {0, n, 2 * n}) {
        if (base == 0 && e.label.is_fault()) continue;
        Edge ne = e;
        ne.src = base + e.src;
        ne.dst = base + e.dst;
        m.edges.push_back(ne);
        orig_edge.push_back(static_cast<int>(i));
      }
    }
  }
  // silent switch once the fault is strictly older than delta
  for (int l = 0; l < n; ++l) {
    Edge sw;
    sw.src = n + l;
    sw.dst = 2 * n + l;
    sw.label = Label::tau();
    sw.guard.atoms.push_back({z, Rel::Gt, Rat(delta)});
    m.edges.push_back(sw);
    orig_edge.push_back(-1);
  }

  std::vector<int> lmap, emap;
  FaultMonitor fm;
  fm.ta = prune_unreachable(m, &lmap, &emap);
  fm.z_clock = z;
  for (int ol : lmap) {
    fm.copy_of.push_back(copy_of[ol]);
    fm.orig_loc.push_back(orig_loc[ol]);
  }
  for (int oe : emap) fm.orig_edge.push_back(orig_edge[oe]);
  return fm;
}

Restriction restrict_nonfaulty(const TimedAutomaton& a) {
  TimedAutomaton b = a;
  std::vector<int> keep;
  b.edges.clear();
  for (size_t i = 0; i < a.edges.size(); ++i)
    if (!a.edges[i].label.is_fault()) {
      b.edges.push_back(a.edges[i]);
      keep.push_back(static_cast<int>(i));
    }
  std::vector<int> lmap, emap;
  Restriction r;
  r.ta = prune_unreachable(b, &lmap, &emap);
  r.orig_loc = lmap;
  for (int e : emap) r.orig_edge.push_back(keep[e]);
  return r;
}

std::optional<SimState> simulate(const TimedAutomaton& a, const Run& run,
                                 std::string* error) {
  SimState st{a.initial, a.zero_valuation()};
  auto fail = [&](const std::string& msg) -> std::optional<SimState> {
    if (error) *error = msg;
    return std::nullopt;
  };
  if (!satisfies(st.val, a.locations[st.loc].invariant))
    return fail("initial valuation violates invariant");
  for (const auto& s : run.steps) {
    if (s.is_delay) {
      if (s.delta < Rat(0)) return fail("negative delay");
      st.val = delay(st.val, s.delta);
      if (!satisfies(st.val, a.locations[st.loc].invariant))
        return fail("delay violates invariant of " +
                    a.locations[st.loc].name);
    } else {
      if (s.edge < 0 || s.edge >= static_cast<int>(a.edges.size()))
        return fail("edge index out of range");
      const Edge& e = a.edges[s.edge];
      if (e.src != st.loc)
        return fail("edge " + std::to_string(s.edge) +
                    " does not start at current location");
      if (!satisfies(st.val, e.guard))
        return fail("guard of edge " + std::to_string(s.edge) + " fails");
      st.val = reset(st.val, e.resets);
      st.loc = e.dst;
      if (!satisfies(st.val, a.locations[st.loc].invariant))
        return fail("target invariant of edge " + std::to_string(s.edge) +
                    " fails");
    }
  }
  return st;
}

TimedWord trace_of(const TimedAutomaton& a, const Run& run) {
  TimedWord w;
  for (const auto& s : run.steps) {
    if (s.is_delay) {
      w.delays.back() += s.delta;
    } else if (a.edges[s.edge].label.is_event()) {
      w.events.push_back(a.edges[s.edge].label.event);
      w.delays.push_back(Rat(0));
    }
  }
  return w;
}

Rat run_duration(const Run& run) {
  Rat d(0);
  for (const auto& s : run.steps)
    if (s.is_delay) d += s.delta;
  return d;
}

Run unscale_run(const Run& run, long long m) {
  Run out = run;
  if (m != 1)
    for (auto& s : out.steps)
      if (s.is_delay) s.delta /= Rat(m);
  return out;
}

}  // namespace tadiag
