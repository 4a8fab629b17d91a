#include "tadiag/region.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace tadiag {

bool operator<(const Region& a, const Region& b) {
  if (a.groups != b.groups) return a.groups < b.groups;
  if (a.parts.size() != b.parts.size()) return a.parts.size() < b.parts.size();
  for (size_t i = 0; i < a.parts.size(); ++i) {
    const auto &x = a.parts[i], &y = b.parts[i];
    auto tx = std::make_tuple(x.above, x.above ? 0 : x.ip, x.ord);
    auto ty = std::make_tuple(y.above, y.above ? 0 : y.ip, y.ord);
    if (tx != ty) return tx < ty;
  }
  return false;
}

Region region_of(const std::vector<std::string>& clocks,
                 const ClockValuation& v, long long K) {
  Region r;
  std::vector<Rat> fracs;
  for (const auto& c : clocks) {
    auto it = v.find(c);
    if (it == v.end()) throw Error("valuation misses clock " + c);
    const Rat& val = it->second;
    Region::ClockPart p;
    if (val > Rat(K)) {
      p.above = true;
    } else {
      p.ip = rat_floor(val);
      Rat frac = val - Rat(p.ip);
      if (frac > Rat(0)) fracs.push_back(frac);
    }
    r.parts.push_back(p);
  }
  std::sort(fracs.begin(), fracs.end());
  fracs.erase(std::unique(fracs.begin(), fracs.end()), fracs.end());
  r.groups = static_cast<int>(fracs.size());
  size_t i = 0;
  for (const auto& c : clocks) {
    Region::ClockPart& p = r.parts[i];
    const Rat& val = v.at(c);
    if (!p.above) {
      Rat frac = val - Rat(p.ip);
      if (frac > Rat(0))
        p.ord = static_cast<int>(
            std::lower_bound(fracs.begin(), fracs.end(), frac) -
            fracs.begin());
    }
    ++i;
  }
  return r;
}

namespace {

// remaps ordering ranks to a dense 0..groups-1 range after clocks dropped
// out of their groups
void renormalize(Region& r) {
  std::vector<int> used;
  for (const auto& p : r.parts)
    if (!p.above && p.ord >= 0) used.push_back(p.ord);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (auto& p : r.parts)
    if (!p.above && p.ord >= 0)
      p.ord = static_cast<int>(
          std::lower_bound(used.begin(), used.end(), p.ord) - used.begin());
  r.groups = static_cast<int>(used.size());
}

}  // namespace

std::optional<Region> time_successor(const Region& r, long long K) {
  bool all_above = true;
  bool any_zero = false;
  for (const auto& p : r.parts) {
    if (!p.above) {
      all_above = false;
      if (p.ord < 0) any_zero = true;
    }
  }
  if (all_above) return std::nullopt;
  Region s = r;
  if (any_zero) {
    // fraction-zero clocks start moving: ip == K goes above, ip < K gains
    // the smallest positive fraction
    bool new_group = false;
    for (auto& p : s.parts) {
      if (p.above || p.ord >= 0) continue;
      if (p.ip == K) {
        p.above = true;
        p.ord = -1;
      } else {
        new_group = true;
      }
    }
    if (new_group) {
      for (auto& p : s.parts)
        if (!p.above && p.ord >= 0) ++p.ord;
      for (auto& p : s.parts)
        if (!p.above && p.ord < 0) p.ord = 0;
      ++s.groups;
    }
  } else {
    // the largest fractions reach the next integer
    int top = s.groups - 1;
    for (auto& p : s.parts) {
      if (p.above || p.ord != top) continue;
      p.ord = -1;
      ++p.ip;
    }
    --s.groups;
  }
  renormalize(s);
  return s;
}

bool region_satisfies(const Region& r, const Guard& g,
                      const std::vector<std::string>& clocks) {
  for (const auto& a : g.atoms) {
    if (a.bound.denominator() != 1)
      throw Error("non-integer constant in region check: " + a.str());
    long long c = a.bound.numerator();
    int ci = -1;
    for (size_t i = 0; i < clocks.size(); ++i)
      if (clocks[i] == a.clock) ci = static_cast<int>(i);
    if (ci < 0) throw Error("unknown clock " + a.clock);
    const Region::ClockPart& p = r.parts[ci];
    bool ok;
    if (p.above) {
      ok = a.rel == Rel::Gt || a.rel == Rel::Ge;
    } else {
      switch (a.rel) {
        case Rel::Lt:
          ok = p.ip < c;
          break;
        case Rel::Le:
          ok = p.ip < c || (p.ip == c && p.ord < 0);
          break;
        case Rel::Eq:
          ok = p.ip == c && p.ord < 0;
          break;
        case Rel::Ge:
          ok = p.ip >= c;
          break;
        default:
          ok = p.ip > c || (p.ip == c && p.ord >= 0);
      }
    }
    if (!ok) return false;
  }
  return true;
}

Region region_reset(const Region& r, const std::vector<std::string>& clocks,
                    const std::vector<std::string>& resets) {
  Region s = r;
  for (const auto& c : resets) {
    for (size_t i = 0; i < clocks.size(); ++i)
      if (clocks[i] == c) {
        s.parts[i] = Region::ClockPart{};
      }
  }
  renormalize(s);
  return s;
}

bool region_time_open(const Region& r) {
  for (const auto& p : r.parts)
    if (!p.above && p.ord < 0) return false;
  return true;
}

std::string region_str(const Region& r, const std::vector<std::string>& clocks,
                       long long K) {
  std::vector<std::string> terms;
  for (size_t i = 0; i < clocks.size(); ++i) {
    const auto& p = r.parts[i];
    if (p.above)
      terms.push_back(clocks[i] + ">" + std::to_string(K));
    else if (p.ord < 0)
      terms.push_back(clocks[i] + "=" + std::to_string(p.ip));
    else
      terms.push_back(std::to_string(p.ip) + "<" + clocks[i] + "<" +
                      std::to_string(p.ip + 1));
  }
  // fractional ordering: equalities within a group, < between groups
  std::vector<std::vector<std::string>> grp(r.groups);
  for (size_t i = 0; i < clocks.size(); ++i)
    if (!r.parts[i].above && r.parts[i].ord >= 0)
      grp[r.parts[i].ord].push_back(clocks[i]);
  for (const auto& g : grp)
    for (size_t j = 1; j < g.size(); ++j)
      terms.push_back("frac(" + g[0] + ")=frac(" + g[j] + ")");
  for (int k = 0; k + 1 < r.groups; ++k)
    terms.push_back("frac(" + grp[k][0] + ")<frac(" + grp[k + 1][0] + ")");
  std::string s;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i) s += ", ";
    s += terms[i];
  }
  return s.empty() ? "true" : s;
}

ClockValuation region_sample(const Region& r,
                             const std::vector<std::string>& clocks,
                             long long K) {
  ClockValuation v;
  for (size_t i = 0; i < clocks.size(); ++i) {
    const auto& p = r.parts[i];
    if (p.above)
      v[clocks[i]] = Rat(K) + Rat(1, 2);
    else if (p.ord < 0)
      v[clocks[i]] = Rat(p.ip);
    else
      v[clocks[i]] = Rat(p.ip) + Rat(p.ord + 1, r.groups + 1);
  }
  return v;
}

// ---------------------------------------------------------------------------

int RegionGraph::state_index(int loc, const Region& r) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].loc == loc && states[i].region == r)
      return static_cast<int>(i);
  return -1;
}

std::string RegionGraph::state_str(int s) const {
  return ta.locations[states[s].loc].name + " | " +
         region_str(states[s].region, ta.clocks, K);
}

RegionGraph build_region_graph_multi(const TimedAutomaton& a,
                                     const std::vector<int>& initial_locs,
                                     long long m, long long min_k) {
  RegionGraph rg;
  rg.ta = a.scaled(m);
  rg.scale = m;
  rg.K = std::max(rg.ta.max_constant(), min_k);
  const TimedAutomaton& t = rg.ta;

  std::map<std::pair<int, Region>, int> index;
  std::deque<int> q;
  auto intern = [&](int loc, const Region& r) {
    auto key = std::make_pair(loc, r);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(rg.states.size());
    rg.states.push_back({loc, r});
    rg.out.emplace_back();
    index[key] = id;
    q.push_back(id);
    return id;
  };

  Region zero = region_of(t.clocks, t.zero_valuation(), rg.K);
  for (int l : initial_locs) {
    if (!region_satisfies(zero, t.locations[l].invariant, t.clocks)) continue;
    rg.initials.push_back(intern(l, zero));
  }
  while (!q.empty()) {
    int id = q.front();
    q.pop_front();
    int loc = rg.states[id].loc;
    Region r = rg.states[id].region;
    for (size_t ei = 0; ei < t.edges.size(); ++ei) {
      const Edge& e = t.edges[ei];
      if (e.src != loc) continue;
      if (!region_satisfies(r, e.guard, t.clocks)) continue;
      Region nr = region_reset(r, t.clocks, e.resets);
      if (!region_satisfies(nr, t.locations[e.dst].invariant, t.clocks))
        continue;
      int dst = intern(e.dst, nr);  // may grow rg.out; index before push
      rg.out[id].push_back({dst, static_cast<int>(ei)});
    }
    if (auto ts = time_successor(r, rg.K)) {
      if (region_satisfies(*ts, t.locations[loc].invariant, t.clocks)) {
        int dst = intern(loc, *ts);
        rg.out[id].push_back({dst, -1});
      }
    }
  }
  return rg;
}

RegionGraph build_region_graph(const TimedAutomaton& a, long long m,
                               long long min_k) {
  return build_region_graph_multi(a, {a.initial}, m, min_k);
}

Run concretize_arcs(const RegionGraph& rg, int start,
                    const std::vector<RegionGraph::Arc>& arcs) {
  Run run;
  const TimedAutomaton& t = rg.ta;
  ClockValuation v = t.zero_valuation();
  int cur = start;
  for (const auto& arc : arcs) {
    int nxt = arc.dst;
    if (arc.edge >= 0) {
      run.steps.push_back(RunStep::edge_step(arc.edge));
      v = reset(v, t.edges[arc.edge].resets);
      cur = nxt;
      continue;
    }
    // delay into the time-successor region
    const Region& target = rg.states[nxt].region;
    Rat delta(-1);
    for (size_t i = 0; i < t.clocks.size(); ++i) {
      const auto& p = target.parts[i];
      if (!p.above && p.ord < 0) {
        // this clock lands exactly on an integer
        delta = Rat(p.ip) - v[t.clocks[i]];
        break;
      }
    }
    if (delta < Rat(0)) {
      // open successor: step half-way to the next integer boundary
      Rat gap(-1);
      for (size_t i = 0; i < t.clocks.size(); ++i) {
        const auto& p = rg.states[cur].region.parts[i];
        if (p.above) continue;
        Rat g = Rat(rat_floor(v[t.clocks[i]]) + 1) - v[t.clocks[i]];
        if (gap < Rat(0) || g < gap) gap = g;
      }
      delta = gap < Rat(0) ? Rat(1, 2) : gap / Rat(2);
    }
    run.steps.push_back(RunStep::delay_step(delta));
    v = delay(v, delta);
    cur = nxt;
  }
  return unscale_run(run, rg.scale);
}

Run concretize_path(const RegionGraph& rg, const std::vector<int>& path) {
  std::vector<RegionGraph::Arc> arcs;
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const RegionGraph::Arc* found = nullptr;
    // prefer the time-successor arc when both a tau arc and an edge arc
    // join the same pair of states
    for (const auto& a : rg.out[path[k]])
      if (a.dst == path[k + 1] && (!found || a.edge < found->edge))
        found = &a;
    if (!found) throw Error("path is not connected in the region graph");
    arcs.push_back(*found);
  }
  return concretize_arcs(rg, path.empty() ? 0 : path[0], arcs);
}

// ---------------------------------------------------------------------------

namespace {
std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string ta_dot(const TimedAutomaton& a) {
  std::ostringstream o;
  o << "digraph \"" << dot_escape(a.name) << "\" {\n  rankdir=LR;\n";
  for (size_t i = 0; i < a.locations.size(); ++i) {
    const Location& l = a.locations[i];
    std::string lbl = l.name;
    if (!l.invariant.is_true()) lbl += "\\n" + l.invariant.str();
    if (l.cost) lbl += "\\ncost " + std::to_string(l.cost);
    o << "  n" << i << " [label=\"" << dot_escape(lbl) << "\""
      << (static_cast<int>(i) == a.initial ? ", shape=doublecircle" : "")
      << "];\n";
  }
  for (const auto& e : a.edges) {
    std::string lbl = e.label.str();
    if (!e.guard.is_true()) lbl += "\\n" + e.guard.str();
    if (!e.resets.empty()) {
      lbl += "\\nreset ";
      for (size_t i = 0; i < e.resets.size(); ++i)
        lbl += (i ? "," : "") + e.resets[i];
    }
    if (e.cost) lbl += "\\ncost " + std::to_string(e.cost);
    o << "  n" << e.src << " -> n" << e.dst << " [label=\"" << dot_escape(lbl)
      << "\"];\n";
  }
  o << "}\n";
  return o.str();
}

std::string region_graph_dot(const RegionGraph& rg) {
  std::ostringstream o;
  o << "digraph \"" << dot_escape(rg.ta.name) << "_regions\" {\n"
    << "  rankdir=LR;\n";
  for (size_t i = 0; i < rg.states.size(); ++i)
    o << "  s" << i << " [label=\"" << dot_escape(rg.state_str(i))
      << "\"];\n";
  for (size_t i = 0; i < rg.states.size(); ++i)
    for (const auto& a : rg.out[i]) {
      if (a.edge < 0)
        o << "  s" << i << " -> s" << a.dst
          << " [label=\"tau\", style=dashed];\n";
      else
        o << "  s" << i << " -> s" << a.dst << " [label=\""
          << dot_escape(rg.ta.edges[a.edge].label.str()) << "\"];\n";
    }
  o << "}\n";
  return o.str();
}

}  // namespace tadiag
