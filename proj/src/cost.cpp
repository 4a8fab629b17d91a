#include "tadiag/cost.hpp"

#include "tadiag/observer.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace tadiag {

std::pair<Rat, Rat> run_cost(const TimedAutomaton& a, const Run& run) {
  std::string err;
  if (!simulate(a, run, &err)) throw Error("invalid run: " + err);
  Rat cost(0), dur(0);
  int loc = a.initial;
  for (const auto& s : run.steps) {
    if (s.is_delay) {
      cost += Rat(a.locations[loc].cost) * s.delta;
      dur += s.delta;
    } else {
      cost += Rat(a.edges[s.edge].cost);
      loc = a.edges[s.edge].dst;
    }
  }
  return {cost, dur};
}

namespace {

// The integer corners of a region's closure: round up the j largest
// fraction groups, j = 0..g. A clock above K ranges over (K, infinity),
// whose capped closure contributes both K and K+1, independently of the
// fraction ordering of the bounded clocks.
std::vector<std::vector<long long>> corners_of(const Region& r, long long K) {
  std::vector<int> above;
  for (size_t i = 0; i < r.parts.size(); ++i)
    if (r.parts[i].above) above.push_back(static_cast<int>(i));
  std::vector<std::vector<long long>> out;
  for (int j = 0; j <= r.groups; ++j) {
    std::vector<long long> c;
    for (const auto& p : r.parts)
      c.push_back(p.above ? K : p.ip + (p.ord >= r.groups - j ? 1 : 0));
    for (int mask = 0; mask < (1 << above.size()); ++mask) {
      std::vector<long long> cc = c;
      for (size_t b = 0; b < above.size(); ++b)
        if (mask & (1 << b)) cc[above[b]] = K + 1;
      out.push_back(std::move(cc));
    }
  }
  // dedupe (regions with no fraction groups yield one corner)
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::string CornerGraph::node_str(int n) const {
  std::ostringstream o;
  o << rg.state_str(nodes[n].rg_state) << " @ (";
  for (size_t i = 0; i < nodes[n].corner.size(); ++i) {
    if (i) o << ",";
    o << rg.ta.clocks[i] << "=" << nodes[n].corner[i];
  }
  o << ")";
  return o.str();
}

CornerGraph build_corner_graph(const TimedAutomaton& a, long long m) {
  CornerGraph g;
  g.rg = build_region_graph(a, m);
  const RegionGraph& rg = g.rg;
  long long K = rg.K;

  std::map<std::pair<int, std::vector<long long>>, int> index;
  std::vector<std::vector<std::vector<long long>>> state_corners;
  for (size_t s = 0; s < rg.states.size(); ++s) {
    state_corners.push_back(corners_of(rg.states[s].region, K));
    for (const auto& c : state_corners.back()) {
      index[{static_cast<int>(s), c}] = static_cast<int>(g.nodes.size());
      g.nodes.push_back({static_cast<int>(s), c});
      g.arcs.emplace_back();
    }
  }
  for (int s0 : rg.initials) {
    std::vector<long long> zero(rg.ta.clocks.size(), 0);
    auto it = index.find({s0, zero});
    if (it != index.end()) g.initials.push_back(it->second);
  }
  auto is_corner = [&](int s, const std::vector<long long>& c) {
    const auto& cs = state_corners[s];
    return std::find(cs.begin(), cs.end(), c) != cs.end();
  };
  for (size_t n = 0; n < g.nodes.size(); ++n) {
    int s = g.nodes[n].rg_state;
    const auto& c = g.nodes[n].corner;
    long long rate = rg.ta.locations[rg.states[s].loc].cost;
    // unit delay to the next corner of the same region (saturating at K+1)
    std::vector<long long> c1 = c;
    for (auto& x : c1) x = std::min(x + 1, K + 1);
    if (is_corner(static_cast<int>(s), c1) && !rg.ta.clocks.empty()) {
      if (c1 != c || region_time_open(rg.states[s].region))
        g.arcs[n].push_back(
            {index.at({s, c1}), rate, 1, -1});
    }
    if (rg.ta.clocks.empty())  // no clocks: time elapses freely
      g.arcs[n].push_back({static_cast<int>(n), rate, 1, -1});
    for (const auto& arc : rg.out[s]) {
      if (arc.edge < 0) {
        // region advance: the corner survives into the successor's closure
        if (is_corner(arc.dst, c))
          g.arcs[n].push_back({index.at({arc.dst, c}), 0, 0, -2});
      } else {
        const Edge& e = rg.ta.edges[arc.edge];
        std::vector<long long> rc = c;
        for (const auto& rcl : e.resets) {
          int ci = rg.ta.clock_index(rcl);
          rc[ci] = 0;
        }
        if (is_corner(arc.dst, rc))
          g.arcs[n].push_back(
              {index.at({arc.dst, rc}), e.cost, 0, arc.edge});
      }
    }
  }
  return g;
}

namespace {

using i128 = __int128;

struct CycleSearch {
  int n;
  const std::vector<std::vector<CornerGraph::Arc>>* arcs;
  std::vector<bool> reachable;

  // longest-path Bellman-Ford; returns a node on a positive cycle under
  // the supplied arc weighting, or -1
  std::optional<std::vector<int>> positive_cycle(
      const std::function<i128(const CornerGraph::Arc&)>& w) const {
    std::vector<i128> dist(n, 0);
    std::vector<int> pred(n, -1);
    int touched = -1;
    for (int it = 0; it <= n; ++it) {
      touched = -1;
      for (int u = 0; u < n; ++u) {
        if (!reachable[u]) continue;
        for (const auto& a : (*arcs)[u]) {
          if (!reachable[a.dst]) continue;
          i128 nd = dist[u] + w(a);
          if (nd > dist[a.dst]) {
            dist[a.dst] = nd;
            pred[a.dst] = u;
            touched = a.dst;
          }
        }
      }
      if (touched < 0) return std::nullopt;
    }
    // walk back to land inside the cycle, then collect it
    int v = touched;
    for (int i = 0; i < n && pred[v] >= 0; ++i) v = pred[v];
    if (pred[v] < 0) return std::nullopt;
    std::vector<int> cyc{v};
    for (int u = pred[v]; u != v; u = pred[u]) cyc.push_back(u);
    std::reverse(cyc.begin(), cyc.end());
    return cyc;
  }
};

}  // namespace

MeanCostResult max_ratio_cycle(const CornerGraph& g) {
  MeanCostResult res;
  int n = static_cast<int>(g.nodes.size());
  CycleSearch cs{n, &g.arcs, std::vector<bool>(n, false)};
  std::deque<int> q(g.initials.begin(), g.initials.end());
  for (int s : g.initials) cs.reachable[s] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (const auto& a : g.arcs[u])
      if (!cs.reachable[a.dst]) {
        cs.reachable[a.dst] = true;
        q.push_back(a.dst);
      }
  }
  // zero-time cycles with positive cost have no mean; flag and bail out
  if (cs.positive_cycle([](const CornerGraph::Arc& a) -> i128 {
        return a.time == 0 ? i128(a.weight) : -(i128(1) << 100);
      })) {
    res.zeno = true;
    res.error = "a zero-time cycle with positive cost is reachable";
    return res;
  }
  // some cycle must let time diverge
  if (!cs.positive_cycle(
          [](const CornerGraph::Arc& a) -> i128 { return a.time; })) {
    res.error = "no time-diverging cycle is reachable";
    return res;
  }
  long long wmax = 1;
  for (int u = 0; u < n; ++u)
    for (const auto& a : g.arcs[u])
      wmax = std::max(wmax, std::llabs(a.weight));
  // the optimum is W/T for a simple cycle: |W| <= n*wmax, 1 <= T <= n
  Rat lo = Rat(-(static_cast<long long>(n) * wmax) - 1);
  Rat hi = Rat(static_cast<long long>(n) * wmax + 1);
  auto pos_at = [&](const Rat& lambda) {
    long long p = lambda.numerator(), qd = lambda.denominator();
    return cs.positive_cycle([&](const CornerGraph::Arc& a) -> i128 {
      return i128(qd) * a.weight - i128(p) * a.time;
    });
  };
  Rat width_limit(1, static_cast<long long>(n) * n);
  while (hi - lo >= width_limit) {
    Rat mid = (lo + hi) / Rat(2);
    if (pos_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  // the answer is the unique rational with denominator <= n in (lo, hi]
  std::optional<Rat> best;
  for (long long qd = 1; qd <= n; ++qd) {
    Rat cand(rat_floor(hi * Rat(qd)), qd);
    if (cand > lo && cand <= hi && (!best || cand > *best)) best = cand;
  }
  if (!best) {
    res.error = "ratio search failed to isolate a candidate";
    return res;
  }
  res.value = *best;
  // witness: a cycle whose adjusted weight sum is exactly zero; shifting
  // every arc by +1 after magnifying makes >=0 cycles strictly positive
  long long p = best->numerator(), qd = best->denominator();
  auto cyc = cs.positive_cycle([&](const CornerGraph::Arc& a) -> i128 {
    return (i128(qd) * a.weight - i128(p) * a.time) * (n + 1) + 1;
  });
  if (cyc) res.cycle = *cyc;
  return res;
}

MeanCostResult max_mean_cost(const TimedAutomaton& a, long long m) {
  return max_ratio_cycle(build_corner_graph(a, m));
}

MeanCostResult min_mean_cost(const TimedAutomaton& a, long long m) {
  CornerGraph g = build_corner_graph(a, m);
  for (auto& node_arcs : g.arcs)
    for (auto& arc : node_arcs) arc.weight = -arc.weight;
  MeanCostResult res = max_ratio_cycle(g);
  if (res.value) res.value = -*res.value;
  return res;
}

MeanCostResult observer_cost(const TimedAutomaton& a, const ObserverSpec& o) {
  auto errs = validate_observer(o);
  if (!errs.empty()) throw Error("invalid observer: " + errs.front());
  ObsProduct prod = product_obs(a, o);
  return max_mean_cost(prod.ta, o.gran_den);
}

}  // namespace tadiag
