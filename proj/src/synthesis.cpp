#include "tadiag/synthesis.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace tadiag {

namespace {

int popcount(int x) {
  int c = 0;
  while (x) {
    c += x & 1;
    x >>= 1;
  }
  return c;
}

std::string set_name(const std::vector<std::string>& names, int mask) {
  std::string s = "{";
  bool first = true;
  for (size_t i = 0; i < names.size(); ++i)
    if (mask & (1 << i)) {
      if (!first) s += ",";
      s += names[i];
      first = false;
    }
  return s + "}";
}

}  // namespace

std::vector<Guard> minimal_guards(const Resource& mu) {
  // per-clock cells encoded 0..2K'+1: even e -> y = e/2, odd -> the open
  // interval around e/2, last -> y above the max constant
  long long kp = mu.max * mu.gran_den;
  long long cells = 2 * kp + 2;
  std::vector<Guard> out;
  if (mu.clocks.empty()) {
    out.emplace_back();
    return out;
  }
  std::vector<long long> idx(mu.clocks.size(), 0);
  while (true) {
    Guard g;
    for (size_t i = 0; i < mu.clocks.size(); ++i) {
      long long e = idx[i];
      const std::string& y = mu.clocks[i];
      if (e == cells - 1) {
        g.atoms.push_back({y, Rel::Gt, Rat(mu.max)});
      } else if (e % 2 == 0) {
        g.atoms.push_back({y, Rel::Eq, Rat(e / 2, mu.gran_den)});
      } else {
        g.atoms.push_back({y, Rel::Gt, Rat(e / 2, mu.gran_den)});
        g.atoms.push_back({y, Rel::Lt, Rat(e / 2 + 1, mu.gran_den)});
      }
    }
    out.push_back(g);
    size_t i = mu.clocks.size();
    while (i > 0 && idx[i - 1] == cells - 1) idx[--i] = 0;
    if (i == 0) break;
    ++idx[i - 1];
  }
  return out;
}

Universal build_universal(const std::vector<std::string>& sigma,
                          const Resource& mu) {
  Universal u;
  u.sigma = sigma;
  std::sort(u.sigma.begin(), u.sigma.end());
  u.mu = mu;
  u.guards = minimal_guards(mu);
  int nsets = 1 << u.sigma.size();
  int nresets = 1 << mu.clocks.size();
  u.ta.name = "universal";
  u.ta.clocks = mu.clocks;
  u.ta.alphabet = u.sigma;
  u.ta.initial = 0;
  for (int s = 0; s < nsets; ++s) {
    Location loc;
    loc.name = set_name(u.sigma, s);
    u.ta.locations.push_back(loc);
  }
  for (int s = 0; s < nsets; ++s)
    for (int gi = 0; gi < static_cast<int>(u.guards.size()); ++gi)
      for (int a = 0; a < static_cast<int>(u.sigma.size()); ++a)
        for (int r = 0; r < nresets; ++r)
          for (int s2 = 0; s2 < nsets; ++s2) {
            Edge e;
            e.src = s;
            e.dst = s2;
            e.guard = u.guards[gi];
            e.label = Label::ev(u.sigma[a]);
            for (size_t i = 0; i < mu.clocks.size(); ++i)
              if (r & (1 << i)) e.resets.push_back(mu.clocks[i]);
            u.ta.edges.push_back(e);
            u.info.push_back({gi, a, r, s, s2});
          }
  return u;
}

std::set<std::string> GameGraph::event_set(int mask) const {
  std::set<std::string> s;
  for (size_t i = 0; i < sigma.size(); ++i)
    if (mask & (1 << i)) s.insert(sigma[i]);
  return s;
}

std::vector<std::string> GameGraph::reset_list(int mask) const {
  std::vector<std::string> s;
  for (size_t i = 0; i < mu.clocks.size(); ++i)
    if (mask & (1 << i)) s.push_back(mu.clocks[i]);
  return s;
}

GameGraph build_game(const TimedAutomaton& a, long long delta,
                     const Resource& mu) {
  for (const auto& c : mu.clocks)
    if (a.clock_index(c) >= 0)
      throw Error("resource clock " + c + " clashes with the plant");
  GameGraph g;
  g.sigma = a.alphabet;
  std::sort(g.sigma.begin(), g.sigma.end());
  g.mu = mu;
  g.delta = delta;
  g.monitor = build_fault_monitor(a, delta);
  Universal uni = build_universal(g.sigma, mu);
  g.guards = uni.guards;
  int nsets = 1 << g.sigma.size();

  // --- product of the monitor with the universal automaton; the observer
  // component moves only on events of its current observation set,
  // everything else leaves it in place and is silent
  const TimedAutomaton& mon = g.monitor.ta;
  std::vector<std::vector<std::vector<int>>> uedges(
      nsets, std::vector<std::vector<int>>(g.sigma.size()));
  for (size_t i = 0; i < uni.ta.edges.size(); ++i)
    uedges[uni.info[i].src_set][uni.info[i].event].push_back(
        static_cast<int>(i));
  auto event_idx = [&](const std::string& ev) {
    return static_cast<int>(
        std::lower_bound(g.sigma.begin(), g.sigma.end(), ev) -
        g.sigma.begin());
  };

  TimedAutomaton prod;
  prod.name = a.name + "_game";
  prod.clocks = mon.clocks;
  prod.clocks.insert(prod.clocks.end(), mu.clocks.begin(), mu.clocks.end());
  prod.alphabet = g.sigma;
  std::vector<std::pair<int, int>> prod_edge_prov;  // (mon edge, uni edge)
  std::map<std::pair<int, int>, int> pindex;
  std::deque<int> pq;
  auto pintern = [&](int ml, int us) {
    auto key = std::make_pair(ml, us);
    auto it = pindex.find(key);
    if (it != pindex.end()) return it->second;
    Location loc = mon.locations[ml];
    loc.name += "|" + uni.ta.locations[us].name;
    int id = static_cast<int>(prod.locations.size());
    prod.locations.push_back(loc);
    g.prod_loc.emplace_back(ml, us);
    pindex[key] = id;
    pq.push_back(id);
    return id;
  };
  std::vector<int> initial_plocs;
  for (int s = 0; s < nsets; ++s)
    initial_plocs.push_back(pintern(mon.initial, s));
  prod.initial = initial_plocs[0];
  while (!pq.empty()) {
    int id = pq.front();
    pq.pop_front();
    auto [ml, us] = g.prod_loc[id];
    for (size_t mi = 0; mi < mon.edges.size(); ++mi) {
      const Edge& me = mon.edges[mi];
      if (me.src != ml) continue;
      bool observed = me.label.is_event() &&
                      (us & (1 << event_idx(me.label.event)));
      if (!observed) {
        Edge ne = me;
        ne.src = id;
        ne.dst = pintern(me.dst, us);
        prod.edges.push_back(ne);
        prod_edge_prov.emplace_back(static_cast<int>(mi), -1);
      } else {
        for (int ui : uedges[us][event_idx(me.label.event)]) {
          const Edge& ue = uni.ta.edges[ui];
          Edge ne = me;
          ne.src = id;
          ne.dst = pintern(me.dst, uni.info[ui].dst_set);
          ne.guard.atoms.insert(ne.guard.atoms.end(), ue.guard.atoms.begin(),
                                ue.guard.atoms.end());
          ne.resets.insert(ne.resets.end(), ue.resets.begin(),
                           ue.resets.end());
          prod.edges.push_back(ne);
          prod_edge_prov.emplace_back(static_cast<int>(mi), ui);
        }
      }
    }
  }

  // --- region graph at the resource granularity
  g.rg = build_region_graph_multi(prod, initial_plocs, mu.gran_den);
  g.rg_initial_per_set.assign(nsets, -1);
  for (size_t i = 0; i < g.rg.initials.size(); ++i)
    g.rg_initial_per_set[g.prod_loc[g.rg.states[g.rg.initials[i]].loc]
                             .second] = g.rg.initials[i];

  // --- projection onto observation letters
  std::map<std::tuple<int, int, int, int>, int> letter_idx;
  auto intern_letter = [&](int gi, int ev, int r, int s2) {
    auto key = std::make_tuple(gi, ev, r, s2);
    auto it = letter_idx.find(key);
    if (it != letter_idx.end()) return it->second;
    int id = static_cast<int>(g.letters.size());
    g.letters.push_back({gi, ev, r, s2});
    letter_idx[key] = id;
    return id;
  };
  g.nfa.resize(g.rg.states.size());
  for (size_t s = 0; s < g.rg.states.size(); ++s)
    for (const auto& arc : g.rg.out[s]) {
      int letter = -1;
      if (arc.edge >= 0) {
        auto [mi, ui] = prod_edge_prov[arc.edge];
        if (ui >= 0) {
          const auto& in = uni.info[ui];
          letter = intern_letter(in.guard_id, in.event, in.reset_mask,
                                 in.dst_set);
        }
      }
      g.nfa[s].push_back({letter, arc.dst});
    }

  // --- subset construction with silent closure
  auto closure = [&](std::vector<int> set) {
    std::deque<int> q(set.begin(), set.end());
    std::set<int> in(set.begin(), set.end());
    while (!q.empty()) {
      int s = q.front();
      q.pop_front();
      for (const auto& arc : g.nfa[s])
        if (arc.letter < 0 && !in.count(arc.dst)) {
          in.insert(arc.dst);
          q.push_back(arc.dst);
        }
    }
    return std::vector<int>(in.begin(), in.end());
  };
  std::map<std::vector<int>, int> round_idx;
  std::deque<int> rq;
  auto rintern = [&](const std::vector<int>& members) {
    auto it = round_idx.find(members);
    if (it != round_idx.end()) return it->second;
    GameGraph::Round r;
    r.members = members;
    r.obs_set = g.prod_loc[g.rg.states[members.front()].loc].second;
    bool has3 = false, has1 = false;
    for (int m : members) {
      int pl = g.rg.states[m].loc;
      if (g.prod_loc[pl].second != r.obs_set)
        throw Error("subset construction mixed observation sets");
      int ml = g.prod_loc[pl].first;
      if (g.monitor.ta.locations[ml].has_tag(kTagDeltaFaulty)) has3 = true;
      if (g.monitor.ta.locations[ml].has_tag(kTagNonFaulty)) has1 = true;
    }
    r.bad = has3 && has1;
    int id = static_cast<int>(g.rounds.size());
    g.rounds.push_back(r);
    round_idx[members] = id;
    rq.push_back(id);
    return id;
  };
  for (int s = 0; s < nsets; ++s) {
    if (g.rg_initial_per_set[s] < 0) continue;
    int r = rintern(closure({g.rg_initial_per_set[s]}));
    g.initial.emplace_back(s, r);
  }
  while (!rq.empty()) {
    int rid = rq.front();
    rq.pop_front();
    std::map<int, std::vector<int>> by_letter;
    for (int m : g.rounds[rid].members)
      for (const auto& arc : g.nfa[m])
        if (arc.letter >= 0) by_letter[arc.letter].push_back(arc.dst);
    // group letters into Player-1 moves (guard, event) with Player-0
    // choices (resets, next set)
    std::map<std::pair<int, int>, int> square_of;
    for (auto& [letter, dsts] : by_letter) {
      const auto& L = g.letters[letter];
      auto mv = std::make_pair(L.guard_id, L.event);
      auto it = square_of.find(mv);
      int sq;
      if (it == square_of.end()) {
        sq = static_cast<int>(g.squares.size());
        g.squares.push_back({rid, L.guard_id, L.event, {}});
        g.rounds[rid].squares.push_back(sq);
        square_of[mv] = sq;
      } else {
        sq = it->second;
      }
      std::sort(dsts.begin(), dsts.end());
      dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());
      int to = rintern(closure(dsts));
      g.squares[sq].choices.push_back({L.reset_mask, L.next_obs, to});
    }
  }
  return g;
}

Winning solve_safety(const GameGraph& g) {
  std::vector<char> attr_r(g.rounds.size(), 0), attr_s(g.squares.size(), 0);
  for (size_t i = 0; i < g.rounds.size(); ++i) attr_r[i] = g.rounds[i].bad;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t s = 0; s < g.squares.size(); ++s) {
      if (attr_s[s]) continue;
      bool all = true;
      for (const auto& c : g.squares[s].choices)
        if (!attr_r[c.to]) {
          all = false;
          break;
        }
      if (all) {
        attr_s[s] = 1;
        changed = true;
      }
    }
    for (size_t r = 0; r < g.rounds.size(); ++r) {
      if (attr_r[r]) continue;
      for (int sq : g.rounds[r].squares)
        if (attr_s[sq]) {
          attr_r[r] = 1;
          changed = true;
          break;
        }
    }
  }
  Winning w;
  w.round_win.resize(g.rounds.size());
  w.square_win.resize(g.squares.size());
  w.choice_win.resize(g.squares.size());
  for (size_t r = 0; r < g.rounds.size(); ++r) w.round_win[r] = !attr_r[r];
  for (size_t s = 0; s < g.squares.size(); ++s) {
    w.square_win[s] = !attr_s[s];
    if (!w.square_win[s]) continue;
    for (size_t c = 0; c < g.squares[s].choices.size(); ++c)
      if (!attr_r[g.squares[s].choices[c].to])
        w.choice_win[s].push_back(static_cast<int>(c));
  }
  for (const auto& [s0, r] : g.initial)
    if (w.round_win[r]) w.initial_win.emplace_back(s0, r);
  return w;
}

ObserverTemplate extract_template(const GameGraph& g, const Winning& w) {
  return {g, w};
}

namespace {

int default_policy(const GameGraph& g, int square,
                   const std::vector<int>& win_choices) {
  int best = win_choices.front();
  auto key = [&](int ci) {
    const auto& c = g.squares[square].choices[ci];
    return std::make_tuple(popcount(c.next_obs), c.next_obs,
                           popcount(c.reset_mask), c.reset_mask);
  };
  for (int ci : win_choices)
    if (key(ci) < key(best)) best = ci;
  return best;
}

}  // namespace

ObserverSpec instantiate(const ObserverTemplate& t, const Policy& policy,
                         std::optional<int> s0_mask) {
  if (t.empty()) throw Error("empty template: no winning observer exists");
  const GameGraph& g = t.game;
  // initial observation set: requested, or smallest winning one
  std::pair<int, int> init = t.win.initial_win.front();
  if (s0_mask) {
    bool found = false;
    for (const auto& iw : t.win.initial_win)
      if (iw.first == *s0_mask) {
        init = iw;
        found = true;
      }
    if (!found) throw Error("requested initial observation set is losing");
  } else {
    for (const auto& iw : t.win.initial_win)
      if (std::make_pair(popcount(iw.first), iw.first) <
          std::make_pair(popcount(init.first), init.first))
        init = iw;
  }
  Policy pol = policy ? policy : default_policy;

  // walk the template with the positional policy
  std::map<int, int> loc_of;  // round -> observer location
  ObserverSpec o;
  o.gran_den = g.mu.gran_den;
  o.ta.name = "synth";
  o.ta.clocks = g.mu.clocks;
  o.ta.alphabet = g.sigma;
  std::deque<int> q;
  auto lintern = [&](int round) {
    auto it = loc_of.find(round);
    if (it != loc_of.end()) return it->second;
    Location loc;
    loc.name = "q" + std::to_string(round);
    int id = static_cast<int>(o.ta.locations.size());
    o.ta.locations.push_back(loc);
    auto evs = g.event_set(g.rounds[round].obs_set);
    o.observe.emplace_back(evs.begin(), evs.end());
    loc_of[round] = id;
    q.push_back(round);
    return id;
  };
  o.ta.initial = lintern(init.second);
  while (!q.empty()) {
    int round = q.front();
    q.pop_front();
    int src = loc_of[round];
    std::set<std::pair<int, int>> covered;  // (event, guard) with an edge
    for (int sq : g.rounds[round].squares) {
      if (t.win.choice_win[sq].empty())
        throw Error("winning round has a dead square");
      int ci = pol(g, sq, t.win.choice_win[sq]);
      const auto& c = g.squares[sq].choices[ci];
      Edge e;
      e.src = src;
      e.dst = lintern(c.to);
      e.guard = g.guards[g.squares[sq].guard_id];
      e.label = Label::ev(g.sigma[g.squares[sq].event]);
      e.resets = g.reset_list(c.reset_mask);
      o.ta.edges.push_back(e);
      covered.insert({g.squares[sq].event, g.squares[sq].guard_id});
    }
    // complete observed events with stay-put self-loops on guard cells the
    // plant can never produce; cells are disjoint so determinism holds
    for (size_t a = 0; a < g.sigma.size(); ++a) {
      if (!(g.rounds[round].obs_set & (1 << a))) continue;
      for (size_t gi = 0; gi < g.guards.size(); ++gi) {
        if (covered.count({static_cast<int>(a), static_cast<int>(gi)}))
          continue;
        Edge e;
        e.src = e.dst = src;
        e.guard = g.guards[gi];
        e.label = Label::ev(g.sigma[a]);
        o.ta.edges.push_back(e);
      }
    }
  }
  return o;
}

std::string template_to_json(const ObserverTemplate& t) {
  const GameGraph& g = t.game;
  nlohmann::ordered_json j;
  j["empty"] = t.empty();
  j["delta"] = g.delta;
  j["granularity"] = "1/" + std::to_string(g.mu.gran_den);
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (size_t r = 0; r < g.rounds.size(); ++r) {
    if (!t.win.round_win[r]) continue;
    nlohmann::ordered_json jr;
    jr["id"] = r;
    jr["obs"] = g.event_set(g.rounds[r].obs_set);
    jr["bad"] = g.rounds[r].bad;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;
  nlohmann::ordered_json squares = nlohmann::ordered_json::array();
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (size_t s = 0; s < g.squares.size(); ++s) {
    if (!t.win.square_win[s] || !t.win.round_win[g.squares[s].from]) continue;
    nlohmann::ordered_json js;
    js["id"] = s;
    js["from"] = g.squares[s].from;
    js["guard"] = g.guards[g.squares[s].guard_id].str();
    js["event"] = g.sigma[g.squares[s].event];
    squares.push_back(js);
    for (int ci : t.win.choice_win[s]) {
      const auto& c = g.squares[s].choices[ci];
      nlohmann::ordered_json je;
      je["from"] = g.squares[s].from;
      je["guard"] = g.guards[g.squares[s].guard_id].str();
      je["event"] = g.sigma[g.squares[s].event];
      je["resets"] = g.reset_list(c.reset_mask);
      je["nextObs"] = g.event_set(c.next_obs);
      je["to"] = c.to;
      edges.push_back(je);
    }
  }
  j["squares"] = squares;
  j["edges"] = edges;
  nlohmann::ordered_json init = nlohmann::ordered_json::array();
  for (const auto& [s0, r] : t.win.initial_win) {
    nlohmann::ordered_json ji;
    ji["obs"] = g.event_set(s0);
    ji["to"] = r;
    init.push_back(ji);
  }
  j["initial"] = init;
  return j.dump(2);
}

std::string game_dot(const GameGraph& g, const Winning* w) {
  std::ostringstream o;
  o << "digraph game {\n  rankdir=LR;\n";
  auto keep_r = [&](size_t r) { return !w || w->round_win[r]; };
  for (size_t r = 0; r < g.rounds.size(); ++r) {
    if (!keep_r(r)) continue;
    o << "  r" << r << " [shape=ellipse, label=\"" << set_name(g.sigma,
        g.rounds[r].obs_set)
      << (g.rounds[r].bad ? " BAD" : "") << "\"];\n";
  }
  for (size_t s = 0; s < g.squares.size(); ++s) {
    if (w && (!w->square_win[s] || !w->round_win[g.squares[s].from]))
      continue;
    if (!keep_r(g.squares[s].from)) continue;
    o << "  q" << s << " [shape=box, label=\""
      << g.guards[g.squares[s].guard_id].str() << ", "
      << g.sigma[g.squares[s].event] << "\"];\n";
    o << "  r" << g.squares[s].from << " -> q" << s << ";\n";
    for (size_t ci = 0; ci < g.squares[s].choices.size(); ++ci) {
      if (w) {
        const auto& wc = w->choice_win[s];
        if (std::find(wc.begin(), wc.end(), static_cast<int>(ci)) ==
            wc.end())
          continue;
      }
      const auto& c = g.squares[s].choices[ci];
      std::string lbl = set_name(g.sigma, c.next_obs);
      auto rl = g.reset_list(c.reset_mask);
      if (!rl.empty()) {
        lbl += " reset ";
        for (size_t i = 0; i < rl.size(); ++i) lbl += (i ? "," : "") + rl[i];
      }
      o << "  q" << s << " -> r" << c.to << " [label=\"" << lbl << "\"];\n";
    }
  }
  o << "}\n";
  return o.str();
}

}  // namespace tadiag
