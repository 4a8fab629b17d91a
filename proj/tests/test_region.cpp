#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tadiag/parser.hpp"
#include "tadiag/region.hpp"

#include "oracles.hpp"

#include <random>
#include <set>

using namespace tadiag;

namespace {

std::string models_dir() { return TADIAG_MODELS_DIR; }

TimedAutomaton load(const std::string& name) {
  return parse_ta_file(models_dir() + "/" + name);
}

Rat random_value(std::mt19937& rng, long long K) {
  long long den = 1 + rng() % 4;
  long long num = rng() % ((K + 2) * den);
  return Rat(num, den);
}

// All location/region paths of bounded length, as explicit arc lists.
void all_paths(const RegionGraph& rg, int state,
               std::vector<RegionGraph::Arc>& prefix, int depth,
               const std::function<void(const std::vector<RegionGraph::Arc>&)>&
                   visit) {
  visit(prefix);
  if (depth == 0) return;
  for (const auto& arc : rg.out[state]) {
    prefix.push_back(arc);
    all_paths(rg, arc.dst, prefix, depth - 1, visit);
    prefix.pop_back();
  }
}

}  // namespace

TEST_CASE("regions partition valuations consistently with guards") {
  const long long K = 3;
  std::vector<std::string> clocks{"x", "y"};
  std::mt19937 rng(7);
  std::vector<Guard> probes;
  for (const auto& c : clocks)
    for (long long k = 0; k <= K; ++k)
      for (Rel r : {Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt}) {
        Guard g;
        g.atoms.push_back({c, r, Rat(k)});
        probes.push_back(g);
      }
  for (int i = 0; i < 10000; ++i) {
    ClockValuation v{{"x", random_value(rng, K)}, {"y", random_value(rng, K)}};
    Region r = region_of(clocks, v, K);
    for (const Guard& g : probes)
      CHECK(region_satisfies(r, g, clocks) == satisfies(v, g));
    // The representative lands back in the same region.
    CHECK(region_of(clocks, region_sample(r, clocks, K), K) == r);
  }
}

TEST_CASE("same region implies same future under equal extra delays") {
  const long long K = 2;
  std::vector<std::string> clocks{"x", "y"};
  std::mt19937 rng(11);
  int same = 0;
  for (int i = 0; i < 2000; ++i) {
    ClockValuation v{{"x", random_value(rng, K)}, {"y", random_value(rng, K)}};
    ClockValuation w{{"x", random_value(rng, K)}, {"y", random_value(rng, K)}};
    if (!(region_of(clocks, v, K) == region_of(clocks, w, K))) continue;
    ++same;
    // Time successors of the common region agree.
    CHECK(time_successor(region_of(clocks, v, K), K) ==
          time_successor(region_of(clocks, w, K), K));
  }
  CHECK(same > 10);
}

TEST_CASE("time successor chain covers the line and terminates") {
  std::vector<std::string> clocks{"x"};
  const long long K = 2;
  Region r = region_of(clocks, {{"x", Rat(0)}}, K);
  std::vector<std::string> names;
  int steps = 0;
  for (;;) {
    names.push_back(region_str(r, clocks, K));
    auto next = time_successor(r, K);
    if (!next) break;
    r = *next;
    REQUIRE(++steps < 20);
  }
  CHECK(names == std::vector<std::string>{"x=0", "0<x<1", "x=1", "1<x<2",
                                          "x=2", "x>2"});
}

TEST_CASE("one clock region count matches the closed form") {
  // For one clock there are K+1 point regions, K open intervals and the
  // unbounded region: 2K+2 in total.
  std::vector<std::string> clocks{"x"};
  for (long long K : {1, 2, 3, 5}) {
    std::set<Region> all;
    ClockValuation v{{"x", Rat(0)}};
    Region r = region_of(clocks, v, K);
    all.insert(r);
    while (auto next = time_successor(r, K)) {
      r = *next;
      all.insert(r);
    }
    CHECK(static_cast<long long>(all.size()) == 2 * K + 2);
  }
}

TEST_CASE("region resets") {
  std::vector<std::string> clocks{"x", "y"};
  ClockValuation v{{"x", Rat(3, 2)}, {"y", Rat(5, 2)}};
  Region r = region_of(clocks, v, 3);
  Region rr = region_reset(r, clocks, {"x"});
  CHECK(rr == region_of(clocks, ClockValuation{{"x", Rat(0)}, {"y", Rat(5, 2)}},
                        3));
}

TEST_CASE("sampled runs follow the region graph") {
  std::mt19937 rng(23);
  for (const char* model : {"fig1.ta", "alternate.ta", "ratecost.ta",
                            "abmerge.ta"}) {
    TimedAutomaton a = load(model);
    RegionGraph rg = build_region_graph(a);
    for (int i = 0; i < 125; ++i) {
      Run run = oracle::sample_run(a, rng, 12);
      REQUIRE(simulate(a, run).has_value());
      CHECK(oracle::run_follows_region_graph(rg, run));
    }
  }
}

TEST_CASE("all short region-graph paths concretize to valid runs") {
  for (const char* model : {"fig1.ta", "alternate.ta", "undiag.ta"}) {
    TimedAutomaton a = load(model);
    RegionGraph rg = build_region_graph(a);
    REQUIRE(!rg.initials.empty());
    int checked = 0;
    std::vector<RegionGraph::Arc> prefix;
    all_paths(rg, rg.initials[0], prefix, 12,
              [&](const std::vector<RegionGraph::Arc>& arcs) {
                if (checked > 20000) return;
                ++checked;
                Run run = concretize_arcs(rg, rg.initials[0], arcs);
                auto st = simulate(rg.ta, run);
                REQUIRE(st.has_value());
                int end = arcs.empty() ? rg.initials[0] : arcs.back().dst;
                CHECK(st->loc == rg.states[end].loc);
                CHECK(region_of(rg.ta.clocks, st->val, rg.K) ==
                      rg.states[end].region);
              });
    CHECK(checked > 1);
  }
}

TEST_CASE("region graph respects invariants") {
  TimedAutomaton a = load("fig1.ta");
  RegionGraph rg = build_region_graph(a);
  for (size_t s = 0; s < rg.states.size(); ++s) {
    const auto& st = rg.states[s];
    ClockValuation v = region_sample(st.region, rg.ta.clocks, rg.K);
    CHECK(satisfies(v, rg.ta.locations[st.loc].invariant));
    int taus = 0;
    for (const auto& arc : rg.out[s])
      if (arc.edge == -1) ++taus;
    CHECK(taus <= 1);  // deterministic in time
  }
}

TEST_CASE("granularity scaling preserves region evaluation") {
  std::istringstream in(
      "automaton h\nclocks y\nevents a\nlocation n0 initial\nlocation n1\n"
      "edge n0 -> n1 on a when y>1\n");
  TimedAutomaton a = parse_ta(in);
  RegionGraph rg = build_region_graph(a, 2);
  CHECK(rg.scale == 2);
  CHECK(rg.ta.max_constant() == 2);
  // The scaled graph distinguishes y above/below 1/2 of the original scale.
  std::set<std::string> names;
  for (size_t s = 0; s < rg.states.size(); ++s)
    names.insert(region_str(rg.states[s].region, rg.ta.clocks, rg.K));
  CHECK(names.count("y=1"));  // original y = 1/2
}

TEST_CASE("dot exports are well formed") {
  TimedAutomaton a = load("fig1.ta");
  std::string d1 = ta_dot(a);
  CHECK(d1.find("digraph") != std::string::npos);
  CHECK(d1.find("l5") != std::string::npos);
  std::string d2 = region_graph_dot(build_region_graph(a));
  CHECK(d2.find("digraph") != std::string::npos);
}
