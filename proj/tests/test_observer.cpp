#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tadiag/observer.hpp"
#include "tadiag/parser.hpp"

#include "oracles.hpp"

#include <sstream>

using namespace tadiag;

namespace {

std::string models_dir() { return TADIAG_MODELS_DIR; }

TimedAutomaton load(const std::string& name) {
  return parse_ta_file(models_dir() + "/" + name);
}

ObserverSpec load_obs(const std::string& name) {
  return parse_observer_file(models_dir() + "/" + name);
}

TimedWord word(std::vector<Rat> delays, std::vector<std::string> events) {
  TimedWord w;
  w.delays = std::move(delays);
  w.events = std::move(events);
  return w;
}

}  // namespace

TEST_CASE("observer validation accepts the fixtures") {
  CHECK(validate_observer(load_obs("obs2.obs")).empty());
  CHECK(validate_observer(load_obs("obs_all.obs")).empty());
  CHECK(validate_observer(load_obs("obs_b.obs")).empty());
  CHECK(validate_observer(load_obs("obs2_rate.obs")).empty());
}

TEST_CASE("observer validation rejects overlap and gaps") {
  std::istringstream overlap(
      "automaton o\nclocks y\nevents a\nlocation n0 initial observe a\n"
      "location n1\nedge n0 -> n1 on a when y<=2\n"
      "edge n0 -> n0 on a when y<=3\n");
  auto errs = validate_observer(parse_observer(overlap));
  REQUIRE(!errs.empty());
  CHECK(errs[0].find("n0") != std::string::npos);

  std::istringstream gap(
      "automaton o\nclocks y\nevents a\nlocation n0 initial observe a\n"
      "location n1\nedge n0 -> n1 on a when y<=2\n");
  CHECK(!validate_observer(parse_observer(gap)).empty());

  // An edge on an event the location does not observe must stay put.
  std::istringstream moves(
      "automaton o\nevents a b\nlocation n0 initial observe b\n"
      "location n1\nedge n0 -> n1 on a\nedge n0 -> n0 on b\n");
  CHECK(!validate_observer(parse_observer(moves)).empty());
}

TEST_CASE("transducer semantics on fixed words") {
  ObserverSpec o = load_obs("obs2.obs");
  // a arrives early: switch to the b-sensor, both letters come through.
  CHECK(observe(o, word({Rat(1), Rat(1, 2), Rat(0)}, {"a", "b"})) ==
        word({Rat(1), Rat(1, 2), Rat(0)}, {"a", "b"}));
  // the leading b is invisible while only a is watched.
  CHECK(observe(o, word({Rat(1), Rat(1, 2), Rat(0)}, {"b", "a"})) ==
        word({Rat(3, 2), Rat(0)}, {"a"}));
  // a arrives late: the c-sensor is switched on instead of b.
  CHECK(observe(o, word({Rat(3), Rat(1, 2), Rat(0)}, {"a", "c"})) ==
        word({Rat(3), Rat(1, 2), Rat(0)}, {"a", "c"}));
  // ... and b after a late a is dropped.
  CHECK(observe(o, word({Rat(3), Rat(1, 2), Rat(1)}, {"a", "b"})) ==
        word({Rat(3), Rat(3, 2)}, {"a"}));
}

TEST_CASE("always-on observer is the identity transducer") {
  ObserverSpec o = load_obs("obs_all.obs");
  std::mt19937 rng(5);
  TimedAutomaton a = load("fig1.ta");
  for (int i = 0; i < 50; ++i) {
    Run r = oracle::sample_run(a, rng, 10);
    TimedWord w = trace_of(a, r);
    CHECK(observe(o, w) == w);
  }
}

TEST_CASE("transducer preserves duration and prefixes") {
  ObserverSpec o = load_obs("obs2.obs");
  std::mt19937 rng(9);
  TimedAutomaton a = load("fig1.ta");
  for (int i = 0; i < 100; ++i) {
    Run r = oracle::sample_run(a, rng, 10);
    TimedWord w = trace_of(a, r);
    TimedWord out = observe(o, w);
    CHECK(out.duration() == w.duration());
    if (!w.events.empty()) {
      TimedWord prefix = w;
      prefix.events.pop_back();
      prefix.delays.pop_back();
      TimedWord outp = observe(o, prefix);
      // outp must be a timed prefix of out.
      REQUIRE(outp.events.size() <= out.events.size());
      for (size_t k = 0; k < outp.events.size(); ++k) {
        CHECK(outp.events[k] == out.events[k]);
        CHECK(outp.delays[k] == out.delays[k]);
      }
    }
  }
}

TEST_CASE("product with a clockless always-on observer is the plant") {
  TimedAutomaton a = load("fig1.ta");
  ObserverSpec o = always_observer(a, {"a", "b", "c"});
  ObsProduct p = product_obs(a, o);
  CHECK(p.ta.locations.size() == a.locations.size());
  CHECK(p.ta.edges.size() == a.edges.size());
  int events = 0;
  for (const auto& e : p.ta.edges)
    if (e.label.is_event()) ++events;
  CHECK(events == 7);
}

TEST_CASE("product with the b-only observer silences a and c") {
  TimedAutomaton a = load("fig1.ta");
  ObsProduct p = product_obs(a, load_obs("obs_b.obs"));
  for (size_t e = 0; e < p.ta.edges.size(); ++e) {
    int pe = p.edge_pair[e].first;
    if (pe < 0) continue;
    const Label& orig = a.edges[pe].label;
    const Label& got = p.ta.edges[e].label;
    if (orig.is_event() && orig.event != "b")
      CHECK(got.is_tau());
    else
      CHECK(got == orig);
  }
}

TEST_CASE("product with the switching observer keeps one confirm letter") {
  TimedAutomaton a = load("fig1.ta");
  ObsProduct p = product_obs(a, load_obs("obs2.obs"));
  // In the initial observer location only a survives as an event.
  std::set<std::string> initial_events;
  for (size_t e = 0; e < p.ta.edges.size(); ++e)
    if (p.ta.edges[e].src == 0 && p.ta.edges[e].label.is_event())
      initial_events.insert(p.ta.edges[e].label.event);
  CHECK(initial_events == std::set<std::string>{"a"});
}

TEST_CASE("product trace equals the observed plant trace") {
  TimedAutomaton a = load("fig1.ta");
  for (const char* obsname : {"obs2.obs", "obs_b.obs", "obs_all.obs"}) {
    ObserverSpec o = load_obs(obsname);
    ObsProduct p = product_obs(a, o);
    std::mt19937 rng(13);
    for (int i = 0; i < 100; ++i) {
      Run pr = oracle::sample_run(p.ta, rng, 10);
      // Map the product run back onto the plant.
      Run plant;
      for (const auto& st : pr.steps)
        if (st.is_delay)
          plant.steps.push_back(st);
        else if (p.edge_pair[st.edge].first >= 0)
          plant.steps.push_back(
              RunStep::edge_step(p.edge_pair[st.edge].first));
      REQUIRE(simulate(a, plant).has_value());
      CHECK(trace_of(p.ta, pr) == observe(o, trace_of(a, plant)));
    }
  }
}

TEST_CASE("diagnosability under dynamic observation") {
  TimedAutomaton a = load("fig1.ta");
  CHECK(check_obs_diag(a, load_obs("obs2.obs"), 3).diagnosable);
  CHECK(check_obs_diag(a, always_observer(a, {"a", "b", "c"}), 3).diagnosable);
  Verdict v = check_obs_diag(a, load_obs("obs_b.obs"), 3);
  CHECK(!v.diagnosable);
  REQUIRE(v.faulty);
  REQUIRE(v.nonfaulty);
  // Witness runs replay on the product and the observed traces coincide.
  ObsProduct p = product_obs(a, load_obs("obs_b.obs"));
  CHECK(simulate(p.ta, v.faulty->run).has_value());
  CHECK(simulate(p.ta, v.nonfaulty->run).has_value());
  CHECK(project(v.faulty->trace, {"b"}) == project(v.nonfaulty->trace, {"b"}));

  auto d = min_delta_obs(a, load_obs("obs2.obs"));
  REQUIRE(d);
  CHECK(*d == 3);
  CHECK(!min_delta_obs(a, load_obs("obs_b.obs")));
}

TEST_CASE("observer serialization round trip") {
  ObserverSpec o = load_obs("obs2.obs");
  std::istringstream in(serialize_observer(o));
  ObserverSpec o2 = parse_observer(in);
  CHECK(serialize_observer(o2) == serialize_observer(o));
  CHECK(o2.gran_den == o.gran_den);
  CHECK(o2.observe == o.observe);
}
