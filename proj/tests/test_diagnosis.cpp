#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tadiag/diagnosis.hpp"
#include "tadiag/parser.hpp"

#include "oracles.hpp"

#include <set>
#include <sstream>

using namespace tadiag;

namespace {

std::string models_dir() { return TADIAG_MODELS_DIR; }

TimedAutomaton load(const std::string& name) {
  return parse_ta_file(models_dir() + "/" + name);
}

// Time elapsed after the first fault edge of the run; nullopt if fault-free.
std::optional<Rat> fault_age(const TimedAutomaton& a, const Run& run) {
  std::optional<Rat> age;
  for (const auto& st : run.steps) {
    if (st.is_delay) {
      if (age) *age += st.delta;
    } else if (a.edges[st.edge].label.is_fault() && !age) {
      age = Rat(0);
    }
  }
  return age;
}

// A negative verdict must come with two runs of the plant, one faulty of
// age >= delta and one fault-free, whose observable projections coincide.
void check_witness(const TimedAutomaton& a, const std::set<std::string>& sigma,
                   long long delta, const Verdict& v) {
  REQUIRE(!v.diagnosable);
  REQUIRE(v.faulty);
  REQUIRE(v.nonfaulty);
  CHECK(simulate(a, v.faulty->run).has_value());
  CHECK(simulate(a, v.nonfaulty->run).has_value());
  auto age = fault_age(a, v.faulty->run);
  REQUIRE(age);
  CHECK(*age >= Rat(delta));
  CHECK(!fault_age(a, v.nonfaulty->run));
  CHECK(project(trace_of(a, v.faulty->run), sigma) ==
        project(trace_of(a, v.nonfaulty->run), sigma));
  CHECK(v.faulty->trace == trace_of(a, v.faulty->run));
}

}  // namespace

TEST_CASE("plant is diagnosable with all sensors at delta 3") {
  TimedAutomaton a = load("fig1.ta");
  std::set<std::string> sigma{"a", "b", "c"};
  CHECK(check_delta_diag(a, sigma, 3).diagnosable);
  Verdict v2 = check_delta_diag(a, sigma, 2);
  CHECK(!v2.diagnosable);
  check_witness(a, sigma, 2, v2);
}

TEST_CASE("plant is not diagnosable watching only b") {
  TimedAutomaton a = load("fig1.ta");
  std::set<std::string> sigma{"b"};
  Verdict v = check_delta_diag(a, sigma, 3);
  check_witness(a, sigma, 3, v);
  CHECK(!min_delta(a, sigma));
}

TEST_CASE("verdicts agree with the discretized search") {
  TimedAutomaton fig1 = load("fig1.ta");
  TimedAutomaton abmerge = load("abmerge.ta");
  TimedAutomaton undiag = load("undiag.ta");
  struct Case {
    const TimedAutomaton* a;
    std::set<std::string> sigma;
  };
  std::vector<Case> cases{
      {&fig1, {"a", "b", "c"}}, {&fig1, {"a", "b"}}, {&fig1, {"a", "c"}},
      {&fig1, {"b", "c"}},      {&fig1, {"b"}},      {&fig1, {"a"}},
      {&abmerge, {"a", "b"}},   {&abmerge, {"a"}},   {&undiag, {"a"}},
  };
  for (const auto& c : cases)
    for (long long delta = 0; delta <= 4; ++delta) {
      bool got = check_delta_diag(*c.a, c.sigma, delta).diagnosable;
      bool want = oracle::oracle_diag(*c.a, oracle::identity_obs(c.sigma),
                                      delta);
      CAPTURE(c.a->name);
      CAPTURE(delta);
      CHECK(got == want);
    }
}

TEST_CASE("smallest workable delta") {
  TimedAutomaton a = load("fig1.ta");
  auto d = min_delta(a, {"a", "b", "c"});
  REQUIRE(d);
  CHECK(*d == 3);
  CHECK(*d <= delta_bound(a, {"a", "b", "c"}));

  TimedAutomaton faultfree = load("alternate.ta");
  auto d0 = min_delta(faultfree, {"a", "b"});
  REQUIRE(d0);
  CHECK(*d0 == 0);
}

TEST_CASE("sensor minimization") {
  TimedAutomaton a = load("fig1.ta");
  auto s3 = min_sensor_set(a, 3);
  REQUIRE(s3);
  CHECK(*s3 == std::set<std::string>{"a", "b", "c"});
  CHECK(!min_sensor_set(a, 2));
  auto best = min_cardinality(a);
  REQUIRE(best);
  CHECK(best->first == 3);
  CHECK(best->second == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("mask verdicts") {
  TimedAutomaton a = load("fig1.ta");
  Mask identity{3, {{"a", 1}, {"b", 2}, {"c", 3}}};
  CHECK(check_mask_diag(a, identity, 3).diagnosable);
  Mask all1{1, {{"a", 1}, {"b", 1}, {"c", 1}}};
  CHECK(check_mask_diag(a, all1, 3).diagnosable);
  Mask drop_a{2, {{"a", 0}, {"b", 1}, {"c", 2}}};
  CHECK(!check_mask_diag(a, drop_a).diagnosable);

  // Cross-check against the discretized search on the masked plant.
  for (const Mask& m : {identity, all1, drop_a}) {
    bool got = check_mask_diag(a, m, 3).diagnosable;
    bool want = oracle::oracle_diag(a, oracle::mask_obs(m), 3);
    CHECK(got == want);
  }
}

TEST_CASE("mask minimization") {
  TimedAutomaton a = load("fig1.ta");
  auto m1 = min_mask(a, 1);
  REQUIRE(m1);
  CHECK(m1->map == std::map<std::string, int>{{"a", 1}, {"b", 1}, {"c", 1}});
  auto best = min_mask_size(a);
  REQUIRE(best);
  CHECK(best->first == 1);

  // Merging or hiding either letter of the order-sensitive plant kills
  // diagnosability, so no one-class mask works.
  TimedAutomaton ab = load("abmerge.ta");
  CHECK(!min_mask(ab, 1));
  auto ab_best = min_mask_size(ab);
  REQUIRE(ab_best);
  CHECK(ab_best->first == 2);
}

TEST_CASE("silent plant is never diagnosable") {
  TimedAutomaton a = load("undiag.ta");
  Verdict v = check_diag(a, {"a"});
  CHECK(!v.diagnosable);
  CHECK(!min_delta(a, {"a"}));
}

TEST_CASE("twin plant marks sides") {
  TimedAutomaton a = load("fig1.ta");
  TwinPlant tp = build_twin_plant(a, {"a", "b", "c"}, 3);
  bool some_delta_faulty = false, some_nonfaulty = false;
  for (size_t l = 0; l < tp.ta.locations.size(); ++l) {
    if (tp.left_delta_faulty(static_cast<int>(l))) some_delta_faulty = true;
    if (tp.left_non_faulty(static_cast<int>(l))) some_nonfaulty = true;
  }
  CHECK(some_nonfaulty);
  // At delta 3 no delta-faulty twin state is reachable with equal traces.
  CHECK(check_delta_diag(a, {"a", "b", "c"}, 3).diagnosable);
  TwinPlant tp2 = build_twin_plant(a, {"b"}, 3);
  some_delta_faulty = false;
  for (size_t l = 0; l < tp2.ta.locations.size(); ++l)
    if (tp2.left_delta_faulty(static_cast<int>(l))) some_delta_faulty = true;
  CHECK(some_delta_faulty);
  CHECK(twin_plant_dot(tp).find("digraph") != std::string::npos);
}

TEST_CASE("verdict json") {
  TimedAutomaton a = load("fig1.ta");
  Verdict v = check_delta_diag(a, {"b"}, 3);
  std::string j = verdict_to_json(a, v);
  CHECK(j.find("\"diagnosable\": false") != std::string::npos);
  CHECK(j.find("\"delta\": 3") != std::string::npos);
  CHECK(j.find("\"witness\"") != std::string::npos);
  CHECK(j.find("\"faulty\"") != std::string::npos);
  CHECK(j.find("\"run\"") != std::string::npos);

  Verdict ok = check_delta_diag(a, {"a", "b", "c"}, 3);
  std::string jok = verdict_to_json(a, ok);
  CHECK(jok.find("\"diagnosable\": true") != std::string::npos);
  CHECK(jok.find("witness") == std::string::npos);
}
