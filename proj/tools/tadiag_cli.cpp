#include "tadiag/cost.hpp"
#include "tadiag/diagnosis.hpp"
#include "tadiag/observer.hpp"
#include "tadiag/parser.hpp"
#include "tadiag/region.hpp"
#include "tadiag/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <string>

namespace {

using namespace tadiag;

constexpr int kExitPositive = 0;
constexpr int kExitNegative = 3;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 1;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::set<std::string> sigma_or_all(const TimedAutomaton& a,
                                   const std::string& sigma_flag) {
  if (sigma_flag.empty())
    return {a.alphabet.begin(), a.alphabet.end()};
  auto v = split_commas(sigma_flag);
  return {v.begin(), v.end()};
}

long long parse_gran(const std::string& s) {
  if (s.empty()) return 1;
  auto r = parse_rational(s);
  if (!r || r->numerator() != 1 || r->denominator() < 1)
    throw Error("granularity must be of the form 1/m");
  return r->denominator();
}

Mask parse_mask_flag(const TimedAutomaton& a, const std::string& s) {
  Mask m;
  for (const auto& item : split_commas(s)) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error("mask entries look like a=1 or a=eps");
    std::string ev = item.substr(0, eq), cls = item.substr(eq + 1);
    if (!a.has_event(ev)) throw Error("mask names unknown event " + ev);
    if (cls == "eps") {
      m.map[ev] = 0;
    } else {
      auto r = parse_rational(cls);
      if (!r || r->denominator() != 1 || r->numerator() < 1)
        throw Error("mask class must be a positive integer or eps");
      m.map[ev] = static_cast<int>(r->numerator());
      m.n = std::max(m.n, static_cast<int>(r->numerator()));
    }
  }
  for (const auto& ev : a.alphabet)
    if (!m.map.count(ev)) throw Error("mask undefined on event " + ev);
  return m;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write " + out_path);
    f << text << "\n";
  }
}

nlohmann::ordered_json mask_json(const Mask& m) {
  nlohmann::ordered_json j;
  for (const auto& [ev, cls] : m.map)
    if (cls == 0)
      j[ev] = "eps";
    else
      j[ev] = cls;
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"diagnosability, observer synthesis and observation cost "
               "for timed automata"};
  app.require_subcommand(1);

  std::string model_path, observer_path, sigma_flag, out_path, gran_flag;
  std::string mask_flag, clocks_flag, dot_target, word_json;
  long long delta = -1, max_const = 0;
  int n_flag = -1;

  auto add_common = [&](CLI::App* c, bool needs_model = true) {
    auto* m = c->add_option("--model", model_path, "model file");
    if (needs_model) m->required();
    c->add_option("--out", out_path, "write the result to a file");
  };

  auto* c_check = app.add_subcommand("check", "decide diagnosability");
  add_common(c_check);
  c_check->add_option("--sigma", sigma_flag, "observable events, comma list");
  c_check->add_option("--delta", delta, "fault-age bound");
  c_check->add_option("--mask", mask_flag, "mask a=1,b=eps,...");

  auto* c_mindelta = app.add_subcommand("min-delta", "least workable delta");
  add_common(c_mindelta);
  c_mindelta->add_option("--sigma", sigma_flag, "observable events");

  auto* c_sensors =
      app.add_subcommand("min-sensors", "smallest observable event set");
  add_common(c_sensors);
  c_sensors->add_option("--n", n_flag, "exact cardinality to try");

  auto* c_mask = app.add_subcommand("min-mask", "smallest workable mask");
  add_common(c_mask);
  c_mask->add_option("--n", n_flag, "exact mask size to try");

  auto* c_obs =
      app.add_subcommand("check-obs", "diagnosability under an observer");
  add_common(c_obs);
  c_obs->add_option("--observer", observer_path, "observer file")->required();
  auto* obs_delta = c_obs->add_option("--delta", delta, "fault-age bound");
  c_obs->add_option("--word", word_json,
                    "instead of checking, run the observer on this timed "
                    "word (JSON)");

  auto* c_synth =
      app.add_subcommand("synth", "most-permissive observer template");
  add_common(c_synth);
  c_synth->add_option("--delta", delta, "fault-age bound")->required();
  c_synth->add_option("--clocks", clocks_flag, "observer clocks, comma list");
  c_synth->add_option("--max", max_const, "largest observer constant");
  c_synth->add_option("--granularity", gran_flag, "observer granularity 1/m");

  auto* c_cost = app.add_subcommand("cost", "maximal mean (observation) cost");
  add_common(c_cost);
  c_cost->add_option("--observer", observer_path, "observer file");
  c_cost->add_option("--granularity", gran_flag, "granularity 1/m");

  auto* c_dot = app.add_subcommand("export-dot", "graph exports");
  add_common(c_dot);
  c_dot->add_option("--target", dot_target,
                    "model | regions | twin | game | template")
      ->required();
  c_dot->add_option("--sigma", sigma_flag, "observable events (twin)");
  c_dot->add_option("--delta", delta, "fault-age bound (twin/game/template)");
  c_dot->add_option("--clocks", clocks_flag, "observer clocks (game)");
  c_dot->add_option("--max", max_const, "largest observer constant (game)");
  c_dot->add_option("--granularity", gran_flag, "granularity 1/m (game)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  TimedAutomaton model;
  try {
    model = parse_ta_file(model_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (c_check->parsed()) {
    Verdict v;
    TimedAutomaton reported = model;
    if (!mask_flag.empty()) {
      Mask m = parse_mask_flag(model, mask_flag);
      v = check_mask_diag(model, m,
                          delta >= 0 ? std::optional<long long>(delta)
                                     : std::nullopt);
      reported = apply_mask(model, m);
    } else {
      auto sigma = sigma_or_all(model, sigma_flag);
      v = delta >= 0 ? check_delta_diag(model, sigma, delta)
                     : check_diag(model, sigma);
    }
    emit(verdict_to_json(reported, v), out_path);
    return v.diagnosable ? kExitPositive : kExitNegative;
  }
  if (c_mindelta->parsed()) {
    auto sigma = sigma_or_all(model, sigma_flag);
    auto d = min_delta(model, sigma);
    nlohmann::ordered_json j;
    j["diagnosable"] = d.has_value();
    if (d) j["minDelta"] = *d;
    j["deltaBound"] = delta_bound(model, sigma);
    emit(j.dump(2), out_path);
    return d ? kExitPositive : kExitNegative;
  }
  if (c_sensors->parsed()) {
    nlohmann::ordered_json j;
    std::optional<std::pair<int, std::set<std::string>>> res;
    if (n_flag >= 0) {
      if (auto s = min_sensor_set(model, n_flag)) res = {n_flag, *s};
    } else {
      res = min_cardinality(model);
    }
    j["exists"] = res.has_value();
    if (res) {
      j["n"] = res->first;
      j["sigma"] = res->second;
    }
    emit(j.dump(2), out_path);
    return res ? kExitPositive : kExitNegative;
  }
  if (c_mask->parsed()) {
    nlohmann::ordered_json j;
    std::optional<std::pair<int, Mask>> res;
    if (n_flag >= 0) {
      if (auto m = min_mask(model, n_flag)) res = {n_flag, *m};
    } else {
      res = min_mask_size(model);
    }
    j["exists"] = res.has_value();
    if (res) {
      j["n"] = res->first;
      j["mask"] = mask_json(res->second);
    }
    emit(j.dump(2), out_path);
    return res ? kExitPositive : kExitNegative;
  }
  if (c_obs->parsed()) {
    ObserverSpec obs = parse_observer_file(observer_path);
    auto errs = validate_observer(obs);
    if (!errs.empty()) {
      for (const auto& e : errs) std::cerr << "invalid observer: " << e
                                           << "\n";
      return kExitUsage;
    }
    if (!word_json.empty()) {
      TimedWord w = parse_timed_word_json(word_json);
      emit(timed_word_to_json(observe(obs, w)), out_path);
      return kExitPositive;
    }
    if (!*obs_delta) {
      std::cerr << "error: check-obs needs --delta (or --word)\n";
      return kExitUsage;
    }
    Verdict v = check_obs_diag(model, obs, delta);
    emit(verdict_to_json(product_obs(model, obs).ta, v), out_path);
    return v.diagnosable ? kExitPositive : kExitNegative;
  }
  if (c_synth->parsed()) {
    Resource mu{split_commas(clocks_flag), max_const,
                parse_gran(gran_flag)};
    GameGraph g = build_game(model, delta, mu);
    ObserverTemplate t = extract_template(g, solve_safety(g));
    emit(template_to_json(t), out_path);
    return t.empty() ? kExitNegative : kExitPositive;
  }
  if (c_cost->parsed()) {
    MeanCostResult r;
    if (!observer_path.empty()) {
      ObserverSpec obs = parse_observer_file(observer_path);
      r = observer_cost(model, obs);
    } else {
      r = max_mean_cost(model, parse_gran(gran_flag));
    }
    nlohmann::ordered_json j;
    if (r.value) j["maxMeanCost"] = rat_str(*r.value);
    j["zeno"] = r.zeno;
    if (!r.error.empty()) j["error"] = r.error;
    if (!r.cycle.empty()) j["witnessCycle"] = r.cycle;
    emit(j.dump(2), out_path);
    return r.value ? kExitPositive : kExitNegative;
  }
  if (c_dot->parsed()) {
    std::string dot;
    if (dot_target == "model") {
      dot = ta_dot(model);
    } else if (dot_target == "regions") {
      dot = region_graph_dot(build_region_graph(model, parse_gran(gran_flag)));
    } else if (dot_target == "twin") {
      if (delta < 0) throw Error("twin export needs --delta");
      dot = twin_plant_dot(
          build_twin_plant(model, sigma_or_all(model, sigma_flag), delta));
    } else if (dot_target == "game" || dot_target == "template") {
      if (delta < 0) throw Error("game export needs --delta");
      Resource mu{split_commas(clocks_flag), max_const,
                  parse_gran(gran_flag)};
      GameGraph g = build_game(model, delta, mu);
      if (dot_target == "game") {
        dot = game_dot(g);
      } else {
        Winning w = solve_safety(g);
        dot = game_dot(g, &w);
      }
    } else {
      std::cerr << "error: unknown export target " << dot_target << "\n";
      return kExitUsage;
    }
    emit(dot, out_path);
    return kExitPositive;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tadiag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
