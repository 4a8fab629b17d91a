#include "tadiag/parser.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tadiag {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  bool cur_op = false;  // cur holds a (partial) relational operator
  auto flush = [&] {
    if (!cur.empty()) {
      toks.push_back(cur);
      cur.clear();
    }
    cur_op = false;
  };
  for (char c : line) {
    if (c == '#') break;
    if (isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ',') {
      flush();
      toks.push_back(",");
    } else if (c == '<' || c == '>' || c == '=') {
      if (c == '>' && cur == "-") {  // the edge arrow
        cur += c;
        flush();
        continue;
      }
      if (!cur_op) flush();
      cur_op = true;
      cur += c;
    } else {
      if (cur_op) flush();
      cur += c;
    }
  }
  flush();
  return toks;
}

Rel parse_rel(int ln, const std::string& s) {
  if (s == "<") return Rel::Lt;
  if (s == "<=") return Rel::Le;
  if (s == "=") return Rel::Eq;
  if (s == ">=") return Rel::Ge;
  if (s == ">") return Rel::Gt;
  throw ParseError(ln, "bad relation '" + s + "'");
}

// parses "x <= 2 and y > 1" token stream starting at i; stops at end or at
// a keyword token
Guard parse_guard(int ln, const std::vector<std::string>& toks, size_t& i,
                  const std::set<std::string>& stopwords) {
  Guard g;
  while (i < toks.size() && !stopwords.count(toks[i])) {
    if (!g.atoms.empty()) {
      if (toks[i] != "and") throw ParseError(ln, "expected 'and' in guard");
      ++i;
    }
    if (i + 2 >= toks.size()) throw ParseError(ln, "truncated guard atom");
    Atom a;
    a.clock = toks[i];
    if (a.clock == "|" || a.clock == "or")
      throw ParseError(ln, "disjunctive guards are not supported");
    a.rel = parse_rel(ln, toks[i + 1]);
    auto b = parse_rational(toks[i + 2]);
    if (!b) throw ParseError(ln, "bad constant '" + toks[i + 2] + "'");
    a.bound = *b;
    g.atoms.push_back(a);
    i += 3;
  }
  return g;
}

std::vector<std::string> parse_name_list(int ln,
                                         const std::vector<std::string>& toks,
                                         size_t& i,
                                         const std::set<std::string>& stop) {
  // Names may be separated by commas, spaces, or both.
  std::vector<std::string> names;
  bool prev_comma = false;
  while (i < toks.size() && !stop.count(toks[i])) {
    if (toks[i] == ",") {
      if (prev_comma || names.empty()) throw ParseError(ln, "misplaced comma");
      prev_comma = true;
    } else {
      names.push_back(toks[i]);
      prev_comma = false;
    }
    ++i;
  }
  if (prev_comma) throw ParseError(ln, "trailing comma");
  return names;
}

struct PendingEdge {
  int line;
  std::string src, dst;
  Edge edge;
};

struct RawModel {
  TimedAutomaton ta;
  std::vector<std::vector<std::string>> observe;
  std::vector<bool> has_observe;
  long long gran_den = 1;
  bool any_final_flag = false;
};

RawModel parse_raw(std::istream& in, bool observer_mode) {
  RawModel rm;
  TimedAutomaton& ta = rm.ta;
  std::vector<PendingEdge> pending;
  bool saw_initial = false;
  std::string line;
  int ln = 0;
  static const std::set<std::string> kw = {"invariant", "cost", "final",
                                           "repeated", "observe", "when",
                                           "reset", "on"};
  while (std::getline(in, line)) {
    ++ln;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    if (head == "automaton") {
      if (toks.size() != 2) throw ParseError(ln, "expected: automaton <name>");
      ta.name = toks[1];
    } else if (head == "granularity") {
      if (!observer_mode)
        throw ParseError(ln, "granularity is only valid in observer files");
      if (toks.size() != 2 || toks[1].rfind("1/", 0) != 0)
        throw ParseError(ln, "expected: granularity 1/<m>");
      auto m = parse_rational(toks[1].substr(2));
      if (!m || m->denominator() != 1 || m->numerator() < 1)
        throw ParseError(ln, "bad granularity denominator");
      rm.gran_den = m->numerator();
    } else if (head == "clocks") {
      size_t i = 1;
      ta.clocks = parse_name_list(ln, toks, i, {});
      if (i != toks.size()) throw ParseError(ln, "junk after clock list");
    } else if (head == "events") {
      size_t i = 1;
      ta.alphabet = parse_name_list(ln, toks, i, {});
      if (i != toks.size()) throw ParseError(ln, "junk after event list");
      for (const auto& e : ta.alphabet)
        if (e == "tau" || e == "fault")
          throw ParseError(ln, "'" + e + "' cannot be an alphabet event");
    } else if (head == "location") {
      if (toks.size() < 2) throw ParseError(ln, "location needs a name");
      Location loc;
      loc.name = toks[1];
      loc.is_final = false;
      std::vector<std::string> obs;
      bool has_obs = false;
      size_t i = 2;
      bool initial = false;
      while (i < toks.size()) {
        const std::string& t = toks[i];
        if (t == "initial") {
          initial = true;
          ++i;
        } else if (t == "invariant") {
          ++i;
          loc.invariant = parse_guard(ln, toks, i, kw);
          if (!loc.invariant.upper_bounds_only())
            throw ParseError(ln, "invariants may use only < or <=");
        } else if (t == "cost") {
          if (i + 1 >= toks.size()) throw ParseError(ln, "cost needs a value");
          auto c = parse_rational(toks[i + 1]);
          if (!c || c->denominator() != 1 || c->numerator() < 0)
            throw ParseError(ln, "cost must be a nonnegative integer");
          loc.cost = c->numerator();
          i += 2;
        } else if (t == "final") {
          loc.is_final = true;
          rm.any_final_flag = true;
          ++i;
        } else if (t == "repeated") {
          loc.is_repeated = true;
          ++i;
        } else if (t == "observe") {
          if (!observer_mode)
            throw ParseError(ln, "'observe' is only valid in observer files");
          ++i;
          has_obs = true;
          obs = parse_name_list(ln, toks, i, kw);
        } else {
          throw ParseError(ln, "unexpected token '" + t + "'");
        }
      }
      if (ta.location_index(loc.name) >= 0)
        throw ParseError(ln, "duplicate location " + loc.name);
      if (initial) {
        if (saw_initial) throw ParseError(ln, "two initial locations");
        saw_initial = true;
        ta.initial = static_cast<int>(ta.locations.size());
      }
      ta.locations.push_back(loc);
      rm.observe.push_back(obs);
      rm.has_observe.push_back(has_obs);
    } else if (head == "edge") {
      // edge l0 -> l1 on <label> [when ...] [reset ...] [cost n]
      if (toks.size() < 6 || toks[2] != "->" || toks[4] != "on")
        throw ParseError(ln, "expected: edge <src> -> <dst> on <label> ...");
      PendingEdge pe;
      pe.line = ln;
      pe.src = toks[1];
      pe.dst = toks[3];
      const std::string& lab = toks[5];
      if (lab == "tau")
        pe.edge.label = Label::tau();
      else if (lab == "fault")
        pe.edge.label = Label::fault();
      else
        pe.edge.label = Label::ev(lab);
      size_t i = 6;
      while (i < toks.size()) {
        const std::string& t = toks[i];
        if (t == "when") {
          ++i;
          pe.edge.guard = parse_guard(ln, toks, i, kw);
          if (pe.edge.guard.atoms.empty())
            throw ParseError(ln, "empty guard after 'when'");
        } else if (t == "reset") {
          ++i;
          pe.edge.resets = parse_name_list(ln, toks, i, kw);
          if (pe.edge.resets.empty())
            throw ParseError(ln, "empty reset list");
        } else if (t == "cost") {
          if (i + 1 >= toks.size()) throw ParseError(ln, "cost needs a value");
          auto c = parse_rational(toks[i + 1]);
          if (!c || c->denominator() != 1 || c->numerator() < 0)
            throw ParseError(ln, "cost must be a nonnegative integer");
          pe.edge.cost = c->numerator();
          i += 2;
        } else {
          throw ParseError(ln, "unexpected token '" + t + "'");
        }
      }
      pending.push_back(pe);
    } else {
      throw ParseError(ln, "unknown directive '" + head + "'");
    }
  }
  if (ta.locations.empty()) throw ParseError(ln, "no locations");
  if (!saw_initial) throw ParseError(ln, "no initial location");
  if (!rm.any_final_flag)
    for (auto& l : ta.locations) l.is_final = true;
  std::set<std::string> clockset(ta.clocks.begin(), ta.clocks.end());
  std::set<std::string> evset(ta.alphabet.begin(), ta.alphabet.end());
  for (const auto& pe : pending) {
    Edge e = pe.edge;
    int s = ta.location_index(pe.src), d = ta.location_index(pe.dst);
    if (s < 0) throw ParseError(pe.line, "unknown location " + pe.src);
    if (d < 0) throw ParseError(pe.line, "unknown location " + pe.dst);
    e.src = s;
    e.dst = d;
    if (e.label.is_event() && !evset.count(e.label.event))
      throw ParseError(pe.line, "event '" + e.label.event +
                                    "' not declared in events");
    for (const auto& a : e.guard.atoms)
      if (!clockset.count(a.clock))
        throw ParseError(pe.line, "unknown clock " + a.clock);
    for (const auto& c : e.resets)
      if (!clockset.count(c))
        throw ParseError(pe.line, "unknown clock " + c);
    ta.edges.push_back(e);
  }
  for (size_t i = 0; i < rm.observe.size(); ++i)
    for (const auto& e : rm.observe[i])
      if (!evset.count(e))
        throw ParseError(0, "observed event '" + e + "' not declared");
  ta.validate();
  return rm;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string s;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) s += ",";
    s += names[i];
  }
  return s;
}

void serialize_body(std::ostringstream& out, const TimedAutomaton& a,
                    const std::vector<std::vector<std::string>>* observe) {
  out << "automaton " << a.name << "\n";
  if (!a.clocks.empty()) {
    out << "clocks";
    for (const auto& c : a.clocks) out << " " << c;
    out << "\n";
  }
  if (!a.alphabet.empty()) {
    out << "events";
    for (const auto& e : a.alphabet) out << " " << e;
    out << "\n";
  }
  bool all_final = true;
  for (const auto& l : a.locations) all_final = all_final && l.is_final;
  for (size_t i = 0; i < a.locations.size(); ++i) {
    const Location& l = a.locations[i];
    out << "location " << l.name;
    if (static_cast<int>(i) == a.initial) out << " initial";
    if (!l.invariant.is_true()) out << " invariant " << l.invariant.str();
    if (l.cost) out << " cost " << l.cost;
    if (!all_final && l.is_final) out << " final";
    if (l.is_repeated) out << " repeated";
    if (observe && !(*observe)[i].empty())
      out << " observe " << join_names((*observe)[i]);
    out << "\n";
  }
  for (const auto& e : a.edges) {
    out << "edge " << a.locations[e.src].name << " -> "
        << a.locations[e.dst].name << " on " << e.label.str();
    if (!e.guard.is_true()) out << " when " << e.guard.str();
    if (!e.resets.empty()) out << " reset " << join_names(e.resets);
    if (e.cost) out << " cost " << e.cost;
    out << "\n";
  }
}

}  // namespace

TimedAutomaton parse_ta(std::istream& in) {
  return parse_raw(in, false).ta;
}

TimedAutomaton parse_ta_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return parse_ta(f);
}

std::string serialize_ta(const TimedAutomaton& a) {
  std::ostringstream out;
  serialize_body(out, a, nullptr);
  return out.str();
}

ObserverSpec parse_observer(std::istream& in) {
  RawModel rm = parse_raw(in, true);
  for (const auto& e : rm.ta.edges)
    if (!e.label.is_event())
      throw Error("observer edges must be labeled with alphabet events");
  ObserverSpec o;
  o.ta = rm.ta;
  o.observe = rm.observe;
  o.gran_den = rm.gran_den;
  return o;
}

ObserverSpec parse_observer_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return parse_observer(f);
}

std::string serialize_observer(const ObserverSpec& o) {
  std::ostringstream out;
  if (o.gran_den != 1) out << "granularity 1/" << o.gran_den << "\n";
  std::ostringstream body;
  serialize_body(body, o.ta, &o.observe);
  out << body.str();
  return out.str();
}

TimedWord parse_timed_word_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad timed-word JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("delays") || !j.contains("events"))
    throw Error("timed word JSON needs 'delays' and 'events'");
  TimedWord w;
  w.delays.clear();
  for (const auto& d : j["delays"]) {
    std::string s = d.is_string() ? d.get<std::string>() : d.dump();
    auto r = parse_rational(s);
    if (!r || *r < Rat(0)) throw Error("bad delay '" + s + "'");
    w.delays.push_back(*r);
  }
  for (const auto& e : j["events"]) {
    if (!e.is_string()) throw Error("events must be strings");
    w.events.push_back(e.get<std::string>());
  }
  if (w.delays.size() != w.events.size() + 1)
    throw Error("need len(delays) = len(events)+1");
  return w;
}

std::string timed_word_to_json(const TimedWord& w) {
  nlohmann::ordered_json j;
  j["delays"] = nlohmann::ordered_json::array();
  for (const auto& d : w.delays) j["delays"].push_back(rat_str(d));
  j["events"] = w.events;
  return j.dump();
}

}  // namespace tadiag
