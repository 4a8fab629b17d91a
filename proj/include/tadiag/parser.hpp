#pragma once

#include "tadiag/ta.hpp"

#include <iosfwd>
#include <string>

namespace tadiag {

struct ParseError : Error {
  int line;
  ParseError(int line_, const std::string& msg)
      : Error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

TimedAutomaton parse_ta(std::istream& in);
TimedAutomaton parse_ta_file(const std::string& path);
std::string serialize_ta(const TimedAutomaton& a);

/// Observer description: a deterministic, complete automaton over the full
/// alphabet together with the set observed at each location. Carries its
/// own granularity (guards may use multiples of 1/gran_den).
struct ObserverSpec {
  TimedAutomaton ta;
  std::vector<std::vector<std::string>> observe;  // per location
  long long gran_den = 1;
};

ObserverSpec parse_observer(std::istream& in);
ObserverSpec parse_observer_file(const std::string& path);
std::string serialize_observer(const ObserverSpec& o);

TimedWord parse_timed_word_json(const std::string& text);
std::string timed_word_to_json(const TimedWord& w);

}  // namespace tadiag
