#pragma once

#include <boost/rational.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace tadiag {

/// Exact rational time values. All time arithmetic in the library is exact;
/// nothing is ever rounded to floating point.
using Rat = boost::rational<long long>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses "3", "-2", "1/2" or a decimal like "0.4" into an exact rational.
std::optional<Rat> parse_rational(const std::string& text);

/// "p/q" if the denominator is not 1, otherwise just "p".
std::string rat_str(const Rat& r);

/// Largest integer <= r.
long long rat_floor(const Rat& r);

}  // namespace tadiag
