#include "tadiag/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace tadiag {

std::optional<Rat> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::string s = text;
  bool neg = false;
  std::size_t pos = 0;
  if (s[0] == '-') {
    neg = true;
    pos = 1;
  } else if (s[0] == '+') {
    pos = 1;
  }
  if (pos >= s.size()) return std::nullopt;

  auto digits = [&](std::size_t& i) -> std::optional<long long> {
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
      return std::nullopt;
    long long v = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      v = v * 10 + (s[i] - '0');
      ++i;
    }
    return v;
  };

  auto whole = digits(pos);
  if (!whole) return std::nullopt;
  Rat value(*whole);
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    auto den = digits(pos);
    if (!den || *den == 0 || pos != s.size()) return std::nullopt;
    value = Rat(*whole, *den);
  } else if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    auto frac = digits(pos);
    if (!frac || pos != s.size()) return std::nullopt;
    long long scale = 1;
    for (std::size_t i = start; i < pos; ++i) scale *= 10;
    value = Rat(*whole) + Rat(*frac, scale);
  } else if (pos != s.size()) {
    return std::nullopt;
  }
  return neg ? -value : value;
}

std::string rat_str(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

long long rat_floor(const Rat& r) {
  long long q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
  return q;
}

}  // namespace tadiag
