#include "swapsim/price.hpp"

#include <algorithm>

namespace swapsim {

using boost::multiprecision::cpp_int;

Rational parse_ratio(const std::string& s) {
  if (s.empty()) throw ScenarioError("empty ratio");
  std::size_t i = 0;
  cpp_int num = 0;
  cpp_int den = 1;
  bool any = false;
  for (; i < s.size() && s[i] != '.' && s[i] != '/'; ++i) {
    if (s[i] < '0' || s[i] > '9') throw ScenarioError("bad ratio: " + s);
    num = num * 10 + (s[i] - '0');
    any = true;
  }
  if (i < s.size() && s[i] == '/') {
    cpp_int d = 0;
    for (++i; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw ScenarioError("bad ratio: " + s);
      d = d * 10 + (s[i] - '0');
    }
    if (d == 0) throw ScenarioError("zero denominator: " + s);
    den = d;
  } else if (i < s.size() && s[i] == '.') {
    for (++i; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw ScenarioError("bad ratio: " + s);
      num = num * 10 + (s[i] - '0');
      den *= 10;
      any = true;
    }
  }
  if (!any) throw ScenarioError("bad ratio: " + s);
  Rational r(num, den);
  if (r <= 0) throw ScenarioError("ratio must be positive: " + s);
  return r;
}

std::string format_ratio(const Rational& r) {
  // Decimal expansion when the denominator is 2^a * 5^b, else "num/den".
  cpp_int num = numerator(r);
  cpp_int den = denominator(r);
  cpp_int d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();
  const int digits = std::max(twos, fives);
  if (digits == 0) return num.str();
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const cpp_int scaled = num * (scale / den);
  const cpp_int whole = scaled / scale;
  cpp_int frac = scaled % scale;
  std::string fs = frac.str();
  fs.insert(fs.begin(), static_cast<std::size_t>(digits) - fs.size(), '0');
  return whole.str() + "." + fs;
}

void PricePath::add(TimePoint t, Rational r) {
  if (r <= 0) throw std::invalid_argument("price ratio must be positive");
  if (!points.empty() && points.back().first >= t && !(points.size() == 1 && t == 0)) {
    throw std::invalid_argument("price path times must be strictly increasing");
  }
  points.emplace_back(t, std::move(r));
}

Rational PricePath::at(TimePoint t) const {
  if (points.empty()) throw std::logic_error("empty price path");
  Rational out = points.front().second;
  for (const auto& [pt, r] : points) {
    if (pt <= t) out = r;
    else break;
  }
  return out;
}

Amount floor_amount(const Rational& x) {
  cpp_int q = numerator(x) / denominator(x);
  if (x < 0 && q * denominator(x) != numerator(x)) q -= 1;
  return static_cast<Amount>(q);
}

Amount ceil_amount(const Rational& x) {
  cpp_int q = numerator(x) / denominator(x);
  if (x > 0 && q * denominator(x) != numerator(x)) q += 1;
  return static_cast<Amount>(q);
}

Amount exact_amount(const Rational& x) {
  if (denominator(x) != 1) {
    throw std::invalid_argument("value is not integral in base units");
  }
  return static_cast<Amount>(numerator(x));
}

}  // namespace swapsim
