#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swapsim/types.hpp"

namespace swapsim {

// Exact rational arithmetic for all economic math. Values in ACoin terms are
// Rational so grid points and payoff identities can be checked with zero
// tolerance.
using Rational = boost::multiprecision::cpp_rational;

/// ACoin value of 1 BCoin at some time. Must be positive.
struct PriceRatio {
  Rational r = 1;

  explicit PriceRatio(Rational v) : r(std::move(v)) {
    if (r <= 0) throw std::invalid_argument("price ratio must be positive");
  }
  PriceRatio() = default;
};

Rational parse_ratio(const std::string& s);     // decimal text, exact
std::string format_ratio(const Rational& r);    // decimal text, exact when finite

/// Piecewise-constant price path: value at t is the last point at or before t.
struct PricePath {
  std::vector<std::pair<TimePoint, Rational>> points;

  void add(TimePoint t, Rational r);
  Rational at(TimePoint t) const;
  bool empty() const { return points.empty(); }

  static PricePath constant(Rational r) {
    PricePath p;
    p.add(0, std::move(r));
    return p;
  }
};

/// Value of a (ACoin, BCoin) balance pair in ACoin at ratio r.
inline Rational value_in_acoin(Amount a, Amount b, const Rational& r) {
  return Rational(a) + Rational(b) * r;
}

/// Largest Amount <= x (payout rounding).
Amount floor_amount(const Rational& x);
/// Smallest Amount >= x (margin rounding).
Amount ceil_amount(const Rational& x);
/// Exact conversion; throws if x is not an integral number of base units.
Amount exact_amount(const Rational& x);

}  // namespace swapsim
