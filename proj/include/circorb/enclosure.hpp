#pragma once

#include <string>

#include "circorb/rational.hpp"

namespace circorb {

// A closed rational interval [lo, hi] known to contain some real value.
struct Enclosure {
  Rational lo;
  Rational hi;

  Enclosure() = default;
  Enclosure(Rational low, Rational high);
  static Enclosure exact(const Rational& value) { return {value, value}; }

  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }
  bool is_exact() const { return lo == hi; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const Enclosure& other) const { return lo <= other.lo && other.hi <= hi; }
  bool intersects(const Enclosure& other) const { return lo <= other.hi && other.lo <= hi; }

  // Distance between the closest points of two enclosures (0 when they meet).
  Rational gap_to(const Enclosure& other) const;
  Enclosure hull(const Enclosure& other) const;

  double mid_double() const;
  std::string str() const;
};

bool operator==(const Enclosure& a, const Enclosure& b);

}  // namespace circorb
