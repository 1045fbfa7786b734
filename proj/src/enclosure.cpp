#include "circorb/enclosure.hpp"

#include "circorb/error.hpp"

namespace circorb {

Enclosure::Enclosure(Rational low, Rational high) : lo(std::move(low)), hi(std::move(high)) {
  if (hi < lo) throw Error(Errc::PrecisionCollapse, "inverted enclosure " + to_string(lo) + " > " + to_string(hi));
}

Rational Enclosure::gap_to(const Enclosure& other) const {
  if (other.lo > hi) return other.lo - hi;
  if (lo > other.hi) return lo - other.hi;
  return Rational(0);
}

Enclosure Enclosure::hull(const Enclosure& other) const {
  return {lo < other.lo ? lo : other.lo, hi > other.hi ? hi : other.hi};
}

double Enclosure::mid_double() const { return to_double(mid()); }

std::string Enclosure::str() const {
  if (is_exact()) return to_string(lo);
  return "[" + to_string(lo) + ", " + to_string(hi) + "]";
}

bool operator==(const Enclosure& a, const Enclosure& b) { return a.lo == b.lo && a.hi == b.hi; }

}  // namespace circorb
