#include <algorithm>

#include "circorb/cantor.hpp"
#include "circorb/error.hpp"
#include "circorb/rules.hpp"

namespace circorb {

namespace {

struct Cylinder {
  std::string word;
  Rational lo;
  Rational width;

  Rational hi() const { return lo + width; }
  Cylinder child(char digit) const {
    const Rational w = width / 3;
    return {word + digit, digit == '0' ? lo : lo + 2 * w, w};
  }
};

const Cylinder& root() {
  static const Cylinder c{"", Rational(0), Rational(1)};
  return c;
}

// Cylinders covering C n [a, b] in order, where a and b are cylinder boundaries.
void decompose(const Cylinder& c, const Rational& a, const Rational& b, std::vector<Cylinder>& out) {
  if (c.hi() <= a || c.lo >= b) return;
  if (c.lo >= a && c.hi() <= b) {
    out.push_back(c);
    return;
  }
  decompose(c.child('0'), a, b, out);
  decompose(c.child('2'), a, b, out);
}

std::vector<Cylinder> cover(const Rational& a, const Rational& b) {
  std::vector<Cylinder> out;
  if (a < b) decompose(root(), a, b, out);
  return out;
}

// Splits the shortest cylinder (leftmost on ties) until the list has n entries.
void refine_to(std::vector<Cylinder>& cyls, std::size_t n) {
  while (cyls.size() < n) {
    auto it = std::min_element(cyls.begin(), cyls.end(),
                               [](const Cylinder& x, const Cylinder& y) { return x.word.size() < y.word.size(); });
    const Cylinder c = *it;
    it = cyls.erase(it);
    it = cyls.insert(it, c.child('2'));
    cyls.insert(it, c.child('0'));
  }
}

AffineSegment between(const Rational& x0, const Rational& x1, const Rational& y0, const Rational& y1) {
  const Rational slope = (y1 - y0) / (x1 - x0);
  return {x0, x1, slope, y0 - slope * x0};
}

void push_merged(std::vector<AffineSegment>& out, AffineSegment seg) {
  if (!out.empty() && out.back().slope == seg.slope && out.back().offset == seg.offset) {
    out.back().hi = seg.hi;
    return;
  }
  out.push_back(std::move(seg));
}

// Pairs two Cantor pieces [a, b] -> [c, d] cylinder by cylinder, gaps in between affinely.
void match_pieces(const Rational& a, const Rational& b, const Rational& c, const Rational& d,
                  std::vector<AffineSegment>& out) {
  auto src = cover(a, b);
  auto dst = cover(c, d);
  if (src.empty() || dst.empty()) {
    if (src.empty() != dst.empty()) throw Error(Errc::PinOrderMismatch, "pins leave an empty Cantor piece on one side");
    return;
  }
  refine_to(src, dst.size());
  refine_to(dst, src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (i > 0) push_merged(out, between(src[i - 1].hi(), src[i].lo, dst[i - 1].hi(), dst[i].lo));
    push_merged(out, between(src[i].lo, src[i].hi(), dst[i].lo, dst[i].hi()));
  }
}

}  // namespace

std::vector<AffineSegment> split_homeo_segments(const SplitHomeoSpec& spec) {
  if (!(spec.source_lo < spec.source_hi) || !(spec.target_lo < spec.target_hi))
    throw Error(Errc::BadParams, "split homeo intervals must be nondegenerate");
  for (std::size_t i = 0; i < spec.pins.size(); ++i) {
    const auto& [s, t] = spec.pins[i];
    if (!s.is_left_endpoint() || !t.is_left_endpoint())
      throw Error(Errc::NotALeftEndpoint, "pins must be left endpoints of removed intervals");
    if (i > 0 && (!(spec.pins[i - 1].first < s) || !(spec.pins[i - 1].second < t)))
      throw Error(Errc::PinOrderMismatch, "pinned addresses must increase on both sides");
  }
  std::vector<AffineSegment> unit;
  Rational a = 0, c = 0;
  for (const auto& [s, t] : spec.pins) {
    const Rational sv = s.value(), tv = t.value();
    match_pieces(a, sv, c, tv, unit);
    // The gap right of each pinned endpoint is carried linearly onto its partner's gap.
    const std::size_t sg = s.prefix().size(), tg = t.prefix().size();
    const Rational sw = pow3(-static_cast<long>(sg)), tw = pow3(-static_cast<long>(tg));
    push_merged(unit, between(sv, sv + sw, tv, tv + tw));
    a = sv + sw;
    c = tv + tw;
  }
  match_pieces(a, 1, c, 1, unit);
  // Rescale from unit coordinates onto the actual intervals.
  const Rational sl = spec.source_hi - spec.source_lo, tl = spec.target_hi - spec.target_lo;
  std::vector<AffineSegment> out;
  for (const auto& u : unit) {
    const Rational x0 = spec.source_lo + sl * *u.lo, x1 = spec.source_lo + sl * *u.hi;
    const Rational y0 = spec.target_lo + tl * u.apply(*u.lo), y1 = spec.target_lo + tl * u.apply(*u.hi);
    push_merged(out, between(x0, x1, y0, y1));
  }
  return out;
}

RulePtr make_split_rule(const SplitHomeoSpec& spec) {
  return std::make_shared<const SegmentRule>(split_homeo_segments(spec), spec);
}

PiecewiseMap build_split_homeo(const SplitHomeoSpec& spec, const std::string& name) {
  const bool unit = spec.source_lo == 0 && spec.source_hi == 1;
  if (!unit) throw Error(Errc::BadParams, "build_split_homeo builds maps of [0,1]; use make_split_rule for sub-intervals");
  if (spec.target_lo != 0 || spec.target_hi != 1)
    throw Error(Errc::BadParams, "a map of [0,1] needs target [0,1]");
  return PiecewiseMap(name, DomainKind::Interval01, {Piece::with_rule(0, 1, make_split_rule(spec))});
}

}  // namespace circorb
