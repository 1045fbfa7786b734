#include "circorb/piecewise_map.hpp"

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

namespace circorb {

std::string domain_kind_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::Interval01: return "interval";
    case DomainKind::Circle: return "circle";
    case DomainKind::Line: return "line";
  }
  return "interval";
}

DomainKind parse_domain_kind(const std::string& text) {
  if (text == "interval") return DomainKind::Interval01;
  if (text == "circle") return DomainKind::Circle;
  if (text == "line") return DomainKind::Line;
  throw Error(Errc::ParseError, "unknown domain kind '" + text + "'");
}

AffineSegment AffineSegment::inverse() const {
  AffineSegment inv;
  if (lo) inv.lo = apply(*lo);
  if (hi) inv.hi = apply(*hi);
  inv.slope = 1 / slope;
  inv.offset = -offset / slope;
  return inv;
}

Piece Piece::affine(Rational lo, Rational hi, Rational slope, Rational offset) {
  return {std::move(lo), std::move(hi), AffineForm{std::move(slope), std::move(offset)}};
}

Piece Piece::power(Rational lo, Rational hi, PowerForm form) {
  return {std::move(lo), std::move(hi), std::move(form)};
}

Piece Piece::with_rule(Rational lo, Rational hi, RulePtr rule) {
  return {std::move(lo), std::move(hi), std::move(rule)};
}

namespace {

std::string bound_str(const std::optional<Rational>& b, const char* inf) {
  return b ? to_string(*b) : std::string(inf);
}

void check_tiling(const std::string& name, DomainKind kind, const std::vector<Piece>& pieces) {
  if (pieces.empty()) throw Error(Errc::GapInDomain, "map '" + name + "' has no pieces");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    if (p.lo && p.hi && !(*p.lo < *p.hi))
      throw Error(Errc::OverlappingPieces, "map '" + name + "' piece " + std::to_string(i) + " has empty domain");
    if (i > 0 && (!p.lo)) throw Error(Errc::OverlappingPieces, "map '" + name + "' has an interior unbounded piece");
    if (i + 1 < pieces.size() && !p.hi)
      throw Error(Errc::OverlappingPieces, "map '" + name + "' has an interior unbounded piece");
    if (i > 0) {
      const Rational& prev_hi = *pieces[i - 1].hi;
      if (prev_hi > *p.lo)
        throw Error(Errc::OverlappingPieces, "map '" + name + "' pieces overlap at " + to_string(*p.lo));
      if (prev_hi < *p.lo)
        throw Error(Errc::GapInDomain,
                    "map '" + name + "' leaves (" + to_string(prev_hi) + ", " + to_string(*p.lo) + ") uncovered");
    }
  }
  if (kind != DomainKind::Line) {
    const auto& first = pieces.front().lo;
    const auto& last = pieces.back().hi;
    if (!first || *first != 0 || !last || *last != 1)
      throw Error(Errc::GapInDomain, "map '" + name + "' must tile [0,1], covers [" + bound_str(first, "-inf") +
                                         ", " + bound_str(last, "+inf") + "]");
  }
}

}  // namespace

PiecewiseMap::PiecewiseMap(std::string name, DomainKind kind, std::vector<Piece> pieces)
    : name_(std::move(name)), kind_(kind), pieces_(std::move(pieces)) {
  check_tiling(name_, kind_, pieces_);
  report_ = std::make_shared<const ValidationReport>(validate_map(*this));
}

bool PiecewiseMap::all_affine() const {
  for (const auto& p : pieces_)
    if (!p.is_affine()) return false;
  return true;
}

std::size_t PiecewiseMap::piece_index(const Rational& x) const {
  std::size_t lo = 0, hi = pieces_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto& bound = pieces_[mid].hi;
    if (!bound || x <= *bound) hi = mid;
    else lo = mid + 1;
  }
  if (lo == pieces_.size() || !pieces_[lo].contains(x))
    throw Error(Errc::OutOfDomain, to_string(x) + " is outside the domain of '" + name_ + "'");
  return lo;
}

PiecewiseMap PiecewiseMap::renamed(std::string name) const {
  PiecewiseMap out = *this;
  out.name_ = std::move(name);
  return out;
}

}  // namespace circorb
