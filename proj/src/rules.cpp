#include "circorb/rules.hpp"

#include <algorithm>
#include <limits>

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

namespace circorb {

namespace {

constexpr long kStepCap = 1L << 50;
constexpr long kCellLoopCap = 1L << 16;

AffineSegment identity_segment() { return {std::nullopt, std::nullopt, Rational(1), Rational(0)}; }

const Rational& exact_prec() {
  static const Rational p = pow2(-64);
  return p;
}

// Smallest t in [1, allowed] with pred(t), or allowed when none qualifies.
template <class Pred>
long first_step(long allowed, Pred pred) {
  long lo = 0, hi = 1;  // pred(lo) is false (or lo == 0)
  while (hi < allowed && !pred(hi)) {
    lo = hi;
    hi = hi > allowed / 2 ? allowed : hi * 2;
  }
  if (!pred(hi)) return allowed;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

AffineSegment compose_segments(const AffineSegment& outer, const AffineSegment& inner) {
  AffineSegment out{inner.lo, inner.hi, outer.slope * inner.slope, outer.slope * inner.offset + outer.offset};
  if (outer.lo) {
    const Rational b = inner.unapply(*outer.lo);
    if (!out.lo || b > *out.lo) out.lo = b;
  }
  if (outer.hi) {
    const Rational b = inner.unapply(*outer.hi);
    if (!out.hi || b < *out.hi) out.hi = b;
  }
  return out;
}

IterateResult iterate_affine_map(const PiecewiseMap& phi, long k, const Rational& x) {
  IterateResult r{x, identity_segment()};
  const bool forward = k > 0;
  long remaining = k < 0 ? -k : k;
  while (remaining > 0) {
    const auto seg = forward ? forward_segment(phi, r.value) : inverse_segment(phi, r.value);
    if (!seg) throw Error(Errc::NonAffineInput, "map '" + phi.name() + "' is not affine near " + to_string(r.value));
    const long steps = std::max(1L, admissible_steps(*seg, r.value, remaining));
    const AffineSegment p = affine_power(*seg, steps);
    r.segment = compose_segments(p, r.segment);
    r.value = p.apply(r.value);
    remaining -= steps;
  }
  return r;
}

SegmentRule::SegmentRule(std::vector<AffineSegment> segments, std::optional<SplitHomeoSpec> origin)
    : segments_(std::move(segments)), origin_(std::move(origin)) {
  if (segments_.empty()) throw Error(Errc::BadParams, "segment rule needs at least one segment");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!s.lo || !s.hi || !(*s.lo < *s.hi)) throw Error(Errc::BadParams, "segment rule pieces must be bounded");
    if (s.slope <= 0) throw Error(Errc::NonMonotonePiece, "segment rule slope must be positive");
    if (i > 0) {
      const auto& prev = segments_[i - 1];
      if (*prev.hi < *s.lo) throw Error(Errc::GapInDomain, "segment rule has a gap at " + to_string(*prev.hi));
      if (*prev.hi > *s.lo) throw Error(Errc::OverlappingPieces, "segment rule overlaps at " + to_string(*s.lo));
      if (prev.apply(*prev.hi) != s.apply(*s.lo))
        throw Error(Errc::GapInDomain, "segment rule jumps at " + to_string(*s.lo));
    }
  }
}

std::size_t SegmentRule::index_of(const Rational& x) const {
  if (x < lo() || x > hi()) throw Error(Errc::OutOfDomain, to_string(x) + " outside segment rule");
  auto it = std::lower_bound(segments_.begin(), segments_.end(), x,
                             [](const AffineSegment& s, const Rational& v) { return *s.hi < v; });
  return static_cast<std::size_t>(it - segments_.begin());
}

std::size_t SegmentRule::index_of_image(const Rational& y) const {
  const Rational first = segments_.front().apply(lo());
  const Rational last = segments_.back().apply(hi());
  if (y < first || y > last) throw Error(Errc::NotInImage, to_string(y) + " outside segment rule image");
  auto it = std::lower_bound(segments_.begin(), segments_.end(), y,
                             [](const AffineSegment& s, const Rational& v) { return s.apply(*s.hi) < v; });
  return static_cast<std::size_t>(it - segments_.begin());
}

Enclosure SegmentRule::eval(const Rational& x, const Rational&) const {
  return Enclosure::exact(segments_[index_of(x)].apply(x));
}

Enclosure SegmentRule::invert(const Rational& y, const Rational&) const {
  return Enclosure::exact(segments_[index_of_image(y)].unapply(y));
}

std::optional<AffineSegment> SegmentRule::affine_at(const Rational& x) const { return segments_[index_of(x)]; }

RulePtr make_segment_rule(std::vector<AffineSegment> segments) {
  return std::make_shared<const SegmentRule>(std::move(segments));
}

RulePtr ListFamily::at(long n) const {
  if (n >= first_ && n - first_ < static_cast<long>(maps_.size())) return maps_[static_cast<std::size_t>(n - first_)];
  return fallback_;
}

QuadSplitFamily::QuadSplitFamily(Rational k_lo, Rational k_hi, Rational d_hi, long offset)
    : k_lo_(std::move(k_lo)), k_hi_(std::move(k_hi)), d_hi_(std::move(d_hi)), offset_(offset) {
  if (!(k_lo_ < k_hi_) || !(k_hi_ < d_hi_)) throw Error(Errc::BadParams, "quad-split family needs k_lo < k_hi < d_hi");
}

RulePtr QuadSplitFamily::at(long n) const {
  if (n + offset_ < 1) return nullptr;
  {
    const std::lock_guard lock(mutex_);
    if (auto it = cache_.find(n); it != cache_.end()) return it->second;
  }
  const QuadIndex q = quad_unrank(static_cast<std::uint64_t>(n + offset_));
  SplitHomeoSpec spec{k_lo_, k_hi_, k_lo_, k_hi_, {{q.p1, q.p1s}, {q.p2, q.p2s}}};
  auto segments = split_homeo_segments(spec);
  segments.push_back({k_hi_, d_hi_, Rational(1), Rational(0)});
  RulePtr rule = make_segment_rule(std::move(segments));
  const std::lock_guard lock(mutex_);
  return cache_.emplace(n, std::move(rule)).first->second;
}

ConjugationRule::ConjugationRule(ConjugationSpec spec) : spec_(std::move(spec)) {
  if (!spec_.phi.all_affine()) throw Error(Errc::NonAffineInput, "conjugating map must be piecewise affine");
  if (spec_.shift != 0 && spec_.shift != 1) throw Error(Errc::BadParams, "shift must be 0 or 1");
  if (!spec_.psi) throw Error(Errc::BadParams, "conjugation rule needs a psi family");
  d1_ = circorb::eval(spec_.phi, spec_.d0, exact_prec()).lo;
  if (!(d1_ > spec_.d0)) throw Error(Errc::BadParams, "conjugating map must move d0 upward");
}

bool ConjugationRule::accumulates_at(const Rational& x) const {
  return circorb::eval(spec_.phi, x, exact_prec()).lo == x;
}

ConjugationRule::Cell ConjugationRule::locate(const Rational& x) const {
  if (accumulates_at(x)) throw Error(Errc::OutOfDomain, to_string(x) + " is fixed by the conjugating map");
  Cell cell{0, x};
  for (long guard = 0; guard < kCellLoopCap; ++guard) {
    if (cell.y < spec_.d0) {
      const auto seg = forward_segment(spec_.phi, cell.y);
      const long allowed = std::max(1L, admissible_steps(*seg, cell.y, kStepCap));
      const long t = first_step(allowed, [&](long s) { return affine_iterate(*seg, cell.y, s) >= spec_.d0; });
      cell.y = affine_iterate(*seg, cell.y, t);
      cell.n -= t;
    } else if (cell.y >= d1_) {
      const auto seg = inverse_segment(spec_.phi, cell.y);
      const long allowed = std::max(1L, admissible_steps(*seg, cell.y, kStepCap));
      const long t = first_step(allowed, [&](long s) { return affine_iterate(*seg, cell.y, s) < d1_; });
      cell.y = affine_iterate(*seg, cell.y, t);
      cell.n += t;
    } else {
      return cell;
    }
  }
  throw Error(Errc::PrecisionCollapse, "could not locate the cell of " + to_string(x));
}

Enclosure ConjugationRule::eval(const Rational& x, const Rational& prec) const {
  if (accumulates_at(x)) return Enclosure::exact(x);
  const Cell cell = locate(x);
  const RulePtr psi = spec_.psi->at(cell.n);
  const long k = cell.n + spec_.shift;
  if (!psi) return Enclosure::exact(iterate_affine_map(spec_.phi, k, cell.y).value);
  Enclosure w = psi->eval(cell.y, prec);
  if (w.is_exact()) return Enclosure::exact(iterate_affine_map(spec_.phi, k, w.lo).value);
  const IterateResult probe = iterate_affine_map(spec_.phi, k, w.lo);
  if (probe.segment.slope > 1) w = psi->eval(cell.y, prec / probe.segment.slope);
  return {iterate_affine_map(spec_.phi, k, w.lo).value, iterate_affine_map(spec_.phi, k, w.hi).value};
}

Enclosure ConjugationRule::invert(const Rational& y, const Rational& prec) const {
  if (accumulates_at(y)) return Enclosure::exact(y);
  const Cell cell = locate(y);
  const long n = cell.n - spec_.shift;
  const RulePtr psi = spec_.psi->at(n);
  const Enclosure v = psi ? psi->invert(cell.y, prec) : Enclosure::exact(cell.y);
  if (v.is_exact()) return Enclosure::exact(iterate_affine_map(spec_.phi, n, v.lo).value);
  return {iterate_affine_map(spec_.phi, n, v.lo).value, iterate_affine_map(spec_.phi, n, v.hi).value};
}

std::optional<AffineSegment> ConjugationRule::affine_at(const Rational& x) const {
  if (accumulates_at(x)) return std::nullopt;
  const Cell cell = locate(x);
  IterateResult back = iterate_affine_map(spec_.phi, -cell.n, x);
  AffineSegment a = back.segment;
  const AffineSegment cell_clip{spec_.d0, d1_, Rational(1), Rational(0)};
  a = compose_segments(cell_clip, a);
  AffineSegment b{spec_.d0, d1_, Rational(1), Rational(0)};
  if (const RulePtr psi = spec_.psi->at(cell.n)) {
    auto seg = psi->affine_at(cell.y);
    if (!seg) return std::nullopt;
    b = *seg;
  }
  const IterateResult fwd = iterate_affine_map(spec_.phi, cell.n + spec_.shift, b.apply(cell.y));
  AffineSegment total = compose_segments(fwd.segment, compose_segments(b, a));
  if (spec_.lo && (!total.lo || *total.lo < *spec_.lo)) total.lo = spec_.lo;
  if (spec_.hi && (!total.hi || *total.hi > *spec_.hi)) total.hi = spec_.hi;
  return total;
}

std::optional<std::vector<FixedPointEnclosure>> ConjugationRule::fixed_points(const Rational& lo, const Rational& hi,
                                                                             const Rational& resolution) const {
  const Rational a = spec_.lo && *spec_.lo > lo ? *spec_.lo : lo;
  const Rational b = spec_.hi && *spec_.hi < hi ? *spec_.hi : hi;
  std::vector<FixedPointEnclosure> out;
  if (a > b) return out;
  const bool acc_a = accumulates_at(a);
  const bool acc_b = accumulates_at(b);
  if (spec_.shift != 0) {
    if (acc_a) out.push_back({Enclosure::exact(a), FixedKind::Certified});
    if (acc_b && b != a) out.push_back({Enclosure::exact(b), FixedKind::Certified});
    return out;
  }
  if (a == b) {
    if (acc_a || eval(a, resolution).contains(a)) out.push_back({Enclosure::exact(a), FixedKind::Certified});
    return out;
  }
  auto cell_lo = [&](long n) { return iterate_affine_map(spec_.phi, n, spec_.d0).value; };
  auto cell_hi = [&](long n) { return iterate_affine_map(spec_.phi, n, d1_).value; };
  bool ok = true;
  auto handle = [&](long n) {
    const Rational cl = cell_lo(n), ch = cell_hi(n);
    const Rational xa = std::max(a, cl), xb = std::min(b, ch);
    if (xa > xb) return;
    const IterateResult ya = iterate_affine_map(spec_.phi, -n, xa);
    const Rational yb = iterate_affine_map(spec_.phi, -n, xb).value;
    const RulePtr psi = spec_.psi->at(n);
    std::vector<FixedPointEnclosure> local;
    if (!psi) {
      local.push_back({{ya.value, yb}, FixedKind::Interval});
    } else {
      const Rational scale = ya.segment.slope < 1 ? 1 / ya.segment.slope : Rational(1);
      auto pts = psi->fixed_points(ya.value, yb, resolution / scale);
      if (!pts) {
        ok = false;
        return;
      }
      local = std::move(*pts);
    }
    for (const auto& p : local) {
      const Rational plo = iterate_affine_map(spec_.phi, n, p.where.lo).value;
      const Rational phi = iterate_affine_map(spec_.phi, n, p.where.hi).value;
      out.push_back({{plo, phi}, p.kind});
    }
  };
  auto down_from = [&](long n) {
    long guard = 0;
    while (cell_hi(n) - a > resolution) {
      if (++guard > kCellLoopCap) return false;
      handle(n--);
    }
    out.push_back({{a, cell_hi(n)}, FixedKind::Certified});
    return true;
  };
  auto up_from = [&](long n) {
    long guard = 0;
    while (b - cell_lo(n) > resolution) {
      if (++guard > kCellLoopCap) return false;
      handle(n++);
    }
    out.push_back({{cell_lo(n), b}, FixedKind::Certified});
    return true;
  };
  if (!acc_a && !acc_b) {
    const long na = locate(a).n, nb = locate(b).n;
    if (nb - na > kCellLoopCap) return std::nullopt;
    for (long n = na; n <= nb; ++n) handle(n);
  } else if (acc_a && !acc_b) {
    if (!down_from(locate(b).n)) return std::nullopt;
  } else if (!acc_a && acc_b) {
    if (!up_from(locate(a).n)) return std::nullopt;
  } else {
    if (!down_from(-1) || !up_from(0)) return std::nullopt;
  }
  if (!ok) return std::nullopt;
  return out;
}

}  // namespace circorb
