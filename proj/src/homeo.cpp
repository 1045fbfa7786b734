#include "circorb/homeo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "circorb/error.hpp"

namespace circorb {

namespace {

const Rational& join_tolerance() {
  static const Rational tol = pow_int(Rational(1, 10), 30);
  return tol;
}

const Rational& search_precision() {
  static const Rational prec = pow2(-96);
  return prec;
}

struct ExponentParts {
  unsigned long p;
  unsigned long q;
};

ExponentParts split_exponent(const Rational& e) {
  if (e <= 0) throw Error(Errc::NonMonotonePiece, "power exponent must be positive");
  if (!e.get_num().fits_ulong_p() || !e.get_den().fits_ulong_p())
    throw Error(Errc::BadParams, "power exponent too large");
  return {e.get_num().get_ui(), e.get_den().get_ui()};
}

// Enclosure of v^(1/q) for v >= 0 with width <= prec, exact when the root is rational.
Enclosure root_enclosure(const Rational& v, unsigned long q, const Rational& prec) {
  if (q == 1 || v == 0) return Enclosure::exact(v);
  const RootResult rn = int_root(v.get_num(), q);
  const RootResult rd = int_root(v.get_den(), q);
  if (rn.exact && rd.exact) {
    Rational r(rn.root, rd.root);
    r.canonicalize();
    return Enclosure::exact(r);
  }
  const long k = bits_for(prec);
  Rational scaled;
  mpq_mul_2exp(scaled.get_mpq_t(), v.get_mpq_t(), static_cast<mp_bitcnt_t>(k) * q);
  const RootResult r = int_root(floor_int(scaled), q);
  const Rational unit = pow2(-k);
  return {Rational(r.root) * unit, Rational(r.root + 1) * unit};
}

Enclosure scale_shift(const Enclosure& e, const Rational& c, const Rational& b) {
  if (c > 0) return {c * e.lo + b, c * e.hi + b};
  return {c * e.hi + b, c * e.lo + b};
}

Enclosure eval_power(const PowerForm& f, const Rational& x, const Rational& prec) {
  const Rational u = (x - f.a) / f.s;
  if (u < 0) throw Error(Errc::OutOfDomain, "power piece evaluated left of its anchor at " + to_string(x));
  const auto [p, q] = split_exponent(f.e);
  const Rational v = pow_int(u, static_cast<long>(p));
  return scale_shift(root_enclosure(v, q, prec / abs(f.c)), f.c, f.b);
}

Enclosure invert_power(const PowerForm& f, const Rational& y, const Rational& prec) {
  Rational w = (y - f.b) / f.c;
  if (w < 0) w = 0;
  const auto [p, q] = split_exponent(f.e);
  const Rational v = pow_int(w, static_cast<long>(q));
  return scale_shift(root_enclosure(v, p, prec / f.s), f.s, f.a);
}

Enclosure eval_piece(const Piece& piece, const Rational& x, const Rational& prec) {
  if (const auto* aff = std::get_if<AffineForm>(&piece.form)) return Enclosure::exact(aff->slope * x + aff->offset);
  if (const auto* pw = std::get_if<PowerForm>(&piece.form)) return eval_power(*pw, x, prec);
  return std::get<RulePtr>(piece.form)->eval(x, prec);
}

Enclosure invert_piece(const Piece& piece, const Rational& y, const Rational& prec) {
  if (const auto* aff = std::get_if<AffineForm>(&piece.form)) return Enclosure::exact((y - aff->offset) / aff->slope);
  if (const auto* pw = std::get_if<PowerForm>(&piece.form)) return invert_power(*pw, y, prec);
  return std::get<RulePtr>(piece.form)->invert(y, prec);
}

bool piece_monotone(const Piece& piece) {
  if (const auto* aff = std::get_if<AffineForm>(&piece.form)) return aff->slope > 0;
  if (const auto* pw = std::get_if<PowerForm>(&piece.form)) {
    if (pw->c <= 0 || pw->e <= 0 || pw->s <= 0) return false;
    return !piece.lo || *piece.lo >= pw->a;
  }
  if (piece.lo && piece.hi) {
    const auto& rule = std::get<RulePtr>(piece.form);
    const Enclosure left = rule->eval(*piece.lo, search_precision());
    const Enclosure right = rule->eval(*piece.hi, search_precision());
    return left.hi < right.lo;
  }
  return true;
}

// Circle maps are evaluated through their lift F, extended by F(x + k) = F(x) + k.
Enclosure eval_lift(const PiecewiseMap& map, const Rational& x, const Rational& prec) {
  if (map.domain_kind() != DomainKind::Circle) return eval_piece(map.pieces()[map.piece_index(x)], x, prec);
  const Integer k = floor_int(x);
  const Rational frac = x - Rational(k);
  const Enclosure e = eval_piece(map.pieces()[map.piece_index(frac)], frac, prec);
  return {e.lo + Rational(k), e.hi + Rational(k)};
}

Enclosure image_low(const PiecewiseMap& map, std::size_t i, const Rational& prec) {
  const Piece& p = map.pieces()[i];
  return eval_piece(p, *p.lo, prec);
}

Enclosure image_high(const PiecewiseMap& map, std::size_t i, const Rational& prec) {
  const Piece& p = map.pieces()[i];
  return eval_piece(p, *p.hi, prec);
}

// Index of a piece whose image contains y, searching by image upper ends.
std::size_t piece_by_image(const PiecewiseMap& map, const Rational& y, const Rational& prec) {
  const auto& pieces = map.pieces();
  std::size_t lo = 0, hi = pieces.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (!pieces[mid].hi || y <= image_high(map, mid, prec).hi) hi = mid;
    else lo = mid + 1;
  }
  if (lo == pieces.size())
    throw Error(Errc::NotInImage, to_string(y) + " lies above the image of '" + map.name() + "'");
  if (pieces[lo].lo && y < image_low(map, lo, prec).lo)
    throw Error(Errc::NotInImage, to_string(y) + " lies outside the image of '" + map.name() + "'");
  return lo;
}

Enclosure invert_lift(const PiecewiseMap& map, const Rational& y, const Rational& prec) {
  if (map.domain_kind() != DomainKind::Circle) {
    const std::size_t i = piece_by_image(map, y, prec);
    return invert_piece(map.pieces()[i], y, prec);
  }
  const Rational base = image_low(map, 0, prec).lo;
  Integer k = floor_int(y - base);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Rational shifted = y - Rational(k);
    try {
      const std::size_t i = piece_by_image(map, shifted, prec);
      const Enclosure e = invert_piece(map.pieces()[i], shifted, prec);
      return {e.lo + Rational(k), e.hi + Rational(k)};
    } catch (const Error& err) {
      if (err.code() != Errc::NotInImage) throw;
      k -= 1;
    }
  }
  throw Error(Errc::NotInImage, to_string(y) + " not located on the lift of '" + map.name() + "'");
}

enum class Side { Lower, Upper };

struct Bound {
  Rational x;
  bool exact = true;
};

struct ChainContext {
  Rational delta;
  long grid_bits;
  DomainKind kind;
};

void control_size(Bound& b, Side side, const ChainContext& ctx) {
  if (ctx.kind == DomainKind::Interval01) {
    if (b.x < 0) b.x = 0;
    if (b.x > 1) b.x = 1;
  }
  const std::size_t bits = bit_size(b.x);
  const std::size_t limit = b.exact ? (std::size_t{1} << 22) : static_cast<std::size_t>(4 * ctx.grid_bits + 256);
  if (bits <= limit) return;
  b.x = side == Side::Lower ? floor_dyadic(b.x, ctx.grid_bits) : ceil_dyadic(b.x, ctx.grid_bits);
  b.exact = false;
}

std::optional<AffineSegment> clip(AffineSegment seg, const Piece& piece) {
  if (piece.lo && (!seg.lo || *seg.lo < *piece.lo)) seg.lo = piece.lo;
  if (piece.hi && (!seg.hi || *seg.hi > *piece.hi)) seg.hi = piece.hi;
  return seg;
}

// Largest t >= 0 with sigma^t <= r (sigma > 1, r >= 1), saturating at cap.
long max_power_within(const Rational& sigma, const Rational& r, long cap) {
  const double estimate = approx_log2(r) / approx_log2(sigma);
  if (estimate > static_cast<double>(cap) + 2.0) return cap;
  long t = std::max(0L, static_cast<long>(std::floor(estimate)));
  while (t > 0 && pow_int(sigma, t) > r) --t;
  while (t < cap && pow_int(sigma, t + 1) <= r) ++t;
  return std::min(t, cap);
}

void advance(const PiecewiseMap& map, long power, Bound& b, Side side, const ChainContext& ctx) {
  const bool forward = power > 0;
  long remaining = std::labs(power);
  const bool circle = map.domain_kind() == DomainKind::Circle;
  while (remaining > 0) {
    if (!circle && remaining > 1) {
      const auto seg = forward ? forward_segment(map, b.x) : inverse_segment(map, b.x);
      if (seg) {
        const long steps = admissible_steps(*seg, b.x, remaining);
        b.x = affine_iterate(*seg, b.x, steps);
        remaining -= steps;
        control_size(b, side, ctx);
        continue;
      }
    }
    const Enclosure e = forward ? eval_lift(map, b.x, ctx.delta) : invert_lift(map, b.x, ctx.delta);
    b.x = side == Side::Lower ? e.lo : e.hi;
    b.exact = b.exact && e.is_exact();
    --remaining;
    control_size(b, side, ctx);
  }
}

ChainContext make_context(const Rational& delta, DomainKind kind) {
  return {delta, bits_for(delta) + 8, kind};
}

Enclosure reduce_circle_enclosure(const Enclosure& e) {
  const Integer k = floor_int(e.lo);
  return {e.lo - Rational(k), e.hi - Rational(k)};
}

void check_word(const GeneratorSystem& system, const MapWord& word) {
  for (const auto& s : word.syllables()) {
    const PiecewiseMap& g = system.generator(s.generator);
    if (s.power < 0 && (!system.invertible || !g.surjective()))
      throw Error(Errc::InverseOfEndomorphism,
                  "inverse of '" + s.generator + "' requested in system '" + system.name + "'");
  }
}

Enclosure run_word(const GeneratorSystem& system, const MapWord& word, const Enclosure& x, const Rational& delta) {
  const ChainContext ctx = make_context(delta, system.domain);
  Bound lo{x.lo, true}, hi{x.hi, true};
  std::size_t letter = 0;
  for (const auto& s : word.syllables()) {
    const PiecewiseMap& g = system.generator(s.generator);
    try {
      advance(g, s.power, lo, Side::Lower, ctx);
      advance(g, s.power, hi, Side::Upper, ctx);
    } catch (const Error& err) {
      if (err.code() != Errc::OutOfDomain && err.code() != Errc::NotInImage) throw;
      throw Error(err.code(), "letter " + std::to_string(letter) + " (" + s.generator + "^" +
                                  std::to_string(s.power) + "): " + err.what());
    }
    letter += static_cast<std::size_t>(std::labs(s.power));
  }
  if (hi.x < lo.x) std::swap(lo.x, hi.x);
  Enclosure out{lo.x, hi.x};
  if (system.domain == DomainKind::Circle) out = reduce_circle_enclosure(out);
  return out;
}

// Keeps the stronger flag when two reported enclosures overlap.
int strength(FixedKind k) {
  switch (k) {
    case FixedKind::Interval: return 2;
    case FixedKind::Certified: return 1;
    case FixedKind::Possible: return 0;
  }
  return 0;
}

std::vector<FixedPointEnclosure> merge_fixed(std::vector<FixedPointEnclosure> found) {
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.where.lo < b.where.lo || (a.where.lo == b.where.lo && a.where.hi < b.where.hi); });
  std::vector<FixedPointEnclosure> out;
  for (auto& f : found) {
    if (!out.empty() && out.back().where.intersects(f.where)) {
      auto& last = out.back();
      const bool absorb = last.where.contains(f.where) || f.where.contains(last.where) ||
                          last.kind == FixedKind::Interval || f.kind == FixedKind::Interval;
      if (absorb) {
        last.where = last.where.hull(f.where);
        if (strength(f.kind) > strength(last.kind)) last.kind = f.kind;
        continue;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

void bisect_fixed(const Piece& piece, const Rational& u, const Rational& v, const Rational& resolution,
                  std::vector<FixedPointEnclosure>& out, long& budget) {
  const Rational inner = resolution / 16;
  const Enclosure fu = eval_piece(piece, u, inner);
  const Enclosure fv = eval_piece(piece, v, inner);
  if (fv.hi < u || fu.lo > v) return;
  if (fu.is_exact() && fu.lo == u) out.push_back({Enclosure::exact(u), FixedKind::Certified});
  if (fv.is_exact() && fv.lo == v) out.push_back({Enclosure::exact(v), FixedKind::Certified});
  // Strictly on one side of the diagonal at both ends with a monotone gap in between.
  if (fu.lo > u && fv.lo > v && fu.lo > v) return;
  if (fu.hi < u && fv.hi < v && fv.hi < u) return;
  if (v - u <= resolution || --budget <= 0) {
    const bool up_down = fu.lo > u && fv.hi < v;
    const bool down_up = fu.hi < u && fv.lo > v;
    if (up_down || down_up) out.push_back({{u, v}, FixedKind::Certified});
    else if (!((fu.is_exact() && fu.lo == u) || (fv.is_exact() && fv.lo == v)))
      out.push_back({{u, v}, FixedKind::Possible});
    return;
  }
  const Rational m = (u + v) / 2;
  bisect_fixed(piece, u, m, resolution, out, budget);
  bisect_fixed(piece, m, v, resolution, out, budget);
}

// Fixed points of x -> a + c ((x - a)/s)^e: x = a, and x = a + s (s/c)^(1/(e-1)).
void power_fixed(const PowerForm& f, const Rational& lo, const Rational& hi, const Rational& resolution,
                 std::vector<FixedPointEnclosure>& out) {
  if (lo <= f.a && f.a <= hi) out.push_back({Enclosure::exact(f.a), FixedKind::Certified});
  if (f.e == 1) {
    if (f.c == f.s) out.push_back({{lo, hi}, FixedKind::Interval});
    return;
  }
  const auto [p, q] = split_exponent(f.e);
  const Rational ratio = p > q ? f.s / f.c : f.c / f.s;
  const unsigned long degree = p > q ? p - q : q - p;
  const Rational v = pow_int(ratio, static_cast<long>(q));
  const Enclosure t = root_enclosure(v, degree, resolution / f.s);
  const Enclosure x{f.a + f.s * t.lo, f.a + f.s * t.hi};
  if (x.intersects(Enclosure{lo, hi}) && x.hi > f.a) out.push_back({x, FixedKind::Certified});
}

}  // namespace

Rational mod1(const Rational& x) { return x - Rational(floor_int(x)); }

ValidationReport validate_map(const PiecewiseMap& map) {
  ValidationReport rep;
  const auto& pieces = map.pieces();
  const Rational& tol = join_tolerance();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    bool mono = false;
    try {
      mono = piece_monotone(pieces[i]);
    } catch (const Error&) {
      mono = false;
    }
    rep.piece_monotone.push_back(mono);
    if (!mono) {
      rep.monotone = false;
      rep.problems.push_back("piece " + std::to_string(i) + " is not increasing");
    }
  }
  auto check_join = [&](const Rational& at, const Enclosure& left, const Enclosure& right, bool exact_join) {
    BreakpointCheck bc{at, left, right, false};
    if (exact_join) bc.continuous = left == right;
    else bc.continuous = left.gap_to(right) <= tol;
    if (!bc.continuous) {
      rep.continuous = false;
      rep.problems.push_back("jump at " + to_string(at) + ": " + left.str() + " vs " + right.str());
    }
    rep.breakpoints.push_back(std::move(bc));
  };
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const Rational& at = *pieces[i].hi;
    try {
      const Enclosure left = eval_piece(pieces[i], at, tol);
      const Enclosure right = eval_piece(pieces[i + 1], at, tol);
      check_join(at, left, right, pieces[i].is_affine() && pieces[i + 1].is_affine());
    } catch (const Error& err) {
      rep.continuous = false;
      rep.problems.push_back(std::string("breakpoint ") + to_string(at) + ": " + err.what());
    }
  }
  try {
    if (map.domain_kind() == DomainKind::Interval01) {
      const Enclosure f0 = eval_piece(pieces.front(), 0, tol);
      const Enclosure f1 = eval_piece(pieces.back(), 1, tol);
      rep.fixes_zero = f0.is_exact() && f0.lo == 0;
      rep.fixes_one = f1.is_exact() && f1.lo == 1;
      rep.surjective = rep.fixes_zero && rep.fixes_one;
      if (f0.lo < 0 || f1.hi > 1) {
        rep.continuous = false;
        rep.problems.push_back("image leaves [0,1]");
      }
    } else if (map.domain_kind() == DomainKind::Circle) {
      const Enclosure f0 = eval_piece(pieces.front(), 0, tol);
      const Enclosure f1 = eval_piece(pieces.back(), 1, tol);
      check_join(1, Enclosure{f1.lo - 1, f1.hi - 1}, f0, pieces.front().is_affine() && pieces.back().is_affine());
      rep.surjective = rep.continuous;
    } else {
      rep.surjective = !pieces.front().lo && !pieces.back().hi;
    }
  } catch (const Error& err) {
    rep.continuous = false;
    rep.problems.push_back(std::string("endpoint check: ") + err.what());
  }
  rep.usable = rep.monotone && rep.continuous;
  return rep;
}

void ensure_usable(const PiecewiseMap& map) {
  const auto& rep = map.report();
  if (!rep.monotone) throw Error(Errc::NonMonotonePiece, "map '" + map.name() + "': " + rep.problems.front());
  if (!rep.continuous) throw Error(Errc::GapInDomain, "map '" + map.name() + "': " + rep.problems.front());
}

Enclosure eval(const PiecewiseMap& map, const Rational& x, const Rational& prec) {
  if (map.domain_kind() == DomainKind::Circle) return reduce_circle_enclosure(eval_lift(map, mod1(x), prec));
  return eval_lift(map, x, prec);
}

Enclosure eval(const PiecewiseMap& map, const Enclosure& x, const Rational& prec) {
  if (x.is_exact()) return eval(map, x.lo, prec);
  Enclosure lifted{eval_lift(map, x.lo, prec).lo, eval_lift(map, x.hi, prec).hi};
  if (map.domain_kind() == DomainKind::Circle) return reduce_circle_enclosure(lifted);
  return lifted;
}

Enclosure invert_point(const PiecewiseMap& map, const Rational& y, const Rational& prec) {
  if (map.domain_kind() == DomainKind::Circle) return reduce_circle_enclosure(invert_lift(map, mod1(y), prec));
  return invert_lift(map, y, prec);
}

Enclosure invert_point(const PiecewiseMap& map, const Enclosure& y, const Rational& prec) {
  if (y.is_exact()) return invert_point(map, y.lo, prec);
  Enclosure lifted{invert_lift(map, y.lo, prec).lo, invert_lift(map, y.hi, prec).hi};
  if (map.domain_kind() == DomainKind::Circle) return reduce_circle_enclosure(lifted);
  return lifted;
}

Enclosure apply_power(const PiecewiseMap& map, long power, const Enclosure& x, const Rational& prec) {
  const ChainContext ctx = make_context(prec / 256, map.domain_kind());
  Bound lo{x.lo, true}, hi{x.hi, true};
  advance(map, power, lo, Side::Lower, ctx);
  advance(map, power, hi, Side::Upper, ctx);
  Enclosure out{lo.x, hi.x};
  if (map.domain_kind() == DomainKind::Circle) out = reduce_circle_enclosure(out);
  return out;
}

Enclosure eval_word(const GeneratorSystem& system, const MapWord& word, const Rational& x, const Rational& prec) {
  check_word(system, word);
  if (prec <= 0) throw Error(Errc::BadParams, "precision must be positive");
  const Enclosure start = Enclosure::exact(system.domain == DomainKind::Circle ? mod1(x) : x);
  Rational delta = prec / 256;
  for (int attempt = 0; attempt < 12; ++attempt) {
    const Enclosure out = run_word(system, word, start, delta);
    if (out.width() <= prec) return out;
    delta *= pow2(-24);
  }
  throw Error(Errc::PrecisionCollapse, "word '" + word.compact() + "' cannot be enclosed to width " + to_string(prec));
}

Enclosure eval_word(const GeneratorSystem& system, const MapWord& word, const Enclosure& x, const Rational& prec) {
  if (x.is_exact()) return eval_word(system, word, x.lo, prec);
  check_word(system, word);
  return run_word(system, word, x, prec / 256);
}

std::vector<FixedPointEnclosure> fixed_point_enclosures(const PiecewiseMap& map, const Rational& resolution) {
  const auto& pieces = map.pieces();
  if (!pieces.front().lo || !pieces.back().hi) {
    const Rational lo = pieces.front().lo ? *pieces.front().lo : (pieces.front().hi ? *pieces.front().hi : Rational(0));
    const Rational hi = pieces.back().hi ? *pieces.back().hi : (pieces.back().lo ? *pieces.back().lo : Rational(1));
    return fixed_point_enclosures(map, resolution, lo, hi);
  }
  return fixed_point_enclosures(map, resolution, *pieces.front().lo, *pieces.back().hi);
}

std::vector<FixedPointEnclosure> fixed_point_enclosures(const PiecewiseMap& map, const Rational& resolution,
                                                        const Rational& lo, const Rational& hi) {
  std::vector<FixedPointEnclosure> found;
  const bool circle = map.domain_kind() == DomainKind::Circle;
  for (const Piece& piece : map.pieces()) {
    const Rational plo = piece.lo && *piece.lo > lo ? *piece.lo : lo;
    const Rational phi = piece.hi && *piece.hi < hi ? *piece.hi : hi;
    if (plo > phi) continue;
    if (const auto* aff = std::get_if<AffineForm>(&piece.form)) {
      affine_fixed_points({plo, phi, aff->slope, aff->offset}, plo, phi, circle, found);
      continue;
    }
    if (const auto* pw = std::get_if<PowerForm>(&piece.form); pw && pw->a == pw->b && !circle) {
      power_fixed(*pw, plo, phi, resolution, found);
      continue;
    }
    if (const auto* rule = std::get_if<RulePtr>(&piece.form)) {
      if (auto pts = (*rule)->fixed_points(plo, phi, resolution)) {
        found.insert(found.end(), pts->begin(), pts->end());
        continue;
      }
    }
    long budget = 1 << 16;
    bisect_fixed(piece, plo, phi, resolution, found, budget);
  }
  if (circle)
    for (auto& f : found)
      if (f.kind != FixedKind::Interval && f.where.lo >= 1) f.where = {f.where.lo - 1, f.where.hi - 1};
  return merge_fixed(std::move(found));
}

std::optional<AffineSegment> forward_segment(const PiecewiseMap& map, const Rational& x) {
  const Piece& piece = map.pieces()[map.piece_index(x)];
  if (const auto* aff = std::get_if<AffineForm>(&piece.form))
    return AffineSegment{piece.lo, piece.hi, aff->slope, aff->offset};
  if (const auto* rule = std::get_if<RulePtr>(&piece.form)) {
    auto seg = (*rule)->affine_at(x);
    if (seg) return clip(*seg, piece);
  }
  return std::nullopt;
}

std::optional<AffineSegment> inverse_segment(const PiecewiseMap& map, const Rational& y) {
  const std::size_t i = piece_by_image(map, y, search_precision());
  const Piece& piece = map.pieces()[i];
  if (const auto* aff = std::get_if<AffineForm>(&piece.form))
    return AffineSegment{piece.lo, piece.hi, aff->slope, aff->offset}.inverse();
  if (const auto* rule = std::get_if<RulePtr>(&piece.form)) {
    const Enclosure pre = (*rule)->invert(y, search_precision());
    if (!pre.is_exact()) return std::nullopt;
    auto seg = (*rule)->affine_at(pre.lo);
    if (seg) return clip(*seg, piece)->inverse();
  }
  return std::nullopt;
}

// How many consecutive applications of seg starting at x (inside seg) are legal,
// counting the one that may leave the segment, capped at cap.
long admissible_steps(const AffineSegment& seg, const Rational& x, long cap) {
  if (seg.slope == 1) {
    const Rational& o = seg.offset;
    if (o == 0) return cap;
    Integer t;
    if (o > 0) {
      if (!seg.hi) return cap;
      t = floor_int((*seg.hi - x) / o);
    } else {
      if (!seg.lo) return cap;
      t = floor_int((x - *seg.lo) / (-o));
    }
    if (t >= cap - 1) return cap;
    return t.get_si() + 1;
  }
  const Rational p = seg.offset / (1 - seg.slope);
  const Rational d = x - p;
  if (d == 0) return cap;
  Rational sigma, r;
  if (seg.slope < 1) {
    sigma = 1 / seg.slope;
    if (d > 0) {
      if (!seg.lo || p >= *seg.lo) return cap;
      r = d / (*seg.lo - p);
    } else {
      if (!seg.hi || p <= *seg.hi) return cap;
      r = (-d) / (p - *seg.hi);
    }
  } else {
    sigma = seg.slope;
    if (d > 0) {
      if (!seg.hi) return cap;
      r = (*seg.hi - p) / d;
    } else {
      if (!seg.lo) return cap;
      r = (p - *seg.lo) / (-d);
    }
  }
  const long t = max_power_within(sigma, r, cap);
  return t >= cap ? cap : t + 1;
}

Rational affine_iterate(const AffineSegment& seg, const Rational& x, long steps) {
  if (seg.slope == 1) return x + seg.offset * steps;
  const Rational p = seg.offset / (1 - seg.slope);
  return p + pow_int(seg.slope, steps) * (x - p);
}

void affine_fixed_points(const AffineSegment& seg, const Rational& lo, const Rational& hi, bool circle,
                         std::vector<FixedPointEnclosure>& out) {
  const Rational dlo = seg.apply(lo) - lo;
  const Rational dhi = seg.apply(hi) - hi;
  Integer kmin = 0, kmax = 0;
  if (circle) {
    kmin = ceil_int(std::min(dlo, dhi));
    kmax = floor_int(std::max(dlo, dhi));
  }
  for (Integer k = kmin; k <= kmax; ++k) {
    const Rational shift(k);
    if (seg.slope == 1) {
      if (seg.offset == shift) out.push_back({{lo, hi}, FixedKind::Interval});
      continue;
    }
    const Rational p = (seg.offset - shift) / (1 - seg.slope);
    if (lo <= p && p <= hi) out.push_back({Enclosure::exact(p), FixedKind::Certified});
  }
}


AffineSegment affine_power(const AffineSegment& seg, long steps) {
  AffineSegment out;
  const Rational st = pow_int(seg.slope, steps);
  out.slope = st;
  out.offset = seg.slope == 1 ? Rational(seg.offset * steps) : Rational((seg.offset / (1 - seg.slope)) * (1 - st));
  out.lo = seg.lo;
  out.hi = seg.hi;
  if (steps > 1) {
    // Points whose (steps-1)-th iterate is still inside seg.
    AffineSegment prior;
    const Rational sp = pow_int(seg.slope, steps - 1);
    prior.slope = sp;
    prior.offset = seg.slope == 1 ? Rational(seg.offset * (steps - 1)) : Rational((seg.offset / (1 - seg.slope)) * (1 - sp));
    if (seg.lo) {
      const Rational bound = prior.unapply(*seg.lo);
      if (!out.lo || bound > *out.lo) out.lo = bound;
    }
    if (seg.hi) {
      const Rational bound = prior.unapply(*seg.hi);
      if (!out.hi || bound < *out.hi) out.hi = bound;
    }
  }
  return out;
}

std::optional<std::vector<FixedPointEnclosure>> PieceRule::fixed_points(const Rational& lo, const Rational& hi,
                                                                         const Rational&) const {
  auto segs = affine_segments(*this, lo, hi, 1 << 14);
  if (!segs) return std::nullopt;
  std::vector<FixedPointEnclosure> out;
  for (const auto& seg : *segs) affine_fixed_points(seg, *seg.lo, *seg.hi, false, out);
  return out;
}

namespace {

bool cover_segments(const PieceRule& rule, const Rational& lo, const Rational& hi, std::size_t max_segments,
                    std::vector<AffineSegment>& out) {
  if (!(lo < hi)) return true;
  if (out.size() >= max_segments) return false;
  const Rational mid = (lo + hi) / 2;
  auto seg = rule.affine_at(mid);
  if (!seg) return false;
  Rational slo = seg->lo && *seg->lo > lo ? *seg->lo : lo;
  Rational shi = seg->hi && *seg->hi < hi ? *seg->hi : hi;
  if (!cover_segments(rule, lo, slo, max_segments, out)) return false;
  if (slo < shi) {
    if (out.size() >= max_segments) return false;
    out.push_back({slo, shi, seg->slope, seg->offset});
  }
  return cover_segments(rule, shi, hi, max_segments, out);
}

}  // namespace

std::optional<std::vector<AffineSegment>> affine_segments(const PieceRule& rule, const Rational& lo,
                                                          const Rational& hi, std::size_t max_segments) {
  std::vector<AffineSegment> out;
  if (!cover_segments(rule, lo, hi, max_segments, out)) return std::nullopt;
  return out;
}

PiecewiseMap compose_affine(const PiecewiseMap& a, const PiecewiseMap& b) {
  if (!a.all_affine() || !b.all_affine())
    throw Error(Errc::NonAffineInput, "compose_affine needs affine pieces ('" + a.name() + "', '" + b.name() + "')");
  const bool circle = b.domain_kind() == DomainKind::Circle;
  std::vector<Piece> out;
  auto emit = [&](std::optional<Rational> lo, std::optional<Rational> hi, Rational slope, Rational offset) {
    if (lo && hi && !(*lo < *hi)) return;
    if (!out.empty()) {
      auto& last = std::get<AffineForm>(out.back().form);
      if (last.slope == slope && last.offset == offset) {
        out.back().hi = std::move(hi);
        return;
      }
    }
    out.push_back({std::move(lo), std::move(hi), AffineForm{std::move(slope), std::move(offset)}});
  };
  for (const Piece& bp : b.pieces()) {
    const auto& bf = std::get<AffineForm>(bp.form);
    const AffineSegment bseg{bp.lo, bp.hi, bf.slope, bf.offset};
    std::optional<Rational> img_lo, img_hi;
    if (bp.lo) img_lo = bseg.apply(*bp.lo);
    if (bp.hi) img_hi = bseg.apply(*bp.hi);
    Integer kmin = 0, kmax = 0;
    if (circle) {
      kmin = floor_int(*img_lo);
      kmax = ceil_int(*img_hi) - 1;
    }
    for (Integer k = kmin; k <= kmax; ++k) {
      const Rational shift(k);
      for (const Piece& ap : a.pieces()) {
        const auto& af = std::get<AffineForm>(ap.form);
        std::optional<Rational> alo, ahi;
        if (ap.lo) alo = *ap.lo + shift;
        if (ap.hi) ahi = *ap.hi + shift;
        std::optional<Rational> lo = img_lo, hi = img_hi;
        if (alo && (!lo || *alo > *lo)) lo = alo;
        if (ahi && (!hi || *ahi < *hi)) hi = ahi;
        if (lo && hi && *lo >= *hi) continue;
        std::optional<Rational> plo, phi;
        if (lo) plo = bseg.unapply(*lo);
        if (hi) phi = bseg.unapply(*hi);
        // a(y) = af.slope (y - k) + af.offset + k on the k-th shifted copy.
        emit(plo, phi, af.slope * bf.slope, af.slope * bf.offset + af.offset + shift - af.slope * shift);
      }
    }
  }
  PiecewiseMap composed(a.name() + "." + b.name(), b.domain_kind(), std::move(out));
  ensure_usable(composed);
  return composed;
}

}  // namespace circorb
