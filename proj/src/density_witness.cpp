#include <functional>

#include "circorb/cantor.hpp"
#include "circorb/error.hpp"
#include "circorb/rules.hpp"

namespace circorb {

namespace {

constexpr std::size_t kMaxGeneration = 62;

// Digit i (1-based) of a Cantor address.
char digit_at(const CantorAddress& a, std::size_t i) {
  const std::string& p = a.prefix();
  if (i <= p.size()) return p[i - 1];
  switch (a.tail()) {
    case TailKind::AllZeros: return '0';
    case TailKind::AllTwos: return '2';
    case TailKind::Periodic: return a.period()[(i - p.size() - 1) % a.period().size()];
  }
  return '0';
}

std::string leading_digits(const CantorAddress& a, std::size_t n) {
  std::string w;
  for (std::size_t i = 1; i <= n; ++i) w.push_back(digit_at(a, i));
  return w;
}

CantorAddress endpoint_after(const std::string& word) { return {word + "0", TailKind::AllTwos}; }

CantorAddress position_address(const Rational& p) {
  const Membership m = membership(p);
  if (m.kind != Membership::Kind::InC) throw Error(Errc::OutOfDomain, to_string(p) + " is not a Cantor position");
  return m.address;
}

// Nearest left endpoint of generation <= g strictly below p.
std::optional<CantorAddress> below(const CantorAddress& p, std::size_t g) {
  for (std::size_t i = g; i >= 1; --i)
    if (digit_at(p, i) == '2') return endpoint_after(leading_digits(p, i - 1));
  return std::nullopt;
}

// Nearest left endpoint of generation <= g strictly above p.
std::optional<CantorAddress> above(const CantorAddress& p, std::size_t g) {
  const Rational v = p.value();
  for (std::size_t i = g; i >= 1; --i) {
    if (digit_at(p, i) != '0') continue;
    CantorAddress e = endpoint_after(leading_digits(p, i - 1));
    if (e.value() > v) return e;
  }
  return std::nullopt;
}

// First point of C to the right of the gap that starts at e.
Rational gap_right(const CantorAddress& e) { return e.value() + pow3(-static_cast<long>(e.prefix().size())); }

MapWord power_of(const std::string& name, long k) { return k == 0 ? MapWord() : MapWord::letter(name, k); }

// Smallest N with pred(N), searching by doubling then bisection.
long least_power(const std::function<bool(long)>& pred) {
  long hi = 1;
  while (!pred(hi)) {
    if (hi > (1L << 40)) throw Error(Errc::BudgetExhausted, "terminal approach did not converge");
    hi *= 2;
  }
  long lo = hi / 2;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

DensityWitness density_witness_detail(const Rational& x, const Rational& y, const Rational& eps) {
  if (eps <= 0) throw Error(Errc::BadParams, "eps must be positive");
  if (x == 0 || x == 1) throw Error(Errc::TerminalEdgeInput, "x must not be 0 or 1");
  if (membership(x).kind != Membership::Kind::InC) throw Error(Errc::OutOfDomain, to_string(x) + " is not in C");
  if (membership(y).kind != Membership::Kind::InC) throw Error(Errc::OutOfDomain, to_string(y) + " is not in C");
  const PiecewiseMap g = build_g();
  DensityWitness out;
  if (y == 1) {
    const long n = least_power([&](long k) { return 1 - iterate_affine_map(g, k, x).value < eps; });
    out.word = power_of("g", n);
    return out;
  }
  if (y == 0) {
    const long n = least_power([&](long k) { return iterate_affine_map(g, -k, x).value < eps; });
    out.word = power_of("g", -n);
    return out;
  }
  const BlockPosition bx = block_position(x);
  const BlockPosition by = block_position(y);
  out.n = bx.n;
  out.m = by.n;

  // h1 carries x into K_1 with a position different from 0 and 1.
  MapWord h1 = power_of("g", -bx.n);
  Rational px = bx.position;
  if (bx.position == 1) {
    h1 = h1.then(MapWord::letter("f", -1)).then(MapWord::letter("g"));
    px = Rational(1, 3);
  } else if (bx.position == 0) {
    h1 = h1.then(MapWord::letter("f")).then(MapWord::letter("g"));
    px = Rational(2, 3);
  } else {
    h1 = power_of("g", 1 - bx.n);
  }

  const CantorAddress qx = position_address(px);
  std::optional<CantorAddress> xm, xp;
  for (std::size_t gen = 1; gen <= kMaxGeneration && !(xm && xp); ++gen) {
    xm = below(qx, gen);
    xp = above(qx, gen);
  }
  if (!xm || !xp) throw Error(Errc::BudgetExhausted, "no brackets for the position of h1(x)");

  const Rational block = kn_block(by.n).width();
  const Rational pm = by.position;
  CantorAddress ym, yp;
  bool found = false;
  if (pm == 1) {
    for (std::size_t gen = 1; gen <= kMaxGeneration && !found; ++gen) {
      if (2 * pow3(-static_cast<long>(gen)) * block >= eps) continue;
      ym = endpoint_after(std::string(gen - 1, '2'));
      yp = endpoint_after(std::string(gen, '2'));
      found = true;
    }
  } else if (pm == 0) {
    for (std::size_t gen = 1; gen <= kMaxGeneration && !found; ++gen) {
      if (pow3(-static_cast<long>(gen)) * block >= eps) continue;
      yp = endpoint_after(std::string(gen - 1, '0'));
      ym = endpoint_after(std::string(gen, '0'));
      found = true;
    }
  } else {
    // h(x) lands in C strictly between the brackets, so it suffices that the
    // first C point above ym and ym's partner yp both lie within eps of y.
    const CantorAddress qy = position_address(pm);
    for (std::size_t gen = 1; gen <= kMaxGeneration && !found; ++gen) {
      auto lo = below(qy, gen);
      std::optional<CantorAddress> hi;
      if (qy.is_left_endpoint() && qy.prefix().size() <= gen) hi = qy;
      else hi = above(qy, gen);
      if (!lo || !hi) continue;
      if ((pm - gap_right(*lo)) * block >= eps || (hi->value() - pm) * block >= eps) continue;
      ym = *lo;
      yp = *hi;
      found = true;
    }
  }
  if (!found) throw Error(Errc::BudgetExhausted, "no brackets for y within eps at 64-bit rank depth");

  out.brackets = {left_endpoint_rank(*xm), left_endpoint_rank(*xp), left_endpoint_rank(ym), left_endpoint_rank(yp)};
  out.r = quad_rank_ranks(out.brackets);
  const long r = static_cast<long>(out.r);
  out.word = h1.then(power_of("g", r - 1)).then(MapWord::letter("f")).then(power_of("g", by.n - r - 1));
  return out;
}

MapWord density_witness(const Rational& x, const Rational& y, const Rational& eps) {
  return density_witness_detail(x, y, eps).word;
}

MapWord density_witness(const CantorAddress& x, const CantorAddress& y, const Rational& eps) {
  return density_witness(x.value(), y.value(), eps);
}

}  // namespace circorb
