#include "circorb/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"
#include "circorb/rules.hpp"

namespace circorb {

namespace {

bool ternary_word(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '2'; });
}

Rational word_value(std::string_view w) {
  Rational v = 0;
  Rational unit(1, 3);
  for (char c : w) {
    if (c == '2') v += 2 * unit;
    unit /= 3;
  }
  return v;
}

// Value of the infinitely repeated period, as a number in [0, 1].
Rational periodic_value(std::string_view period) {
  const Rational once = word_value(period);
  const Rational scale = pow3(static_cast<long>(period.size()));
  return once * scale / (scale - 1);
}

// Shortest period p with period == p repeated.
std::string primitive_period(const std::string& period) {
  const std::size_t n = period.size();
  for (std::size_t len = 1; len <= n; ++len) {
    if (n % len != 0) continue;
    bool ok = true;
    for (std::size_t i = len; i < n && ok; ++i) ok = period[i] == period[i - len];
    if (ok) return period.substr(0, len);
  }
  return period;
}

}  // namespace

CantorAddress::CantorAddress(std::string prefix, TailKind tail, std::string period)
    : prefix_(std::move(prefix)), tail_(tail), period_(std::move(period)) {
  if (!ternary_word(prefix_) || !ternary_word(period_))
    throw Error(Errc::ParseError, "Cantor address digits must be 0 or 2");
  if (tail_ == TailKind::Periodic && period_.empty()) tail_ = TailKind::AllZeros;
  if (tail_ != TailKind::Periodic) period_.clear();
  canonicalize();
}

void CantorAddress::canonicalize() {
  if (tail_ == TailKind::Periodic) {
    period_ = primitive_period(period_);
    if (period_ == "0") {
      tail_ = TailKind::AllZeros;
      period_.clear();
    } else if (period_ == "2") {
      tail_ = TailKind::AllTwos;
      period_.clear();
    }
  }
  if (tail_ == TailKind::AllZeros) {
    while (!prefix_.empty() && prefix_.back() == '0') prefix_.pop_back();
  } else if (tail_ == TailKind::AllTwos) {
    while (!prefix_.empty() && prefix_.back() == '2') prefix_.pop_back();
  } else {
    // Roll the period backwards into the prefix while the last prefix digit matches.
    while (!prefix_.empty() && prefix_.back() == period_.back()) {
      prefix_.pop_back();
      std::rotate(period_.rbegin(), period_.rbegin() + 1, period_.rend());
    }
  }
}

CantorAddress CantorAddress::parse(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos) return {std::string(text), TailKind::AllZeros};
  if (text.back() != ')' || text.find('(', open + 1) != std::string_view::npos)
    throw Error(Errc::ParseError, "bad Cantor address '" + std::string(text) + "'");
  const std::string prefix(text.substr(0, open));
  const std::string period(text.substr(open + 1, text.size() - open - 2));
  if (!ternary_word(prefix) || !ternary_word(period))
    throw Error(Errc::ParseError, "bad Cantor address '" + std::string(text) + "'");
  return {prefix, TailKind::Periodic, period};
}

Rational CantorAddress::value() const {
  const Rational head = word_value(prefix_);
  const Rational scale = pow3(-static_cast<long>(prefix_.size()));
  switch (tail_) {
    case TailKind::AllZeros: return head;
    case TailKind::AllTwos: return head + scale;
    case TailKind::Periodic: return head + scale * periodic_value(period_);
  }
  return head;
}

std::string CantorAddress::str() const {
  switch (tail_) {
    case TailKind::AllZeros: return prefix_ + "(0)";
    case TailKind::AllTwos: return prefix_ + "(2)";
    case TailKind::Periodic: return prefix_ + "(" + period_ + ")";
  }
  return prefix_;
}

bool CantorAddress::is_left_endpoint() const { return tail_ == TailKind::AllTwos && !prefix_.empty(); }

std::strong_ordering CantorAddress::operator<=>(const CantorAddress& other) const {
  const Rational a = value(), b = other.value();
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational GapId::lo() const { return word_value(word) + pow3(-static_cast<long>(generation())); }
Rational GapId::hi() const { return word_value(word) + 2 * pow3(-static_cast<long>(generation())); }
CantorAddress GapId::left_endpoint() const { return {word + "0", TailKind::AllTwos}; }

Membership membership(const Rational& x, unsigned depth) {
  if (x < 0 || x > 1) throw Error(Errc::OutOfUnitInterval, to_string(x) + " is outside [0,1]");
  const Rational third(1, 3), two_thirds(2, 3);
  const std::size_t cap = std::max<std::size_t>(depth, 1u << 20);
  std::map<Rational, std::size_t> seen;
  std::string digits;
  Rational cur = x;
  while (digits.size() < cap) {
    if (auto it = seen.find(cur); it != seen.end()) {
      Membership m;
      m.kind = Membership::Kind::InC;
      m.address = CantorAddress(digits.substr(0, it->second), TailKind::Periodic, digits.substr(it->second));
      return m;
    }
    seen.emplace(cur, digits.size());
    if (cur > third && cur < two_thirds) {
      Membership m;
      m.kind = Membership::Kind::InGap;
      m.gap = GapId{digits};
      m.local = 3 * cur - 1;
      return m;
    }
    if (cur <= third) {
      digits.push_back('0');
      cur = 3 * cur;
    } else {
      digits.push_back('2');
      cur = 3 * cur - 2;
    }
  }
  return {};
}

// Enclosures are decided when they sit inside one gap, or when they are narrower
// than 3^-depth without ever leaving C's cylinders (then InC names the nearest
// cylinder, accurate to the enclosure width).
Membership membership(const Enclosure& x, unsigned depth) {
  if (x.is_exact()) return membership(x.lo, depth);
  if (x.lo < 0 || x.hi > 1) throw Error(Errc::OutOfUnitInterval, x.str() + " is outside [0,1]");
  const Rational third(1, 3), two_thirds(2, 3);
  const bool narrow = x.width() <= pow3(-static_cast<long>(depth));
  std::string digits;
  Rational lo = x.lo, hi = x.hi;
  for (unsigned level = 0; level < depth + 64; ++level) {
    if (lo > third && hi < two_thirds) {
      Membership m;
      m.kind = Membership::Kind::InGap;
      m.gap = GapId{digits};
      m.local = (x.mid() - m.gap.lo()) / m.gap.width();
      return m;
    }
    if (hi <= third) {
      digits.push_back('0');
      lo *= 3;
      hi *= 3;
    } else if (lo >= two_thirds) {
      digits.push_back('2');
      lo = 3 * lo - 2;
      hi = 3 * hi - 2;
    } else {
      break;
    }
  }
  if (!narrow) return {};
  Membership m;
  m.kind = Membership::Kind::InC;
  m.address = CantorAddress(digits, TailKind::AllZeros);
  return m;
}

Rational distance_to_cantor(const Rational& x) {
  if (x < 0) return -x;
  if (x > 1) return x - 1;
  const Membership m = membership(x);
  if (m.kind != Membership::Kind::InGap) return 0;
  return std::min(x - m.gap.lo(), m.gap.hi() - x);
}

CantorAddress left_endpoint(std::uint64_t rank) {
  if (rank == 0) throw Error(Errc::NotALeftEndpoint, "ranks start at 1");
  int top = 63;
  while (!((rank >> top) & 1u)) --top;
  std::string word;
  for (int b = top - 1; b >= 0; --b) word.push_back(((rank >> b) & 1u) ? '2' : '0');
  return {word + "0", TailKind::AllTwos};
}

Rational left_endpoint_value(std::uint64_t rank) { return left_endpoint(rank).value(); }

std::uint64_t left_endpoint_rank(const CantorAddress& address) {
  if (!address.is_left_endpoint())
    throw Error(Errc::NotALeftEndpoint, address.str() + " is not a left endpoint of a removed interval");
  const std::string& p = address.prefix();
  if (p.size() > 63) throw Error(Errc::NotALeftEndpoint, "left endpoint generation too deep for a 64-bit rank");
  std::uint64_t rank = 1;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) rank = (rank << 1) | (p[i] == '2' ? 1u : 0u);
  return rank;
}

std::uint64_t left_endpoint_rank(const GapId& gap) { return left_endpoint_rank(gap.left_endpoint()); }

GapId gap_of_rank(std::uint64_t rank) {
  const std::string p = left_endpoint(rank).prefix();
  return GapId{p.substr(0, p.size() - 1)};
}

namespace {

// Number of ordered rank pairs (a, b) with a + b = t and value(a) < value(b).
std::uint64_t pair_count(std::uint64_t t) {
  if (t < 3) return 0;
  return (t - 1 - (t % 2 == 0 ? 1 : 0)) / 2;
}

bool ordered_pair(std::uint64_t a, std::uint64_t b) {
  static std::mutex mutex;
  static std::map<std::uint64_t, Rational> cache;
  auto value = [&](std::uint64_t r) {
    const std::lock_guard lock(mutex);
    auto it = cache.find(r);
    if (it == cache.end()) it = cache.emplace(r, left_endpoint_value(r)).first;
    return it->second;
  };
  return value(a) < value(b);
}

std::uint64_t count_with_sum(std::uint64_t s) {
  std::uint64_t total = 0;
  for (std::uint64_t t = 3; t + 3 <= s; ++t) total += pair_count(t) * pair_count(s - t);
  return total;
}

// Tuples with sum s whose first two entries are (a, b).
std::uint64_t completions(std::uint64_t s, std::uint64_t a, std::uint64_t b) {
  if (a + b >= s || !ordered_pair(a, b)) return 0;
  return pair_count(s - a - b);
}

}  // namespace

QuadRanks quad_unrank_ranks(std::uint64_t n) {
  if (n == 0) throw Error(Errc::InvalidQuadruple, "quadruple index starts at 1");
  std::uint64_t s = 6;
  for (;; ++s) {
    const std::uint64_t c = count_with_sum(s);
    if (n <= c) break;
    n -= c;
  }
  for (std::uint64_t a = 1; a < s; ++a) {
    for (std::uint64_t b = 1; a + b < s; ++b) {
      const std::uint64_t c = completions(s, a, b);
      if (n > c) {
        n -= c;
        continue;
      }
      const std::uint64_t rest = s - a - b;
      for (std::uint64_t c3 = 1; c3 < rest; ++c3) {
        if (!ordered_pair(c3, rest - c3)) continue;
        if (--n == 0) return {a, b, c3, rest - c3};
      }
    }
  }
  throw Error(Errc::InvalidQuadruple, "enumeration overflow");
}

std::uint64_t quad_rank_ranks(const QuadRanks& r) {
  for (auto v : r)
    if (v == 0) throw Error(Errc::InvalidQuadruple, "ranks start at 1");
  if (!ordered_pair(r[0], r[1]) || !ordered_pair(r[2], r[3]))
    throw Error(Errc::InvalidQuadruple, "quadruple must satisfy p1 < p2 and p1* < p2*");
  const std::uint64_t s = r[0] + r[1] + r[2] + r[3];
  std::uint64_t n = 0;
  for (std::uint64_t t = 6; t < s; ++t) n += count_with_sum(t);
  for (std::uint64_t a = 1; a < r[0]; ++a)
    for (std::uint64_t b = 1; a + b < s; ++b) n += completions(s, a, b);
  for (std::uint64_t b = 1; b < r[1]; ++b) n += completions(s, r[0], b);
  const std::uint64_t rest = s - r[0] - r[1];
  for (std::uint64_t c3 = 1; c3 < r[2]; ++c3)
    if (ordered_pair(c3, rest - c3)) ++n;
  return n + 1;
}

QuadIndex quad_unrank(std::uint64_t n) {
  const QuadRanks r = quad_unrank_ranks(n);
  return {left_endpoint(r[0]), left_endpoint(r[1]), left_endpoint(r[2]), left_endpoint(r[3])};
}

std::uint64_t quad_rank(const QuadIndex& q) {
  return quad_rank_ranks({left_endpoint_rank(q.p1), left_endpoint_rank(q.p2), left_endpoint_rank(q.p1s),
                          left_endpoint_rank(q.p2s)});
}

PiecewiseMap build_g() {
  return PiecewiseMap("g", DomainKind::Interval01,
                      {Piece::affine(0, Rational(2, 9), 3, 0), Piece::affine(Rational(2, 9), Rational(1, 3), 1, Rational(4, 9)),
                       Piece::affine(Rational(1, 3), 1, Rational(1, 3), Rational(2, 3))});
}

PiecewiseMap build_f() {
  const Rational k1_lo(2, 3), k1_hi(7, 9), d1(8, 9);
  ConjugationSpec tail{build_g(), k1_lo, 1, std::make_shared<const QuadSplitFamily>(k1_lo, k1_hi, d1, 1),
                       k1_lo, Rational(1)};
  std::vector<Piece> pieces{
      Piece::affine(0, Rational(2, 27), 3, 0),
      Piece::affine(Rational(2, 27), Rational(1, 9), 1, Rational(4, 27)),
      Piece::affine(Rational(1, 9), Rational(2, 9), Rational(1, 3), Rational(2, 9)),
      Piece::affine(Rational(2, 9), Rational(7, 27), 1, Rational(2, 27)),
      Piece::affine(Rational(7, 27), Rational(8, 27), 9, Rational(-2, 1)),
      Piece::affine(Rational(8, 27), Rational(1, 3), 3, Rational(-2, 9)),
      Piece::affine(Rational(1, 3), Rational(2, 3), Rational(1, 3), Rational(2, 3)),
      Piece::with_rule(k1_lo, 1, std::make_shared<const ConjugationRule>(std::move(tail))),
  };
  return PiecewiseMap("f", DomainKind::Interval01, std::move(pieces));
}

std::string kn_region_name(KnRegion region) {
  switch (region) {
    case KnRegion::K: return "K";
    case KnRegion::J: return "J";
    case KnRegion::K0A: return "K0A";
    case KnRegion::JStar: return "J*";
    case KnRegion::K0B: return "K0B";
  }
  return "K";
}

Enclosure kn_block(long n) {
  if (n >= 1) return {1 - pow3(-n), 1 - 2 * pow3(-n - 1)};
  const Rational s = pow3(n);
  return {s * Rational(2, 9), s * Rational(1, 3)};
}

Enclosure jn_gap(long n) {
  if (n >= 1) return {1 - 2 * pow3(-n - 1), 1 - pow3(-n - 1)};
  const Rational s = pow3(n);
  return {s * Rational(1, 3), s * Rational(2, 3)};
}

namespace {

KnCoordinate k_type(KnRegion region, long n, const Enclosure& block, const Rational& x) {
  KnCoordinate c;
  c.region = region;
  c.n = n;
  c.local = (x - block.lo) / block.width();
  const Membership m = membership(c.local);
  if (m.kind == Membership::Kind::InC) c.position = m.address;
  return c;
}

KnCoordinate j_type(KnRegion region, long n, const Enclosure& gap, const Rational& x) {
  KnCoordinate c;
  c.region = region;
  c.n = n;
  c.local = (x - gap.lo) / gap.width();
  return c;
}

// n >= 1 with x in [1 - 3^-n, 1 - 3^-(n+1)).
long upper_index(const Rational& x) {
  const Rational u = 1 - x;
  long n = std::max(1L, static_cast<long>(std::floor(-approx_log2(u) / std::log2(3.0))));
  while (n > 1 && 1 - pow3(-n) > x) --n;
  while (1 - pow3(-n - 1) <= x) ++n;
  return n;
}

// n <= -1 with 3^-n x in [2/9, 2/3).
long lower_index(const Rational& x) {
  long n = std::min(-1L, -static_cast<long>(std::floor((std::log2(2.0 / 3.0) - approx_log2(x)) / std::log2(3.0))));
  while (n < -1 && pow3(-n) * x >= Rational(2, 3)) ++n;
  while (pow3(-n) * x < Rational(2, 9)) --n;
  return n;
}

}  // namespace

KnCoordinate kn_locate(const Rational& x) {
  if (x <= 0 || x >= 1) throw Error(Errc::OutOfDomain, "kn_locate needs 0 < x < 1");
  if (x >= Rational(2, 3)) {
    const long n = upper_index(x);
    const Enclosure k = kn_block(n);
    if (x <= k.hi) return k_type(KnRegion::K, n, k, x);
    return j_type(KnRegion::J, n, jn_gap(n), x);
  }
  if (x > Rational(1, 3)) return j_type(KnRegion::J, 0, jn_gap(0), x);
  if (x >= Rational(2, 9)) {
    if (x <= Rational(7, 27)) return k_type(KnRegion::K0A, 0, {Rational(2, 9), Rational(7, 27)}, x);
    if (x < Rational(8, 27)) return j_type(KnRegion::JStar, 0, {Rational(7, 27), Rational(8, 27)}, x);
    return k_type(KnRegion::K0B, 0, {Rational(8, 27), Rational(1, 3)}, x);
  }
  const long n = lower_index(x);
  const Enclosure k = kn_block(n);
  if (x <= k.hi) return k_type(KnRegion::K, n, k, x);
  return j_type(KnRegion::J, n, jn_gap(n), x);
}

BlockPosition block_position(const Rational& x) {
  if (x <= 0 || x >= 1) throw Error(Errc::OutOfDomain, "block_position needs 0 < x < 1");
  long n = 0;
  if (x >= Rational(2, 3)) n = upper_index(x);
  else if (x < Rational(2, 9)) n = lower_index(x);
  const Enclosure k = kn_block(n);
  if (x < k.lo || x > k.hi) throw Error(Errc::OutOfDomain, to_string(x) + " is not in the Cantor set");
  return {n, (x - k.lo) / k.width()};
}

}  // namespace circorb
