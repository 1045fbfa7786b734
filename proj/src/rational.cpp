#include "circorb/rational.hpp"

#include <cctype>
#include <cmath>

#include "circorb/error.hpp"

namespace circorb {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::OverlappingPieces: return "OverlappingPieces";
    case Errc::GapInDomain: return "GapInDomain";
    case Errc::NonMonotonePiece: return "NonMonotonePiece";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::InverseOfEndomorphism: return "InverseOfEndomorphism";
    case Errc::NotInImage: return "NotInImage";
    case Errc::NonAffineInput: return "NonAffineInput";
    case Errc::PrecisionCollapse: return "PrecisionCollapse";
    case Errc::OutOfUnitInterval: return "OutOfUnitInterval";
    case Errc::NotALeftEndpoint: return "NotALeftEndpoint";
    case Errc::InvalidQuadruple: return "InvalidQuadruple";
    case Errc::PinOrderMismatch: return "PinOrderMismatch";
    case Errc::TerminalEdgeInput: return "TerminalEdgeInput";
    case Errc::PNotInvariant: return "PNotInvariant";
    case Errc::NeitherConditionVerified: return "NeitherConditionVerified";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::BaseInP: return "BaseInP";
    case Errc::LadderPointCoincidesWithX: return "LadderPointCoincidesWithX";
    case Errc::XOnReferenceOrbit: return "XOnReferenceOrbit";
    case Errc::UnknownName: return "UnknownName";
    case Errc::BadParams: return "BadParams";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  std::string_view body = s;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational out;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw Error(Errc::ParseError, "bad rational '" + std::string(text) + "'");
    Integer n(std::string(num), 10), d(std::string(den), 10);
    if (d == 0) throw Error(Errc::ParseError, "zero denominator in '" + std::string(text) + "'");
    out = Rational(n, d);
    out.canonicalize();
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw Error(Errc::ParseError, "bad decimal '" + std::string(text) + "'");
    Integer n(std::string(whole) + std::string(frac), 10);
    Integer d;
    mpz_ui_pow_ui(d.get_mpz_t(), 10, frac.size());
    out = Rational(n, d);
    out.canonicalize();
  } else {
    if (!all_digits(body)) throw Error(Errc::ParseError, "bad rational '" + std::string(text) + "'");
    out = Rational(Integer(std::string(body), 10));
  }
  return negative ? Rational(-out) : out;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

double to_double(const Rational& q) {
  if (q == 0) return 0.0;
  double l = approx_log2(q);
  if (l < -1000.0) return 0.0;
  return q.get_d();
}

std::size_t bit_size(const Rational& q) {
  return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
}

double approx_log2(const Rational& q) {
  if (q == 0) return -INFINITY;
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log2(std::fabs(mn)) - std::log2(md) + static_cast<double>(en - ed);
}

Integer floor_int(const Rational& q) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

Integer ceil_int(const Rational& q) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

Rational floor_dyadic(const Rational& q, long bits) {
  Rational scaled = q;
  if (bits >= 0) mpq_mul_2exp(scaled.get_mpq_t(), q.get_mpq_t(), bits);
  else mpq_div_2exp(scaled.get_mpq_t(), q.get_mpq_t(), -bits);
  Rational out(floor_int(scaled));
  return out * pow2(-bits);
}

Rational ceil_dyadic(const Rational& q, long bits) {
  Rational scaled = q;
  if (bits >= 0) mpq_mul_2exp(scaled.get_mpq_t(), q.get_mpq_t(), bits);
  else mpq_div_2exp(scaled.get_mpq_t(), q.get_mpq_t(), -bits);
  Rational out(ceil_int(scaled));
  return out * pow2(-bits);
}

long bits_for(const Rational& eps) {
  long k = std::max(0L, static_cast<long>(std::ceil(-approx_log2(eps))) - 1);
  while (pow2(-k) > eps) ++k;
  return k;
}

Rational make_rational(long num, long den) {
  if (den == 0) throw Error(Errc::BadParams, "zero denominator");
  Rational out(num, den);
  out.canonicalize();
  return out;
}

Rational pow_int(const Rational& base, long exponent) {
  if (exponent == 0) return Rational(1);
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Integer n, d;
  mpz_pow_ui(n.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(d.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational out = exponent > 0 ? Rational(n, d) : Rational(d, n);
  out.canonicalize();
  return out;
}

Rational pow2(long exponent) {
  Rational out(1);
  if (exponent >= 0) mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), exponent);
  else mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), -exponent);
  return out;
}

Rational pow3(long exponent) { return pow_int(Rational(3), exponent); }

RootResult int_root(const Integer& value, unsigned long degree) {
  RootResult out;
  if (degree == 1) {
    out.root = value;
    out.exact = true;
    return out;
  }
  out.exact = mpz_root(out.root.get_mpz_t(), value.get_mpz_t(), degree) != 0;
  return out;
}

}  // namespace circorb
