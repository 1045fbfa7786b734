#include "circorb/catalog.hpp"

#include <set>

#include "circorb/cantor.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"
#include "circorb/rules.hpp"

namespace circorb {

namespace {

class Params {
 public:
  Params(const ExampleSpec& spec, std::set<std::string> known) : spec_(spec) {
    for (const auto& [k, v] : spec.params)
      if (!known.count(k)) throw Error(Errc::BadParams, "example '" + spec.name + "' has no parameter '" + k + "'");
  }

  Rational rational(const std::string& key, const Rational& fallback) const {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) return fallback;
    try {
      return parse_rational(it->second);
    } catch (const Error&) {
      throw Error(Errc::BadParams, "parameter '" + key + "' is not a rational: " + it->second);
    }
  }

  long integer(const std::string& key, long fallback, long lo, long hi) const {
    const Rational q = rational(key, Rational(fallback));
    if (q.get_den() != 1 || q < lo || q > hi)
      throw Error(Errc::BadParams, "parameter '" + key + "' must be an integer in [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]");
    return q.get_num().get_si();
  }

 private:
  const ExampleSpec& spec_;
};

PiecewiseMap from_segments(const std::string& name, const std::vector<AffineSegment>& segs) {
  std::vector<Piece> pieces;
  for (const auto& s : segs) pieces.push_back(Piece::affine(*s.lo, *s.hi, s.slope, s.offset));
  return PiecewiseMap(name, DomainKind::Interval01, std::move(pieces));
}

AffineSegment chart(const Rational& x0, const Rational& x1, const Rational& y0, const Rational& y1) {
  const Rational slope = (y1 - y0) / (x1 - x0);
  return {x0, x1, slope, y0 - slope * x0};
}

// Two affine pieces on [a, b] fixing the ends and sending p to q.
std::vector<AffineSegment> two_piece(const Rational& a, const Rational& b, const Rational& p, const Rational& q) {
  if (p == q) return {chart(a, b, a, b)};
  return {chart(a, p, a, q), chart(p, b, q, b)};
}

RulePtr constant_family_rule(const PiecewiseMap& phi, const Rational& d0, int shift, RulePtr psi,
                             std::optional<Rational> lo, std::optional<Rational> hi) {
  ConjugationSpec spec{phi, d0, shift, std::make_shared<const ListFamily>(0, std::vector<RulePtr>{}, std::move(psi)),
                       std::move(lo), std::move(hi)};
  return std::make_shared<const ConjugationRule>(std::move(spec));
}

GeneratorSystem interval_system(std::string name, std::vector<PiecewiseMap> gens) {
  GeneratorSystem s;
  s.name = std::move(name);
  s.domain = DomainKind::Interval01;
  s.generators = std::move(gens);
  return s;
}

PiecewiseMap power_map(const std::string& name, const Rational& e) {
  return PiecewiseMap(name, DomainKind::Interval01, {Piece::power(0, 1, PowerForm{1, 0, 0, e, 1})});
}

GeneratorSystem case1(const ExampleSpec& spec) {
  Params p(spec, {});
  GeneratorSystem s = interval_system("case1-dense", {power_map("f", Rational(1, 3)), power_map("g", 2)});
  s.designated = {{"x", Rational(1, 2)}};
  s.ladder = {"x"};
  return s;
}

GeneratorSystem case2(const ExampleSpec& spec) {
  Params p(spec, {"exponent"});
  const Rational e = p.rational("exponent", 2);
  if (e <= 0 || e == 1) throw Error(Errc::BadParams, "exponent must be positive and different from 1");
  GeneratorSystem s = interval_system("case2-single", {power_map("g", e)});
  s.designated = {{"x", Rational(1, 2)}};
  s.ladder = {"x"};
  return s;
}

GeneratorSystem cantor_ex1(const ExampleSpec& spec) {
  Params p(spec, {"N"});
  const long n = p.integer("N", 6, 1, 24);
  std::vector<PiecewiseMap> gens;
  for (long k = 0; k < n; ++k) {
    SplitHomeoSpec h;
    h.pins = {{left_endpoint(static_cast<std::uint64_t>(k + 1)), left_endpoint(static_cast<std::uint64_t>(k + 2))}};
    gens.push_back(build_split_homeo(h, "f" + std::to_string(k)));
  }
  GeneratorSystem s = interval_system("cantor-ex1", std::move(gens));
  s.designated = {{"x0", left_endpoint_value(1)}};
  s.ladder = {"x0"};
  return s;
}

GeneratorSystem cantor_ex2(const ExampleSpec& spec) {
  Params p(spec, {});
  GeneratorSystem s = interval_system("cantor-ex2", {build_g(), build_f()});
  s.designated = {{"x", Rational(1, 4)}};
  s.ladder = {"x"};
  return s;
}

const Rational kZ0(1, 2);

GeneratorSystem level2_integer(const ExampleSpec& spec) {
  Params p(spec, {});
  const PiecewiseMap g = base_map("g");
  const Rational z1 = eval(g, kZ0, pow2(-60)).lo;
  RulePtr f0 = make_segment_rule(rescaled_base(kZ0, z1));
  const PiecewiseMap f("f", DomainKind::Interval01,
                       {Piece::with_rule(0, 1, constant_family_rule(g, kZ0, 0, f0, Rational(0), Rational(1)))});
  GeneratorSystem s = interval_system("level2-integer", {g, f});
  s.designated = {{"z0", kZ0}, {"x0", (kZ0 + z1) / 2}};
  s.ladder = {"z0", "x0"};
  return s;
}

GeneratorSystem level2_dense(const ExampleSpec& spec) {
  Params p(spec, {"chain"});
  const long chain = p.integer("chain", 32, 1, 256);
  const PiecewiseMap g = base_map("g");
  const Rational a = kZ0, b = eval(g, kZ0, pow2(-60)).lo, len = b - a;

  // Dyadic points of I_0 level by level: 1/2, 1/4, 3/4, 1/8, 3/8, ...
  std::vector<Rational> xs;
  for (long d = 1; static_cast<long>(xs.size()) <= chain + 1; ++d)
    for (long i = 1; i < (1L << d); i += 2) xs.push_back(a + len * Rational(i) * pow2(-d));
  const Rational x0 = xs.front();

  std::vector<RulePtr> psi;
  std::vector<std::vector<AffineSegment>> applied;
  for (long n = 0; n < chain; ++n) {
    Rational v = xs[static_cast<std::size_t>(n + 1)];
    for (const auto& segs : applied)
      for (const auto& s : segs)
        if (s.contains(v)) {
          v = s.apply(v);
          break;
        }
    auto segs = two_piece(a, b, v, x0);
    psi.push_back(make_segment_rule(segs));
    applied.push_back(std::move(segs));
  }
  ConjugationSpec cs{g, a, 1, std::make_shared<const ListFamily>(0, std::move(psi)), Rational(0), Rational(1)};
  const PiecewiseMap f("f", DomainKind::Interval01,
                       {Piece::with_rule(0, 1, std::make_shared<const ConjugationRule>(std::move(cs)))});
  GeneratorSystem s = interval_system("level2-dense", {g, f});
  s.designated = {{"z0", kZ0}, {"x0", x0}};
  s.ladder = {"z0", "x0"};
  s.notes.push_back("f agrees with g on the cells I_n for n < 0 and for n >= " + std::to_string(chain));
  return s;
}

GeneratorSystem level2_cantor(const ExampleSpec& spec) {
  Params p(spec, {"chain"});
  const long chain = p.integer("chain", 16, 1, 64);
  const PiecewiseMap g("g", DomainKind::Line, {Piece{std::nullopt, std::nullopt, AffineForm{1, 1}}});
  const CantorAddress x0 = left_endpoint(1);

  std::vector<RulePtr> psi;
  std::vector<std::vector<AffineSegment>> applied;
  for (long n = 0; n < chain; ++n) {
    Rational v = left_endpoint_value(static_cast<std::uint64_t>(n + 2));
    for (const auto& segs : applied)
      for (const auto& s : segs)
        if (s.contains(v)) {
          v = s.apply(v);
          break;
        }
    SplitHomeoSpec h;
    const CantorAddress va = membership(v).address;
    if (!(va == x0)) h.pins = {{va, x0}};
    psi.push_back(make_split_rule(h));
    applied.push_back(split_homeo_segments(h));
  }
  ConjugationSpec cs{g, Rational(0), 1, std::make_shared<const ListFamily>(0, std::move(psi)), std::nullopt,
                     std::nullopt};
  const PiecewiseMap f("f", DomainKind::Line,
                       {Piece{std::nullopt, std::nullopt, RulePtr(std::make_shared<const ConjugationRule>(std::move(cs)))}});
  GeneratorSystem s;
  s.name = "level2-cantor";
  s.domain = DomainKind::Line;
  s.generators = {g, f};
  s.designated = {{"z0", Rational(0)}, {"x0", x0.value()}};
  s.ladder = {"z0", "x0"};
  s.notes.push_back("f agrees with g on [n, n+1] for n < 0 and for n >= " + std::to_string(chain));
  return s;
}

// The rule of f_k on A_j: the rescaled base map on A_{k-1}, spread over the
// cells of each enclosing level by conjugation.
RulePtr tower_rule(const std::vector<std::pair<Rational, Rational>>& a, int j, int k) {
  const auto& [lo, hi] = a[static_cast<std::size_t>(j)];
  if (j == k - 1) return make_segment_rule(rescaled_base(lo, hi));
  const PiecewiseMap phi = j == 0 ? base_map("phi") : rescaled_base_map(lo, hi, "phi");
  return constant_family_rule(phi, a[static_cast<std::size_t>(j + 1)].first, 0, tower_rule(a, j + 1, k), lo, hi);
}

GeneratorSystem level_n(const ExampleSpec& spec) {
  Params p(spec, {"n"});
  const int n = static_cast<int>(p.integer("n", 3, 1, 5));
  auto a = nested_intervals(n);
  a.insert(a.begin(), {Rational(0), Rational(1)});
  std::vector<PiecewiseMap> gens{base_map("f1")};
  for (int k = 2; k <= n; ++k)
    gens.emplace_back("f" + std::to_string(k), DomainKind::Interval01,
                      std::vector<Piece>{Piece::with_rule(0, 1, tower_rule(a, 0, k))});
  GeneratorSystem s = interval_system("level-n", std::move(gens));
  std::string name = "z0";
  for (int k = 1; k <= n; ++k) {
    s.designated.push_back({name, a[static_cast<std::size_t>(k)].first});
    s.ladder.push_back(name);
    name += k == 1 ? "^0" : "0";
  }
  return s;
}

GeneratorSystem parallel_pair(const ExampleSpec& spec) {
  Params p(spec, {"y"});
  const PiecewiseMap g = base_map("g");
  const Rational a = kZ0, b = eval(g, kZ0, pow2(-60)).lo;
  const Rational y = p.rational("y", (a + b) / 2);
  if (!(a < y && y < b)) throw Error(Errc::BadParams, "marker y must lie inside I_0");
  // Identity below y; above y a two-piece map of [y, b] pushing its midpoint down.
  std::vector<AffineSegment> psi{chart(a, y, a, y)};
  const Rational m = (y + b) / 2;
  for (auto s : two_piece(y, b, m, (y + m) / 2)) psi.push_back(s);
  const PiecewiseMap f("f", DomainKind::Interval01,
                       {Piece::with_rule(0, 1, constant_family_rule(g, a, 1, make_segment_rule(psi), Rational(0),
                                                                    Rational(1)))});
  GeneratorSystem s = interval_system("parallel-pair", {g, f});
  s.designated = {{"z0", a}, {"y", y}, {"probe", (a + y) / 2}, {"x0", (y + b) / 2}};
  s.ladder = {"z0"};
  return s;
}

GeneratorSystem semigroup(const ExampleSpec& spec) {
  Params p(spec, {"x1", "a0", "a1", "a2", "a3", "x2"});
  const Rational x1 = p.rational("x1", Rational(1, 8)), a0 = p.rational("a0", Rational(1, 4)),
                 a1 = p.rational("a1", Rational(3, 8)), a2 = p.rational("a2", Rational(1, 2)),
                 a3 = p.rational("a3", Rational(5, 8)), x2 = p.rational("x2", Rational(3, 4));
  if (!(0 < x1 && x1 < a0 && a0 < a1 && a1 < a2 && a2 < a3 && a3 < x2 && x2 < 1))
    throw Error(Errc::BadParams, "need 0 < x1 < a0 < a1 < a2 < a3 < x2 < 1");
  const Rational r = a1 - a0;
  if (a2 - a1 != r || a3 - a2 != r) throw Error(Errc::BadParams, "a0..a3 must be evenly spaced");
  const bool printed = spec.as_printed;
  const auto I = DomainKind::Interval01;
  auto line = [](const Rational& slope, const Rational& x0, const Rational& y0) {
    return AffineForm{slope, y0 - slope * x0};
  };
  auto aff = [](const Rational& lo, const Rational& hi, AffineForm f) { return Piece::affine(lo, hi, f.slope, f.offset); };

  const PiecewiseMap h1("h1", I,
                        {aff(0, a2, line(a1 / a2, a2, a1)), aff(a2, a3, line(1, a2, a1)),
                         aff(a3, 1, line((1 - a2) / (1 - a3), a3, a2))});
  const Piece h2_first = printed ? aff(0, a0, line((a1 - a0) / a0, a0, a1)) : aff(0, a0, line(a1 / a0, 0, 0));
  const PiecewiseMap h2("h2", I,
                        {h2_first, aff(a0, a1, line(1, a0, a1)), aff(a1, 1, line((1 - a2) / (1 - a1), a1, a2))});
  const PiecewiseMap f("f", I,
                       {Piece::power(0, x1, PowerForm{x1, 0, 0, 2, x1}),
                        aff(x1, a1, line((a2 - x1) / (a1 - x1), x1, x1)),
                        Piece::power(a1, a2, PowerForm{r, a1, a1 + r, Rational(1, 3), r}),
                        aff(a2, 1, line((1 - a3) / (1 - a2), 1, 1))});
  const Piece g_third =
      printed ? aff(a2, x2, line((1 - x2 - a1) / (1 - a2), x2, x2)) : aff(a2, x2, line((x2 - a1) / (x2 - a2), x2, x2));
  const Piece g_fourth = printed ? Piece::power(x2, 1, PowerForm{1 - x2, 0, x2, Rational(1, 3), 1 - x2})
                                 : Piece::power(x2, 1, PowerForm{1 - x2, x2, x2, Rational(1, 3), 1 - x2});
  const PiecewiseMap g("g", I,
                       {aff(0, a1, line(a0 / a1, 0, 0)), Piece::power(a1, a2, PowerForm{r, a1, a0, 2, r}), g_third,
                        g_fourth});

  GeneratorSystem s = interval_system(printed ? "semigroup-as-printed" : "semigroup", {f, g, h1, h2});
  s.invertible = false;
  s.designated = {{"x1", x1}, {"a0", a0}, {"a1", a1}, {"a2", a2}, {"a3", a3}, {"x2", x2}, {"mid", (a1 + a2) / 2}};
  if (printed) {
    s.notes.push_back("as printed: h2 misses 0, g jumps at a2 and does not fix x2");
  } else {
    s.notes.push_back("repair: h2 on [0,a0] is (a1/a0)x so that h2(0) = 0");
    s.notes.push_back("repair: g on [a2,x2] is the line through (a2,a1) and (x2,x2)");
    s.notes.push_back("repair: g on [x2,1] is (1-x2)((x-x2)/(1-x2))^(1/3) + x2 so that g(x2) = x2");
  }
  s.notes.push_back("f_hat = h1 after f and g_hat = h2 after g preserve [a1,a2]");
  return s;
}

GeneratorSystem circle_swap(const ExampleSpec& spec) {
  Params p(spec, {});
  GeneratorSystem s;
  s.name = "circle-swap";
  s.domain = DomainKind::Circle;
  s.generators = {
      PiecewiseMap("rot", DomainKind::Circle, {Piece::affine(0, 1, 1, Rational(1, 2))}),
      PiecewiseMap("f", DomainKind::Circle,
                   {Piece::affine(0, Rational(1, 4), Rational(1, 2), 0),
                    Piece::affine(Rational(1, 4), Rational(1, 2), Rational(3, 2), Rational(-1, 4)),
                    Piece::affine(Rational(1, 2), 1, 1, 0)}),
  };
  s.finite_orbit_points = {Rational(0), Rational(1, 2)};
  s.designated = {{"x", Rational(1, 8)}};
  return s;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"case1-dense",   "case2-single",  "cantor-ex1", "cantor-ex2",
                                              "level2-integer", "level2-dense", "level2-cantor", "level-n",
                                              "parallel-pair", "semigroup",     "circle-swap"};
  return names;
}

GeneratorSystem build_example(const ExampleSpec& spec) {
  if (spec.as_printed && spec.name != "semigroup")
    throw Error(Errc::BadParams, "--as-printed applies to the semigroup example only");
  if (spec.name == "case1-dense") return case1(spec);
  if (spec.name == "case2-single") return case2(spec);
  if (spec.name == "cantor-ex1") return cantor_ex1(spec);
  if (spec.name == "cantor-ex2") return cantor_ex2(spec);
  if (spec.name == "level2-integer") return level2_integer(spec);
  if (spec.name == "level2-dense") return level2_dense(spec);
  if (spec.name == "level2-cantor") return level2_cantor(spec);
  if (spec.name == "level-n") return level_n(spec);
  if (spec.name == "parallel-pair") return parallel_pair(spec);
  if (spec.name == "semigroup") return semigroup(spec);
  if (spec.name == "circle-swap") return circle_swap(spec);
  throw Error(Errc::UnknownName, "no catalog example named '" + spec.name + "'");
}

GeneratorSystem build_example(const std::string& name) { return build_example(ExampleSpec{name, {}, false}); }

PiecewiseMap base_map(const std::string& name) {
  return PiecewiseMap(name, DomainKind::Interval01,
                      {Piece::affine(0, Rational(1, 4), 2, 0), Piece::affine(Rational(1, 4), 1, Rational(2, 3), Rational(1, 3))});
}

std::vector<AffineSegment> rescaled_base(const Rational& a, const Rational& b) {
  const Rational len = b - a;
  const Rational q = a + len / 4, qv = a + len / 2;
  return {chart(a, q, a, qv), chart(q, b, qv, b)};
}

PiecewiseMap rescaled_base_map(const Rational& a, const Rational& b, const std::string& name) {
  std::vector<AffineSegment> segs;
  if (a > 0) segs.push_back(chart(0, a, 0, a));
  for (const auto& s : rescaled_base(a, b)) segs.push_back(s);
  if (b < 1) segs.push_back(chart(b, 1, b, 1));
  return from_segments(name, segs);
}

std::vector<std::pair<Rational, Rational>> nested_intervals(int depth) {
  std::vector<std::pair<Rational, Rational>> out;
  Rational lo(0), hi(1);
  for (int k = 1; k <= depth; ++k) {
    const Rational z = (lo + hi) / 2;
    // The rescaled base map sends the midpoint to lo + (2/3)(hi - lo).
    const Rational image = lo + (hi - lo) * Rational(2, 3);
    out.emplace_back(z, image);
    lo = z;
    hi = image;
  }
  return out;
}

}  // namespace circorb
