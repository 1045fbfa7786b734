#include <doctest.h>

#include <cmath>

#include "circorb/cantor.hpp"
#include "circorb/catalog.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

using namespace circorb;

namespace {

const Rational kPrec = pow2(-60);

PiecewiseMap identity_map() { return PiecewiseMap("id", DomainKind::Interval01, {Piece::affine(0, 1, 1, 0)}); }

Rational exact_value(const PiecewiseMap& m, const Rational& x) {
  const Enclosure e = eval(m, x, kPrec);
  REQUIRE(e.is_exact());
  return e.lo;
}

GeneratorSystem system_of(const PiecewiseMap& m) {
  GeneratorSystem s;
  s.name = "one";
  s.generators = {m};
  return s;
}

}  // namespace

TEST_CASE("validation of the three-piece Cantor map") {
  const PiecewiseMap g = build_g();
  const ValidationReport r = validate_map(g);
  CHECK(r.usable);
  CHECK(r.surjective);
  CHECK(r.continuous);
  CHECK(r.monotone);
  CHECK(r.fixes_zero);
  CHECK(r.fixes_one);
  // Breakpoints at 2/9 and 1/3 meet exactly.
  std::size_t seen = 0;
  for (const auto& b : r.breakpoints) {
    if (b.at == make_rational(2, 9)) {
      ++seen;
      CHECK(b.left_value == Enclosure::exact(make_rational(2, 3)));
      CHECK(b.continuous);
    }
    if (b.at == make_rational(1, 3)) {
      ++seen;
      CHECK(b.continuous);
    }
  }
  CHECK(seen == 2);
}

TEST_CASE("identity validates as an automorphism") {
  const ValidationReport r = validate_map(identity_map());
  CHECK(r.usable);
  CHECK(r.surjective);
}

TEST_CASE("printed h2 is a usable endomorphism that misses 0") {
  const GeneratorSystem printed = build_example(ExampleSpec{"semigroup", {}, true});
  const PiecewiseMap& h2 = printed.generator("h2");
  const ValidationReport r = validate_map(h2);
  CHECK(r.usable);
  CHECK_FALSE(r.surjective);
  CHECK_FALSE(r.fixes_zero);
  CHECK(exact_value(h2, 0) == printed.point("a0"));
  // The printed g jumps at a2.
  CHECK_FALSE(validate_map(printed.generator("g")).usable);
}

TEST_CASE("tiling defects are rejected at construction") {
  CHECK_THROWS_AS(PiecewiseMap("gap", DomainKind::Interval01, {Piece::affine(0, make_rational(1, 2), 1, 0)}), Error);
  CHECK_THROWS_AS(PiecewiseMap("overlap", DomainKind::Interval01,
                               {Piece::affine(0, make_rational(2, 3), 1, 0), Piece::affine(make_rational(1, 3), 1, 1, 0)}),
                  Error);
  const PiecewiseMap down("down", DomainKind::Interval01, {Piece::affine(0, 1, -1, 1)});
  CHECK_FALSE(validate_map(down).usable);
  CHECK_THROWS_AS(ensure_usable(down), Error);
}

TEST_CASE("exact evaluation of affine pieces") {
  const PiecewiseMap g = build_g();
  CHECK(exact_value(g, make_rational(2, 9)) == make_rational(2, 3));
  CHECK(exact_value(g, make_rational(1, 2)) == make_rational(5, 6));
  const GeneratorSystem c1 = build_example("case1-dense");
  CHECK(exact_value(c1.generator("g"), make_rational(1, 2)) == make_rational(1, 4));
}

TEST_CASE("cube root enclosure is tight and sound") {
  const GeneratorSystem c1 = build_example("case1-dense");
  const Rational prec = make_rational(1, 1000000000000L);
  const Enclosure e = eval(c1.generator("f"), make_rational(1, 2), prec);
  CHECK(e.width() <= prec);
  // lo^3 <= 1/2 <= hi^3, checked with exact rationals.
  CHECK(e.lo * e.lo * e.lo <= make_rational(1, 2));
  CHECK(e.hi * e.hi * e.hi >= make_rational(1, 2));
  CHECK(e.mid_double() == doctest::Approx(0.7937005259840998).epsilon(1e-12));
}

TEST_CASE("word evaluation") {
  const GeneratorSystem s = system_of(build_g());
  CHECK(eval_word(s, MapWord(), make_rational(1, 3), kPrec) == Enclosure::exact(make_rational(1, 3)));
  CHECK(eval_word(s, MapWord::parse("g g"), make_rational(2, 9), kPrec) == Enclosure::exact(make_rational(8, 9)));
  CHECK(eval_word(s, MapWord::parse("g^-1"), make_rational(2, 3), kPrec) == Enclosure::exact(make_rational(2, 9)));
  CHECK_THROWS_AS(eval_word(s, MapWord::parse("h"), make_rational(1, 2), kPrec), Error);
}

TEST_CASE("inverse points") {
  CHECK(invert_point(build_g(), make_rational(7, 9), kPrec) == Enclosure::exact(make_rational(1, 3)));
  CHECK(invert_point(identity_map(), parse_rational("0.42"), kPrec) == Enclosure::exact(make_rational(21, 50)));
  const GeneratorSystem semi = build_example("semigroup");
  CHECK(invert_point(semi.generator("h2"), make_rational(1, 8), kPrec) == Enclosure::exact(make_rational(1, 12)));
  const GeneratorSystem printed = build_example(ExampleSpec{"semigroup", {}, true});
  CHECK_THROWS_AS(invert_point(printed.generator("h2"), make_rational(1, 100), kPrec), Error);
}

TEST_CASE("round trips through power pieces stay within precision") {
  const GeneratorSystem semi = build_example("semigroup");
  const Rational prec = pow2(-50);
  for (const char* name : {"f", "g"}) {
    const PiecewiseMap& m = semi.generator(name);
    for (int k = 0; k <= 200; ++k) {
      const Rational x = make_rational(k, 200);
      const Enclosure y = eval(m, x, prec);
      CHECK(y.width() <= prec);
      const Enclosure back = invert_point(m, y.mid(), prec);
      CHECK(std::abs(to_double(back.mid() - x)) < 1e-10);
    }
  }
}

TEST_CASE("evaluation never inverts order") {
  const GeneratorSystem semi = build_example("semigroup");
  const Rational prec = pow2(-40);
  for (const auto& m : semi.generators) {
    Enclosure prev = eval(m, Rational(0), prec);
    for (int k = 1; k <= 300; ++k) {
      const Enclosure cur = eval(m, make_rational(k, 300), prec);
      CHECK(prev.lo <= cur.hi);
      if (!prev.intersects(cur)) CHECK(prev.hi < cur.lo);
      prev = cur;
    }
  }
}

TEST_CASE("fixed points") {
  const GeneratorSystem c2 = build_example("case2-single");
  const auto fp = fixed_point_enclosures(c2.generator("g"), pow2(-30));
  REQUIRE(fp.size() == 2);
  CHECK(fp[0].where == Enclosure::exact(0));
  CHECK(fp[1].where == Enclosure::exact(1));
  CHECK(fp[0].kind == FixedKind::Certified);
  CHECK(fp[1].kind == FixedKind::Certified);

  const auto id = fixed_point_enclosures(identity_map(), pow2(-30));
  REQUIRE(id.size() == 1);
  CHECK(id[0].where == Enclosure(0, 1));
  CHECK(id[0].kind == FixedKind::Interval);

  const GeneratorSystem l2 = build_example("level2-integer");
  const auto near = fixed_point_enclosures(l2.generator("f"), pow2(-30), make_rational(2, 5), make_rational(3, 4));
  bool half = false, two_thirds = false;
  for (const auto& f : near) {
    if (f.where.contains(make_rational(1, 2)) && f.kind == FixedKind::Certified) half = true;
    if (f.where.contains(make_rational(2, 3)) && f.kind == FixedKind::Certified) two_thirds = true;
    CHECK(f.where.width() <= pow2(-30));
  }
  CHECK(half);
  CHECK(two_thirds);
}

TEST_CASE("exact composition of affine maps") {
  const PiecewiseMap g = build_g();
  const PiecewiseMap same = compose_affine(identity_map(), g);
  for (int k = 0; k <= 81; ++k) CHECK(exact_value(same, make_rational(k, 81)) == exact_value(g, make_rational(k, 81)));

  const PiecewiseMap gg = compose_affine(g, g);
  CHECK(exact_value(gg, make_rational(1, 27)) == make_rational(1, 3));
  const auto seg = forward_segment(gg, make_rational(1, 27));
  REQUIRE(seg);
  CHECK(seg->slope == 9);

  const PiecewiseMap g0 = base_map("g");
  const PiecewiseMap g00 = compose_affine(g0, g0);
  // Breaks where x or g0(x) crosses 1/4, that is at 1/8 and 1/4.
  REQUIRE(g00.pieces().size() == 3);
  CHECK(*g00.pieces()[0].hi == make_rational(1, 8));
  CHECK(*g00.pieces()[1].hi == make_rational(1, 4));
  CHECK(exact_value(g00, make_rational(1, 2)) == make_rational(7, 9));
  CHECK(validate_map(g00).usable);
}

TEST_CASE("closed-form powers agree with repeated evaluation") {
  const PiecewiseMap g0 = base_map("g");
  const Rational x = make_rational(1, 7);
  Rational step = x;
  for (int k = 1; k <= 12; ++k) {
    step = exact_value(g0, step);
    const Enclosure p = apply_power(g0, k, Enclosure::exact(x), kPrec);
    CHECK(p.contains(step));
  }
  const Enclosure back = apply_power(g0, -12, Enclosure::exact(step), kPrec);
  CHECK(back.contains(x));
}
