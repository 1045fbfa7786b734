#include <doctest.h>

#include <vector>

#include "circorb/action.hpp"
#include "circorb/cantor.hpp"
#include "circorb/catalog.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

using namespace circorb;

namespace {

const Rational kPrec = pow2(-80);

Rational exact(const PiecewiseMap& m, const Rational& x) {
  const Enclosure e = eval(m, x, kPrec);
  REQUIRE(e.is_exact());
  return e.lo;
}

Rational base_oracle(const Rational& x) {
  return x < make_rational(1, 4) ? Rational(2 * x) : Rational(make_rational(2, 3) * x + make_rational(1, 3));
}

Errc code_of(const ExampleSpec& spec) {
  try {
    build_example(spec);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::ParseError;
}

}  // namespace

TEST_CASE("every catalog system builds with usable generators") {
  for (const auto& name : catalog_names()) {
    CAPTURE(name);
    const GeneratorSystem s = build_example(name);
    CHECK_FALSE(s.generators.empty());
    for (const auto& g : s.generators) CHECK(validate_map(g).usable);
    for (const auto& rung : s.ladder) CHECK_NOTHROW(s.point(rung));
  }
  const GeneratorSystem printed = build_example(ExampleSpec{"semigroup", {}, true});
  CHECK_FALSE(printed.notes.empty());
  CHECK_FALSE(printed.invertible);
}

TEST_CASE("single generator system") {
  const GeneratorSystem s = build_example("case2-single");
  CHECK(s.generators.size() == 1);
  const auto fp = common_fixed_points(s, pow2(-30));
  REQUIRE(fp.size() == 2);
  CHECK(fp[0].where == Enclosure::exact(0));
  CHECK(fp[1].where == Enclosure::exact(1));
  const GeneratorSystem cubed = build_example(ExampleSpec{"case2-single", {{"exponent", "3"}}, false});
  CHECK(eval(cubed.generator("g"), make_rational(1, 2), kPrec) == Enclosure::exact(make_rational(1, 8)));
}

TEST_CASE("the base map and its cells") {
  const PiecewiseMap g0 = base_map();
  for (long k = 0; k <= 240; ++k) CHECK(exact(g0, make_rational(k, 240)) == base_oracle(make_rational(k, 240)));
  const GeneratorSystem s = build_example("level2-integer");
  const Rational z1 = exact(s.generator("g"), s.point("z0"));
  CHECK(z1 == make_rational(2, 3));
  CHECK(exact(s.generator("g"), z1) == make_rational(7, 9));
  CHECK(s.point("z0") < s.point("x0"));
  CHECK(s.point("x0") < z1);
}

TEST_CASE("the level-two pair commutes exactly") {
  const GeneratorSystem s = build_example("level2-integer");
  const PiecewiseMap& f = s.generator("f");
  const PiecewiseMap& g = s.generator("g");
  for (long k = 1; k <= 200; ++k) {
    const Rational x = make_rational(k, 201);
    CHECK(exact(f, exact(g, x)) == exact(g, exact(f, x)));
  }
}

TEST_CASE("the dense chain meets its defining constraint") {
  const GeneratorSystem s = build_example("level2-dense");
  const PiecewiseMap& f = s.generator("f");
  const Rational a = make_rational(1, 2), len = make_rational(2, 3) - a;
  std::vector<Rational> xs;
  for (long d = 1; xs.size() < 10; ++d)
    for (long i = 1; i < (1L << d); i += 2) xs.push_back(a + len * make_rational(i, 1L << d));
  CHECK(s.point("x0") == xs[0]);
  for (std::size_t n = 0; n <= 8; ++n) {
    Rational lhs = xs[n + 1], rhs = xs[0];
    for (std::size_t k = 0; k <= n; ++k) {
      lhs = exact(f, lhs);
      rhs = base_oracle(rhs);
    }
    CAPTURE(n);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("the repaired semigroup") {
  const GeneratorSystem s = build_example("semigroup");
  const MapWord f_hat = MapWord::parse("f h1");
  const MapWord g_hat = MapWord::parse("g h2");
  const Enclosure y = eval_word(s, f_hat, make_rational(25, 64), pow2(-50));
  CHECK(y.contains(make_rational(7, 16)));
  CHECK(y.width() <= pow2(-50));

  const Rational a1 = s.point("a1"), a2 = s.point("a2");
  for (long k = 0; k < 50; ++k) {
    const Rational x = a1 + (a2 - a1) * make_rational(2 * k + 1, 100);
    const Enclosure fg = eval_word(s, g_hat.then(f_hat), x, pow2(-50));
    const Enclosure gf = eval_word(s, f_hat.then(g_hat), x, pow2(-50));
    CHECK(fg.gap_to(gf) < make_rational(1, 1000000000000L));
  }
  CHECK(exact(s.generator("h2"), 0) == 0);
  CHECK(exact(s.generator("g"), s.point("x2")) == s.point("x2"));
}

TEST_CASE("the truncated countable family") {
  const GeneratorSystem s = build_example("cantor-ex1");
  CHECK(s.generators.size() == 6);
  const OrbitSample o = orbit(s, s.point("x0"), {6, 5000});
  for (std::uint64_t k = 1; k <= 6; ++k) {
    const Rational target = left_endpoint_value(k);
    bool found = false;
    for (const auto& p : o.points) found = found || p.where.contains(target);
    CAPTURE(k);
    CHECK(found);
  }
  const GeneratorSystem nine = build_example(ExampleSpec{"cantor-ex1", {{"N", "9"}}, false});
  CHECK(nine.generators.size() == 9);
}

TEST_CASE("nested ladders") {
  const GeneratorSystem s = build_example(ExampleSpec{"level-n", {{"n", "4"}}, false});
  CHECK(s.generators.size() == 4);
  CHECK(s.ladder == std::vector<std::string>{"z0", "z0^0", "z0^00", "z0^000"});
  const auto a = nested_intervals(3);
  REQUIRE(a.size() == 3);
  CHECK(a[0].first == make_rational(1, 2));
  CHECK(a[0].second == make_rational(2, 3));
  // Each next interval starts at the midpoint of the previous one.
  for (std::size_t k = 0; k + 1 < a.size(); ++k) CHECK(a[k + 1].first == (a[k].first + a[k].second) / 2);
}

TEST_CASE("circle and line systems") {
  const GeneratorSystem swap = build_example("circle-swap");
  CHECK(swap.domain == DomainKind::Circle);
  CHECK(swap.finite_orbit_points == std::vector<Rational>{0, make_rational(1, 2)});
  const GeneratorSystem lc = build_example("level2-cantor");
  CHECK(lc.domain == DomainKind::Line);
  CHECK(lc.point("x0") == make_rational(1, 3));
  CHECK(exact(lc.generator("g"), make_rational(-7, 2)) == make_rational(-5, 2));
}

TEST_CASE("parameter validation") {
  CHECK(code_of(ExampleSpec{"nope", {}, false}) == Errc::UnknownName);
  CHECK(code_of(ExampleSpec{"case2-single", {{"exponent", "1"}}, false}) == Errc::BadParams);
  CHECK(code_of(ExampleSpec{"level-n", {{"n", "9"}}, false}) == Errc::BadParams);
  CHECK(code_of(ExampleSpec{"case1-dense", {{"bogus", "1"}}, false}) == Errc::BadParams);
  CHECK(code_of(ExampleSpec{"case1-dense", {}, true}) == Errc::BadParams);
  CHECK(code_of(ExampleSpec{"semigroup", {{"a1", "7/16"}}, false}) == Errc::BadParams);
  CHECK(code_of(ExampleSpec{"parallel-pair", {{"y", "1/4"}}, false}) == Errc::BadParams);
}
