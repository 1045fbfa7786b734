#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "circorb/action.hpp"
#include "circorb/catalog.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

using namespace circorb;

namespace {

bool has_word(const std::vector<MapWord>& words, const std::string& text) {
  return std::any_of(words.begin(), words.end(), [&](const MapWord& w) { return w.str() == text; });
}

long signed_count(const MapWord& w, const std::string& name) {
  long n = 0;
  for (const auto& s : w.syllables())
    if (s.generator == name) n += s.power;
  return n;
}

}  // namespace

TEST_CASE("orbit of the squaring map") {
  const GeneratorSystem s = build_example("case2-single");
  const OrbitSample o = orbit(s, make_rational(1, 2), {2, 2000});
  REQUIRE(o.points.size() == 5);
  std::vector<double> got;
  for (const auto& p : o.points) got.push_back(p.where.mid_double());
  std::sort(got.begin(), got.end());
  const std::vector<double> expected{1.0 / 16, 1.0 / 4, 1.0 / 2, std::pow(2.0, -0.5), std::pow(2.0, -0.25)};
  for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK(o.points.front().word.empty());
  CHECK(o.points.front().where == Enclosure::exact(make_rational(1, 2)));
}

TEST_CASE("a one-point budget returns the base point") {
  for (const auto& name : catalog_names()) {
    const GeneratorSystem s = build_example(name);
    const Rational x = s.designated.front().value;
    const OrbitSample o = orbit(s, x, {8, 1});
    REQUIRE(o.points.size() == 1);
    CHECK(o.points[0].word.empty());
    CHECK(o.points[0].where.contains(x));
  }
}

TEST_CASE("orbit points of the dense pair are dyadic-triadic powers") {
  const GeneratorSystem s = build_example("case1-dense");
  const OrbitSample o = orbit(s, make_rational(1, 2), {6, 400});
  for (const auto& p : o.points) {
    // x -> x^(1/3) from f and x -> x^2 from g, so the exponent is 2^k / 3^j.
    const double e = std::pow(2.0, static_cast<double>(signed_count(p.word, "g"))) /
                     std::pow(3.0, static_cast<double>(signed_count(p.word, "f")));
    CHECK(p.where.mid_double() == doctest::Approx(std::pow(0.5, e)).epsilon(1e-9));
  }
}

TEST_CASE("orbit witnesses re-evaluate") {
  for (const char* name : {"case1-dense", "level2-integer", "cantor-ex2", "circle-swap"}) {
    const GeneratorSystem s = build_example(name);
    const Rational x = s.designated.front().value;
    const OrbitSample o = orbit(s, x, {6, 300});
    for (const auto& p : o.points) CHECK(eval_word(s, p.word, x, o.dedup_tol / 8).intersects(p.where));
  }
}

TEST_CASE("orbits are symmetric in invertible systems") {
  const GeneratorSystem s = build_example("level2-integer");
  const Rational x = s.point("x0");
  const OrbitSample o = orbit(s, x, {3, 1000});
  for (const auto& p : o.points) {
    if (!p.where.is_exact()) continue;
    const OrbitSample back = orbit(s, p.where.lo, {3, 1000});
    const bool found = std::any_of(back.points.begin(), back.points.end(),
                                   [&](const OrbitPoint& q) { return q.where.contains(x); });
    CHECK(found);
  }
}

TEST_CASE("larger budgets keep every point") {
  const GeneratorSystem s = build_example("level2-integer");
  const Rational x = s.point("x0");
  const OrbitSample small = orbit(s, x, {4, 200});
  const OrbitSample large = orbit(s, x, {6, 800});
  for (const auto& p : small.points) {
    const bool kept = std::any_of(large.points.begin(), large.points.end(), [&](const OrbitPoint& q) {
      return q.where.intersects(p.where) || q.where.gap_to(p.where) <= large.dedup_tol;
    });
    CHECK(kept);
  }
}

TEST_CASE("orbit search is deterministic") {
  const GeneratorSystem s = build_example("cantor-ex2");
  OrbitOptions one;
  one.workers = 1;
  const OrbitSample a = orbit(s, make_rational(1, 4), {5, 500}, one);
  const OrbitSample b = orbit(s, make_rational(1, 4), {5, 500});
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].where == b.points[i].where);
    CHECK(a.points[i].word.str() == b.points[i].word.str());
  }
}

TEST_CASE("free reduction in the word enumeration") {
  const GeneratorSystem s = build_example("level2-integer");
  // 1 empty word, 4 letters, 4 * 3 reduced pairs.
  CHECK(enumerate_words(s, 2).size() == 17);
  CHECK(enumerate_words(s, 0).size() == 1);
  const GeneratorSystem semi = build_example("semigroup");
  CHECK(enumerate_words(semi, 2).size() == 1 + 4 + 16);
}

TEST_CASE("common fixed points") {
  const auto c1 = common_fixed_points(build_example("case1-dense"), pow2(-30));
  REQUIRE(c1.size() == 2);
  CHECK(c1[0].where == Enclosure::exact(0));
  CHECK(c1[1].where == Enclosure::exact(1));

  GeneratorSystem id;
  id.name = "id";
  id.generators = {PiecewiseMap("e", DomainKind::Interval01, {Piece::affine(0, 1, 1, 0)})};
  const auto all = common_fixed_points(id, pow2(-30));
  REQUIRE(all.size() == 1);
  CHECK(all[0].kind == FixedKind::Interval);
  CHECK(all[0].where == Enclosure(0, 1));

  const auto l2 = common_fixed_points(build_example("level2-integer"), pow2(-30));
  REQUIRE(l2.size() == 2);
  CHECK(l2[0].where == Enclosure::exact(0));
  CHECK(l2[1].where == Enclosure::exact(1));
}

TEST_CASE("splitting the circle at a finite orbit") {
  const GeneratorSystem swap = build_example("circle-swap");
  const ComponentDecomposition d = reduce_circle(swap, {0, make_rational(1, 2)}, 3);
  REQUIRE(d.components.size() == 2);
  for (const auto& c : d.components) CHECK(has_word(c.stabilizers, "rot rot"));
  const std::size_t first = d.component_of(make_rational(1, 4), DomainKind::Circle);
  REQUIRE(first != ComponentDecomposition::npos);
  CHECK(has_word(d.components[first].stabilizers, "rot f rot"));
  CHECK(d.component_of(0, DomainKind::Circle) == ComponentDecomposition::npos);

  GeneratorSystem lifted = build_example("level2-integer");
  lifted.domain = DomainKind::Circle;
  const ComponentDecomposition one = reduce_circle(lifted, {0}, 1);
  REQUIRE(one.components.size() == 1);
  for (const auto& g : lifted.generators) CHECK(has_word(one.components[0].stabilizers, g.name()));

  const GeneratorSystem moved = build_example("circle-swap");
  CHECK_THROWS_AS(reduce_circle(moved, {make_rational(1, 8)}, 2), Error);
}

TEST_CASE("range of a point") {
  const GeneratorSystem l2 = build_example("level2-integer");
  const ComponentDecomposition d = default_decomposition(l2);
  const auto r = range_of(l2, d, l2.point("x0"), {6, 500});
  CHECK(r == std::set<std::size_t>{d.component_of(l2.point("x0"), DomainKind::Interval01)});

  const GeneratorSystem swap = build_example("circle-swap");
  const ComponentDecomposition cd = reduce_circle(swap, swap.finite_orbit_points, 2);
  CHECK(range_of(swap, cd, make_rational(1, 8), {2, 100}).size() == 2);
  CHECK(range_of(swap, cd, make_rational(1, 8), {0, 100}) ==
        std::set<std::size_t>{cd.component_of(make_rational(1, 8), DomainKind::Circle)});
}

TEST_CASE("witness intervals") {
  const GeneratorSystem c1 = build_example("case1-dense");
  const WitnessInterval w1 = witness_interval(c1);
  CHECK(w1.condition == WitnessInterval::Condition::C2);
  CHECK(w1.a == make_rational(1, 4));
  CHECK(w1.b == make_rational(3, 4));
  CHECK(verify_witness(c1, w1));

  for (const char* name : {"case2-single", "level2-integer"}) {
    const GeneratorSystem s = build_example(name);
    const WitnessInterval w = witness_interval(s);
    CHECK(w.condition == WitnessInterval::Condition::C1);
    CHECK(w.generator == "g");
    CHECK(verify_witness(s, w));
    // Independent check: g moves one endpoint of J into J.
    const Enclosure ga = eval(s.generator("g"), w.a, pow2(-40));
    const Enclosure gb = eval(s.generator("g"), w.b, pow2(-40));
    CHECK(Enclosure(ga.lo, gb.hi).intersects(Enclosure(w.a, w.b)));
  }

  WitnessInterval forged = w1;
  forged.b = make_rational(1, 3);
  forged.a = make_rational(3, 10);
  CHECK_FALSE(verify_witness(c1, forged));
}

TEST_CASE("transport between consecutive intervals") {
  const GeneratorSystem s = build_example("level2-integer");
  const OrbitSample z = orbit(s, s.point("z0"), {12, 2000});
  const LabeledOrbit lab = label_orbit(z);
  CHECK(lab.at(0).where == Enclosure::exact(make_rational(1, 2)));
  CHECK(lab.at(1).where == Enclosure::exact(make_rational(2, 3)));
  CHECK(lab.at(-1).where == Enclosure::exact(make_rational(1, 4)));

  CHECK(transport_word(s, z, 1, 3).str() == "g g");
  CHECK(transport_word(s, z, 2, 2).empty());
  CHECK(transport_word(s, z, 2, 0).str() == "g^-1 g^-1");

  const MapWord w = transport_word(s, z, -1, 2);
  for (long k = 0; k <= 1; ++k) {
    const Enclosure e = eval_word(s, w, lab.at(-1 + k).where.mid(), pow2(-60));
    CHECK(e.gap_to(lab.at(2 + k).where) < z.dedup_tol);
  }
  CHECK_THROWS_AS(transport_word(s, z, 1, 400), Error);
}

TEST_CASE("stabilizers of a cell") {
  const GeneratorSystem s = build_example("level2-integer");
  const auto words = stabilizer_words(s, make_rational(1, 2), make_rational(2, 3), 2);
  CHECK(has_word(words, ""));
  CHECK(has_word(words, "f"));
  CHECK(has_word(words, "f^-1"));
  CHECK_FALSE(has_word(words, "g"));
}
