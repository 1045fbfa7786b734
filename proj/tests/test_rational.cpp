#include <doctest.h>

#include "circorb/enclosure.hpp"
#include "circorb/error.hpp"
#include "circorb/map_word.hpp"
#include "circorb/rational.hpp"

using namespace circorb;

TEST_CASE("rationals parse in lowest terms and print back") {
  CHECK(parse_rational("2/4") == make_rational(1, 2));
  CHECK(to_string(parse_rational("2/4")) == "1/2");
  CHECK(parse_rational("-6/8") == make_rational(-3, 4));
  CHECK(parse_rational("0.25") == make_rational(1, 4));
  CHECK(parse_rational("7") == Rational(7));
  CHECK(parse_rational("010") == 10);
  CHECK(parse_rational("010/012") == make_rational(5, 6));
  CHECK(to_string(Rational(7)) == "7");
  CHECK(to_string(parse_rational(to_string(make_rational(-22, 7)))) == "-22/7");
  for (const char* bad : {"", "1/0", "x", "1//2", "1/2/3", "."}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), Error);
  }
}

TEST_CASE("make_rational reduces") {
  const Rational q = make_rational(999, 999);
  CHECK(q == 1);
  CHECK(q.get_den() == 1);
  CHECK(make_rational(3, 201).get_den() == 67);
  CHECK_THROWS_AS(make_rational(1, 0), Error);
}

TEST_CASE("dyadic rounding brackets the value") {
  const Rational third = make_rational(1, 3);
  const Rational lo = floor_dyadic(third, 10), hi = ceil_dyadic(third, 10);
  CHECK(lo <= third);
  CHECK(third <= hi);
  CHECK(hi - lo == pow2(-10));
  CHECK(floor_dyadic(make_rational(1, 4), 10) == make_rational(1, 4));
  CHECK(bits_for(pow2(-20)) == 20);
  CHECK(bits_for(make_rational(1, 1000)) == 10);
}

TEST_CASE("powers and roots") {
  CHECK(pow2(-3) == make_rational(1, 8));
  CHECK(pow3(2) == 9);
  CHECK(pow_int(make_rational(2, 3), -2) == make_rational(9, 4));
  const RootResult r = int_root(Integer(28), 3);
  CHECK(r.root == 3);
  CHECK_FALSE(r.exact);
  CHECK(int_root(Integer(27), 3).exact);
  CHECK(approx_log2(pow2(-5000)) == doctest::Approx(-5000));
}

TEST_CASE("enclosures") {
  const Enclosure a(make_rational(1, 4), make_rational(1, 2));
  const Enclosure b(make_rational(3, 4), Rational(1));
  CHECK(a.width() == make_rational(1, 4));
  CHECK(a.contains(make_rational(1, 3)));
  CHECK_FALSE(a.intersects(b));
  CHECK(a.gap_to(b) == make_rational(1, 4));
  CHECK(a.hull(b) == Enclosure(make_rational(1, 4), Rational(1)));
  CHECK(Enclosure::exact(Rational(1)).is_exact());
}

TEST_CASE("map words reduce freely and print letter by letter") {
  const MapWord w = MapWord::parse("g f^-1 g");
  CHECK(w.str() == "g f^-1 g");
  CHECK(w.length() == 3);
  CHECK(w.has_inverse_letters());
  CHECK(MapWord::parse("g g g^-1").str() == "g");
  CHECK(MapWord::parse("g^3 f^-2").compact() == "g^3 f^-2");
  CHECK(MapWord::parse("g^3").str() == "g g g");
  CHECK(MapWord::parse("").empty());
  CHECK(MapWord::parse("e").empty());
  CHECK(w.then(w.inverse()).empty());
  CHECK(MapWord::parse("f").then(MapWord::parse("g")).str() == "f g");
  CHECK(MapWord::parse("g").then(MapWord::parse("g^-1 f")).str() == "f");
  CHECK_THROWS_AS(MapWord::parse("g^"), Error);
}
