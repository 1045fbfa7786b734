#include <doctest.h>

#include "circorb/action.hpp"
#include "circorb/catalog.hpp"
#include "circorb/classify.hpp"
#include "circorb/error.hpp"

using namespace circorb;

TEST_CASE("the dense pair classifies as dense") {
  const GeneratorSystem s = build_example("case1-dense");
  const Classification c = classify_orbit(s, make_rational(1, 2), {60, 2000});
  CHECK(c.verdict == Verdict::Dense);
  CHECK(c.evidence.points >= 500);
  CHECK(c.evidence.max_gap_in_range < make_rational(1, 64));
}

TEST_CASE("the squaring map gives an integer-type orbit") {
  const GeneratorSystem s = build_example("case2-single");
  const Classification c = classify_orbit(s, make_rational(1, 2), {20, 2000}, {}, {}, true);
  CHECK(c.verdict == Verdict::IntegerType);
  REQUIRE(c.level);
  CHECK(*c.level == 1);
  REQUIRE(c.evidence.survived_doubling);
  CHECK(*c.evidence.survived_doubling);
  CHECK(c.evidence.isolated_point_fraction == doctest::Approx(1.0));
}

TEST_CASE("the two-generator Cantor example gives a Cantor-type orbit") {
  const GeneratorSystem s = build_example("cantor-ex2");
  const Classification c = classify_orbit(s, make_rational(1, 4), {12, 2000});
  CHECK(c.verdict == Verdict::CantorType);
  CHECK_FALSE(c.evidence.cluster_counts.empty());
}

TEST_CASE("verdict names") {
  CHECK(verdict_name(Verdict::Dense) == "Dense");
  CHECK(verdict_name(Verdict::AccumulatesOnProperSubset) == "AccumulatesOnProperSubset");
  CHECK(parallel_name(ParallelVerdict::NotParallel) == "NotParallel");
}

TEST_CASE("classification is deterministic") {
  const GeneratorSystem s = build_example("level2-integer");
  const OrbitSample sample = orbit(s, s.point("x0"), {10, 1500});
  const ComponentDecomposition d = default_decomposition(s);
  const Classification a = classify(sample, d, s.domain);
  const Classification b = classify(sample, d, s.domain);
  CHECK(a.verdict == b.verdict);
  CHECK(a.reason == b.reason);
  CHECK(a.evidence.cluster_counts == b.evidence.cluster_counts);
  CHECK(a.evidence.max_gap_in_range == b.evidence.max_gap_in_range);
}

TEST_CASE("levels along the ladders") {
  SUBCASE("single squaring map") {
    const GeneratorSystem s = build_example("case2-single");
    CHECK(estimate_level(s, make_rational(1, 3), {20, 2000}).level == 1);
  }
  SUBCASE("level two") {
    const GeneratorSystem s = build_example("level2-integer");
    const LevelEstimate e = estimate_level(s, s.point("x0"), {20, 10000});
    CHECK(e.level == 2);
    REQUIRE(e.rungs.size() == 2);
    CHECK(e.rungs[0].accumulates);
    CHECK(e.rungs[0].disjoint);
    CHECK(e.rungs[1].contains_x);
  }
  SUBCASE("three nested levels") {
    const GeneratorSystem s = build_example(ExampleSpec{"level-n", {{"n", "3"}}, false});
    const LevelEstimate e = estimate_level(s, s.point("z0^00"), {12, 20000});
    CHECK(e.level == 3);
    // One more than the rung it accumulates on.
    CHECK(e.rungs[1].level == 2);
  }
}

TEST_CASE("parallel orbits") {
  const GeneratorSystem pp = build_example("parallel-pair");
  const OrbitSample z = orbit(pp, pp.point("z0"), {16, 1000});
  const ParallelReport p = parallel_test(pp, pp.point("probe"), z, {8, 2000});
  CHECK(p.verdict == ParallelVerdict::Parallel);
  CHECK_FALSE(p.crowded_interval);

  const GeneratorSystem l2 = build_example("level2-integer");
  const OrbitSample zl = orbit(l2, l2.point("z0"), {16, 1000});
  const ParallelReport n = parallel_test(l2, l2.point("x0"), zl, {8, 2000});
  CHECK(n.verdict == ParallelVerdict::NotParallel);
  REQUIRE(n.crowded_interval);
  CHECK(*n.crowded_interval == 0);

  CHECK(parallel_test(pp, pp.point("probe"), z, {8, 1}).verdict == ParallelVerdict::Inconclusive);
  CHECK_THROWS_AS(parallel_test(l2, make_rational(2, 3), zl, {8, 100}), Error);
}

TEST_CASE("classification errors") {
  const GeneratorSystem s = build_example("case2-single");
  try {
    classify_orbit(s, 0, {4, 100});
    FAIL("expected BaseInP");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BaseInP);
  }

  ClassifyParams bad;
  bad.eps_dense = 0;
  try {
    classify_orbit(s, make_rational(1, 2), {4, 100}, bad);
    FAIL("expected BadParams");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadParams);
  }

  const GeneratorSystem l2 = build_example("level2-integer");
  const std::vector<NamedRung> ladder{{"z0", make_rational(1, 2)}, {"z1", make_rational(2, 3)}};
  try {
    estimate_level(l2, l2.point("x0"), ladder, {6, 200});
    FAIL("expected LadderPointCoincidesWithX");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LadderPointCoincidesWithX);
  }
}
