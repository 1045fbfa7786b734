// Acceptance run: one line per criterion, exit status 0 only when all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "circorb/action.hpp"
#include "circorb/cantor.hpp"
#include "circorb/catalog.hpp"
#include "circorb/classify.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

using namespace circorb;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

double max_gap(std::vector<double> v, double lo, double hi) {
  v.erase(std::remove_if(v.begin(), v.end(), [&](double x) { return x < lo || x > hi; }), v.end());
  v.push_back(lo);
  v.push_back(hi);
  std::sort(v.begin(), v.end());
  double g = 0;
  for (std::size_t i = 1; i < v.size(); ++i) g = std::max(g, v[i] - v[i - 1]);
  return g;
}

std::vector<double> mids(const OrbitSample& s) {
  std::vector<double> out;
  for (const auto& p : s.points) out.push_back(p.where.mid_double());
  return out;
}

// 1. Every generator validates; inverse after evaluation returns the grid point.
void validation_suite(Outcome& o) {
  const Rational prec = pow2(-50);
  std::size_t maps = 0, checks = 0;
  for (const auto& name : catalog_names()) {
    const GeneratorSystem s = build_example(name);
    for (const auto& g : s.generators) {
      ++maps;
      const ValidationReport r = validate_map(g);
      o.require(r.usable, name + "/" + g.name() + " not usable");
      bool exact_data = true;
      for (const auto& p : g.pieces()) exact_data = exact_data && !p.is_power();
      const bool onto = r.surjective;
      Rational lo = 0, width = 1;
      if (s.domain == DomainKind::Line) {
        lo = -5;
        width = 10;
      }
      for (int k = 0; k < 1000; ++k) {
        const Rational x = lo + width * make_rational(k, 999);
        const Enclosure y = eval(g, x, prec);
        if (!onto) continue;
        ++checks;
        if (exact_data) {
          o.require(y.is_exact(), name + "/" + g.name() + " inexact at " + to_string(x));
          const Enclosure back = invert_point(g, y.lo, prec);
          const Rational expect = s.domain == DomainKind::Circle ? mod1(x) : x;
          const bool ok = back.is_exact() && (back.lo == x || back.lo == expect);
          o.require(ok, name + "/" + g.name() + " round trip at " + to_string(x));
        } else {
          const Enclosure back = invert_point(g, y.mid(), prec);
          o.require(abs_q(back.mid() - x) < Rational(1, 10000000000L),
                    name + "/" + g.name() + " round trip at " + to_string(x));
        }
      }
    }
  }
  o.detail << (o.pass ? "" : " | ") << maps << " maps, " << checks << " round trips";
}

// 2. Orbit of 1/2 under x^2 and x^(1/3) fills [0.3, 0.7].
void case1_density(Outcome& o) {
  const GeneratorSystem s = build_example("case1-dense");
  const OrbitBudget budget{24, 2000};
  const OrbitSample sample = orbit(s, Rational(1, 2), budget);
  const auto m = mids(sample);

  // Oracle: the exponents 2^k / 3^j with |k|, |j| <= 12, evaluated directly.
  std::vector<double> oracle;
  for (int k = -12; k <= 12; ++k)
    for (int j = -12; j <= 12; ++j) oracle.push_back(std::pow(0.5, std::ldexp(1.0, k) / std::pow(3.0, j)));
  std::vector<double> sorted = m;
  std::sort(sorted.begin(), sorted.end());
  std::size_t missing = 0;
  for (double v : oracle) {
    if (v < 1e-300 || v > 1 - 1e-15) continue;
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v - 1e-9);
    if (it == sorted.end() || std::abs(*it - v) > 1e-9) ++missing;
  }
  o.require(missing == 0, std::to_string(missing) + " oracle points absent from the sample");
  const double oracle_gap = max_gap(oracle, 0.3, 0.7);
  const double gap = max_gap(m, 0.3, 0.7);
  o.require(sample.points.size() <= 2000, "budget exceeded");
  o.require(oracle_gap < 0.05, "oracle gap " + std::to_string(oracle_gap));
  o.require(gap < 0.05, "sample gap " + std::to_string(gap));

  ClassifyParams params;
  params.eps_dense = Rational(1, 20);
  const Classification c = classify(sample, default_decomposition(s), s.domain, params);
  o.require(c.verdict == Verdict::Dense, "verdict " + verdict_name(c.verdict));
  o.detail << (o.pass ? "" : " | ") << sample.points.size() << " points, gap on [0.3,0.7] " << gap
           << " (oracle " << oracle_gap << "), verdict " << verdict_name(c.verdict);
}

// 3. The single-generator orbit piles up at both ends.
void case2_integer(Outcome& o) {
  const GeneratorSystem s = build_example("case2-single");
  const OrbitSample sample = orbit(s, Rational(1, 2), {20, 2000});
  std::size_t far = 0, deep = 0;
  for (const auto& p : sample.points) {
    if (p.word.length() < 13) continue;
    ++deep;
    const Rational x = p.where.hi < Rational(1, 2) ? p.where.hi : Rational(1 - p.where.lo);
    if (!(x < Rational(1, 1000))) ++far;
    // Oracle: g^n(1/2) = 2^(-2^n).
    const long n = p.word.syllables().front().power;
    const double expect = std::exp2(-std::exp2(static_cast<double>(n)));
    o.require(std::abs(p.where.mid_double() - expect) < 1e-12, "g^" + std::to_string(n) + " off the closed form");
  }
  o.require(deep > 0, "no words of length >= 13 explored");
  o.require(far == 0, std::to_string(far) + " deep points farther than 1e-3 from the ends");
  const Classification c = classify(sample, default_decomposition(s), s.domain);
  o.require(c.verdict == Verdict::IntegerType, "verdict " + verdict_name(c.verdict));
  o.require(c.level && *c.level == 1, "classification level is not 1");
  const LevelEstimate le = estimate_level(s, Rational(1, 2), {20, 2000});
  o.require(le.level == 1, "estimate_level " + std::to_string(le.level));
  o.detail << (o.pass ? "" : " | ") << deep << " points of word length >= 13, verdict " << verdict_name(c.verdict)
           << ", level " << le.level;
}

// All addresses of endpoints of the depth-8 ternary cylinders.
std::vector<Rational> endpoints_depth8() {
  std::vector<Rational> out;
  for (int bits = 0; bits < 256; ++bits) {
    Rational left = 0;
    for (int d = 0; d < 8; ++d)
      if (bits & (1 << (7 - d))) left += 2 * pow3(-(d + 1));
    out.push_back(left);
    out.push_back(left + pow3(-8));
  }
  return out;
}

// 4. g keeps C exactly and f keeps it up to the evaluation precision.
void cantor_invariance(Outcome& o) {
  const PiecewiseMap g = build_g();
  const PiecewiseMap f = build_f();
  const auto ends = endpoints_depth8();
  std::size_t g_bad = 0, f_bad = 0;
  Rational worst = 0;
  for (const Rational& e : ends) {
    const Enclosure ge = eval(g, e, pow3(-20));
    if (!ge.is_exact() || membership(ge.lo).kind != Membership::Kind::InC) ++g_bad;
    const Enclosure fe = eval(f, e, pow3(-20));
    const Rational d = std::max(distance_to_cantor(fe.lo), distance_to_cantor(fe.hi));
    worst = std::max(worst, d);
    if (!(d < pow3(-12))) ++f_bad;
  }
  o.require(ends.size() == 512, "expected 512 endpoints");
  o.require(g_bad == 0, std::to_string(g_bad) + " images under g outside C");
  o.require(f_bad == 0, std::to_string(f_bad) + " images under f farther than 3^-12 from C");
  o.detail << (o.pass ? "" : " | ") << ends.size() << " endpoints, worst f distance " << to_double(worst);
}

// 5. Density witness words land within 3^-6 of each target.
void density_witnesses(Outcome& o) {
  GeneratorSystem s;
  s.name = "cantor-pair";
  s.generators = {build_g(), build_f()};
  const Rational x(1, 4), eps = pow3(-6);
  std::size_t checked = 0;
  std::size_t longest = 0;
  for (std::uint64_t rank = 32; rank < 64; ++rank) {
    const GapId gap = gap_of_rank(rank);
    o.require(gap.word.size() == 5, "rank " + std::to_string(rank) + " is not a depth-5 gap");
    const Rational y = left_endpoint_value(rank);
    const MapWord w = density_witness(x, y, eps);
    const Enclosure e = eval_word(s, w, x, pow3(-20));
    const Rational err = std::max(abs_q(e.lo - y), abs_q(e.hi - y));
    o.require(err < eps, "target " + to_string(y) + " missed by " + std::to_string(to_double(err)));
    longest = std::max(longest, w.length());
    ++checked;
  }
  o.detail << (o.pass ? "" : " | ") << checked << " targets, longest word " << longest << " letters";
}

// 6. The level-2 system commutes and separates levels 1 and 2.
void level2(Outcome& o) {
  const GeneratorSystem s = build_example("level2-integer");
  const PiecewiseMap& g = s.generator("g");
  const PiecewiseMap& f = s.generator("f");
  const Rational prec = pow2(-60);
  std::size_t bad = 0;
  for (int k = 1; k <= 200; ++k) {
    const Rational x = make_rational(k, 201);
    const Enclosure fg = eval(f, eval(g, x, prec).lo, prec);
    const Enclosure gf = eval(g, eval(f, x, prec).lo, prec);
    if (!(fg.is_exact() && gf.is_exact() && fg.lo == gf.lo)) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " probes where f g != g f");
  const OrbitBudget budget{20, 10000};
  const LevelEstimate lx = estimate_level(s, s.point("x0"), budget);
  const LevelEstimate lz = estimate_level(s, s.point("z0"), budget);
  o.require(lx.level == 2, "level(x0) = " + std::to_string(lx.level));
  o.require(lz.level == 1, "level(z0) = " + std::to_string(lz.level));
  o.detail << (o.pass ? "" : " | ") << "200 exact commutations, level(x0) = " << lx.level
           << ", level(z0) = " << lz.level;
}

// 7. The k-th ladder point of the level-4 tower has level k.
void level_n(Outcome& o) {
  const GeneratorSystem s = build_example(ExampleSpec{"level-n", {{"n", "4"}}, false});
  const OrbitBudget budget{12, 20000};
  std::ostringstream levels;
  o.require(s.ladder.size() == 4, "ladder has " + std::to_string(s.ladder.size()) + " points");
  for (std::size_t k = 0; k < s.ladder.size(); ++k) {
    const LevelEstimate le = estimate_level(s, s.point(s.ladder[k]), budget);
    levels << (k ? " " : "") << le.level;
    o.require(le.level == static_cast<int>(k + 1), s.ladder[k] + " has level " + std::to_string(le.level));
  }
  o.detail << (o.pass ? "" : " | ") << "levels " << levels.str();
}

// 8. The semigroup's middle interval: commuting maps and a dense forward orbit.
void semigroup_middle(Outcome& o) {
  const GeneratorSystem s = build_example("semigroup");
  const Rational a1 = s.point("a1"), a2 = s.point("a2"), r = a2 - a1;
  const MapWord f_hat = MapWord::parse("f h1"), g_hat = MapWord::parse("g h2");
  const Rational prec = pow2(-60);
  Rational worst = 0;
  for (int k = 1; k <= 50; ++k) {
    const Rational x = a1 + r * make_rational(k, 51);
    const Enclosure fg = eval_word(s, g_hat.then(f_hat), x, prec);
    const Enclosure gf = eval_word(s, f_hat.then(g_hat), x, prec);
    worst = std::max(worst, Rational(abs_q(fg.mid() - gf.mid()) + fg.width() + gf.width()));
  }
  o.require(worst < Rational(1, 1000000000000L), "f^g^ and g^f^ differ by " + std::to_string(to_double(worst)));

  OrbitOptions opts;
  opts.alphabet = {f_hat, g_hat};
  const Rational mid = (a1 + a2) / 2;
  const OrbitSample sample = orbit(s, mid, {20, 200000}, opts);
  const double lo = to_double(a1 + r / 10), hi = to_double(a2 - r / 10);
  const double gap = max_gap(mids(sample), lo, hi);
  o.require(gap < 0.05 * to_double(r), "gap " + std::to_string(gap) + " vs " + std::to_string(0.05 * to_double(r)));

  // Reported only: forward images of points at or below x1 that land inside (x1, x2).
  const Rational x1 = s.point("x1"), x2 = s.point("x2");
  std::size_t inside = 0;
  OrbitOptions forward;
  forward.alphabet = {MapWord::parse("f"), MapWord::parse("g"), MapWord::parse("h1"), MapWord::parse("h2")};
  const OrbitSample low = orbit(s, x1 / 2, {6, 5000}, forward);
  for (const auto& p : low.points)
    if (p.where.lo > x1 && p.where.hi < x2) ++inside;
  o.detail << (o.pass ? "" : " | ") << "max commutator " << to_double(worst) << ", " << sample.points.size()
           << " points, gap " << gap << " (limit " << 0.05 * to_double(r) << "); reported: " << inside << " of "
           << low.points.size() << " forward images of x1/2 fall inside (x1, x2)";
}

// 9. Transport across the reference orbit and witness intervals.
void transport_and_witness(Outcome& o) {
  const GeneratorSystem s = build_example("level2-integer");
  const OrbitSample z = orbit(s, s.point("z0"), {12, 2000});
  const LabeledOrbit lab = label_orbit(z);
  const MapWord w = transport_word(s, z, 1, 3);
  const Rational prec = pow2(-60);
  const Enclosure a = eval_word(s, w, lab.at(1).where.mid(), prec);
  const Enclosure b = eval_word(s, w, lab.at(2).where.mid(), prec);
  const double tol = 1e-9;
  o.require(std::abs(a.mid_double() - lab.at(3).where.mid_double()) < tol, "left endpoint of I_1 misses I_3");
  o.require(std::abs(b.mid_double() - lab.at(4).where.mid_double()) < tol, "right endpoint of I_1 misses I_3");
  std::ostringstream conds;
  for (const char* name : {"case1-dense", "case2-single", "level2-integer"}) {
    const GeneratorSystem t = build_example(name);
    try {
      const WitnessInterval wi = witness_interval(t);
      o.require(verify_witness(t, wi), std::string(name) + " certificate does not verify");
      conds << ' ' << name << ':' << condition_name(wi.condition) << '[' << to_string(wi.a) << ','
            << to_string(wi.b) << ']';
    } catch (const Error& e) {
      o.require(false, std::string(name) + ": " + e.what());
    }
  }
  o.detail << (o.pass ? "" : " | ") << "transport word \"" << w.str() << "\";" << conds.str();
}

// 10. Parallel and non-parallel orbits.
void parallel(Outcome& o) {
  const GeneratorSystem pp = build_example("parallel-pair");
  const OrbitSample zp = orbit(pp, pp.point("z0"), {16, 1000});
  const ParallelReport a = parallel_test(pp, pp.point("probe"), zp, {8, 2000});
  o.require(a.verdict == ParallelVerdict::Parallel, "probe gives " + parallel_name(a.verdict));
  o.require(a.stable_under_doubling, "probe verdict not stable under doubling");

  const GeneratorSystem l2 = build_example("level2-integer");
  const OrbitSample zl = orbit(l2, l2.point("z0"), {16, 1000});
  const ParallelReport b = parallel_test(l2, l2.point("x0"), zl, {8, 2000});
  o.require(b.verdict == ParallelVerdict::NotParallel, "x0 gives " + parallel_name(b.verdict));
  o.require(b.stable_under_doubling, "x0 verdict not stable under doubling");
  o.detail << (o.pass ? "" : " | ") << "probe " << parallel_name(a.verdict) << " over " << a.intervals_met
           << " intervals, x0 " << parallel_name(b.verdict);
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "validation and round trips", 30, validation_suite},
      {2, "case 1 density", 10, case1_density},
      {3, "case 2 integer type", 5, case2_integer},
      {4, "Cantor set invariance", 60, cantor_invariance},
      {5, "density witness", 60, density_witnesses},
      {6, "level 2 commutation and level", 30, level2},
      {7, "level n ladder", 120, level_n},
      {8, "semigroup middle density", 60, semigroup_middle},
      {9, "transport and witness", 10, transport_and_witness},
      {10, "parallel orbits", 30, parallel},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, "took " + std::to_string(secs) + " s");
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ") " << secs << " s / "
              << c.limit_s << " s: " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
