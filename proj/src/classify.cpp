#include "circorb/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

namespace circorb {

namespace {

constexpr int kMaxScale = 40;
constexpr int kWindow = 3;
constexpr std::size_t kPlateau = 6;
constexpr std::size_t kChain = 8;
constexpr std::size_t kChainPerShell = 8;
constexpr int kChainOuter = 3;

struct Zone {
  Rational lo, hi;  // central part of the component
  Rational length;  // full component length
  std::vector<const OrbitPoint*> points;
};

Rational position_in(const Component& c, const Rational& x, DomainKind domain) {
  if (domain == DomainKind::Circle && x <= c.lo) return x + 1;
  return x;
}

std::vector<Zone> zones_of(const OrbitSample& sample, const ComponentDecomposition& dec, DomainKind domain,
                           const ClassifyParams& params) {
  std::map<std::size_t, std::vector<std::pair<Rational, const OrbitPoint*>>> met;
  for (const auto& p : sample.points) {
    const Rational m = p.where.mid();
    const std::size_t c = dec.component_of(m, domain);
    if (c == ComponentDecomposition::npos) continue;
    met[c].emplace_back(position_in(dec.components[c], m, domain), &p);
  }
  std::vector<Zone> out;
  for (auto& [c, pts] : met) {
    const Component& comp = dec.components[c];
    Zone z;
    if (comp.unbounded) {
      auto [mn, mx] = std::minmax_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      z.lo = mn->first;
      z.hi = mx->first;
      z.length = z.hi - z.lo;
      if (z.length == 0) z.length = 1;
    } else {
      z.length = comp.hi - comp.lo;
      z.lo = comp.lo + params.edge_margin * z.length;
      z.hi = comp.hi - params.edge_margin * z.length;
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [x, p] : pts)
      if (z.lo <= x && x <= z.hi) z.points.push_back(p);
    out.push_back(std::move(z));
  }
  return out;
}

// Positions within a zone, relative to its component length, sorted.
std::vector<double> relative(const Zone& z, const ComponentDecomposition& dec, DomainKind domain) {
  std::vector<double> out;
  for (const auto* p : z.points) {
    Rational m = p->where.mid();
    if (domain == DomainKind::Circle && m < z.lo) m += 1;
    out.push_back(to_double((m - z.lo) / z.length));
  }
  std::sort(out.begin(), out.end());
  (void)dec;
  return out;
}

// Clusters of points that have sample neighbours within rho on both sides.
std::size_t two_sided_clusters(const std::vector<double>& v, double rho) {
  std::size_t clusters = 0;
  double last = -1e300;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] - v[i - 1] > rho || v[i + 1] - v[i] > rho) continue;
    if (v[i] - last > rho) ++clusters;
    last = v[i];
  }
  return clusters;
}

Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

std::vector<Rational> sorted_mids(const OrbitSample& s) { return s.sorted_midpoints(); }

// Smallest |a - b| over a in xs and b in ys (both sorted), with a flag for pairs within tol.
struct Approach {
  std::optional<Rational> closest_positive;
  bool touches = false;
};

Approach approach(const std::vector<Rational>& xs, const std::vector<Rational>& ys, const Rational& tol,
                  const Rational& lo, const Rational& hi) {
  Approach out;
  for (const Rational& y : ys) {
    if (y < lo || y > hi) continue;
    auto it = std::lower_bound(xs.begin(), xs.end(), y);
    for (auto jt : {it, it == xs.begin() ? xs.end() : std::prev(it)}) {
      if (jt == xs.end()) continue;
      const Rational d = abs_q(*jt - y);
      if (d < tol) {
        out.touches = true;
        continue;
      }
      if (!out.closest_positive || d < *out.closest_positive) out.closest_positive = d;
    }
  }
  return out;
}

// Geometric approach of xs to some y in ys: occupied dyadic distance shells
// 2^-(m+1) <= |x - y| < 2^-m form a run of at least kChain shells that ends at
// the deepest occupied shell, with few points per shell.
bool chains_onto(const std::vector<Rational>& xs, const std::vector<Rational>& ys, const Rational& tol,
                 const Rational& lo, const Rational& hi) {
  const Rational outer = pow2(-kChainOuter);
  for (const Rational& y : ys) {
    if (y < lo || y > hi) continue;
    std::map<long, std::size_t> shells;
    auto first = std::lower_bound(xs.begin(), xs.end(), Rational(y - outer));
    auto last = std::upper_bound(xs.begin(), xs.end(), Rational(y + outer));
    for (auto it = first; it != last; ++it) {
      const Rational d = abs_q(*it - y);
      if (d < tol) continue;
      int ex = 0;
      std::frexp(to_double(d), &ex);
      ++shells[-ex];
    }
    if (shells.empty()) continue;
    std::size_t run = 0;
    long prev = 0;
    for (auto it = shells.rbegin(); it != shells.rend(); ++it) {
      if (run > 0 && it->first != prev - 1) break;
      if (it->second > kChainPerShell) break;
      ++run;
      prev = it->first;
    }
    if (run >= kChain) return true;
  }
  return false;
}

bool near_any(const std::vector<Rational>& xs, const Rational& y, const Rational& tol) {
  auto it = std::lower_bound(xs.begin(), xs.end(), y);
  if (it != xs.end() && abs_q(*it - y) < tol) return true;
  return it != xs.begin() && abs_q(*std::prev(it) - y) < tol;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Dense: return "Dense";
    case Verdict::IntegerType: return "IntegerType";
    case Verdict::CantorType: return "CantorType";
    case Verdict::AccumulatesOnProperSubset: return "AccumulatesOnProperSubset";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Classification classify(const OrbitSample& sample, const ComponentDecomposition& decomposition, DomainKind domain,
                        const ClassifyParams& params) {
  if (sample.points.empty()) throw Error(Errc::BadParams, "empty orbit sample");
  if (!(params.eps_dense > 0 && params.edge_margin > 0 && params.isolation_radius > 0 && params.min_points > 0))
    throw Error(Errc::BadParams, "classification parameters must be positive");
  if (decomposition.component_of(sample.base, domain) == ComponentDecomposition::npos)
    throw Error(Errc::BaseInP, to_string(sample.base) + " is a finite-orbit point");

  Classification out;
  Evidence& ev = out.evidence;
  ev.budget = sample.budget;
  ev.points = sample.points.size();
  ev.max_word_len_used = sample.max_word_len_used;

  const auto zones = zones_of(sample, decomposition, domain, params);
  const std::size_t half = sample.max_word_len_used / 2;
  std::size_t in_range = 0, isolated = 0, early = 0;
  Rational max_gap = 0;
  ev.cluster_counts.assign(kMaxScale, 0);
  for (const Zone& z : zones) {
    in_range += z.points.size();
    std::vector<Rational> xs;
    for (const auto* p : z.points) {
      Rational m = p->where.mid();
      if (domain == DomainKind::Circle && m < z.lo) m += 1;
      xs.push_back(m);
      if (p->depth <= half) ++early;
    }
    std::sort(xs.begin(), xs.end());
    if (xs.empty()) {
      max_gap = std::max(max_gap, Rational((z.hi - z.lo) / z.length));
    } else {
      max_gap = std::max({max_gap, Rational((xs.front() - z.lo) / z.length), Rational((z.hi - xs.back()) / z.length)});
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) max_gap = std::max(max_gap, Rational((xs[i] - xs[i - 1]) / z.length));
      const bool left_far = i == 0 || xs[i] - xs[i - 1] >= params.isolation_radius;
      const bool right_far = i + 1 == xs.size() || xs[i + 1] - xs[i] >= params.isolation_radius;
      if (left_far && right_far) ++isolated;
    }
    const auto rel = relative(z, decomposition, domain);
    for (int k = 1; k <= kMaxScale; ++k)
      ev.cluster_counts[static_cast<std::size_t>(k - 1)] += two_sided_clusters(rel, std::ldexp(1.0, -k));
  }
  ev.points_in_range = in_range;
  ev.max_gap_in_range = max_gap;
  ev.isolated_point_fraction = in_range == 0 ? 1.0 : static_cast<double>(isolated) / static_cast<double>(in_range);

  const bool enough = sample.points.size() >= params.min_points;
  if (max_gap < params.eps_dense && enough) {
    out.verdict = Verdict::Dense;
    out.level = 1;
    out.reason = "every gap inside the range is below eps_dense";
    ev.accumulation_set_summary = "whole range";
    return out;
  }

  const bool stable = sample.exhausted || (sample.max_word_len_used >= 2 && early == in_range);
  if (isolated == in_range && stable) {
    out.verdict = Verdict::IntegerType;
    out.level = 1;
    out.reason = std::to_string(in_range) + " isolated points away from the edges, unchanged since word length " +
                 std::to_string(half);
    ev.accumulation_set_summary = "finite-orbit points only";
    return out;
  }

  // Finest scale at which the two-sided clusters peak, and their growth over the
  // preceding dyadic scales.
  const auto& n = ev.cluster_counts;
  const std::size_t peak = static_cast<std::size_t>(std::max_element(n.begin(), n.end()) - n.begin());
  const std::size_t top = n[peak];
  std::ostringstream summary;
  if (top == 0 || peak < static_cast<std::size_t>(kWindow)) {
    summary << "no resolved two-sided accumulation";
    ev.accumulation_set_summary = summary.str();
    out.reason = isolated == in_range ? "isolated points, but the count still grows with word length"
                                      : "points accumulate below the resolved scales";
    return out;
  }
  const std::size_t base = std::max<std::size_t>(1, n[peak - kWindow]);
  const double growth = static_cast<double>(top) / static_cast<double>(base);
  summary << top << " clusters at scale 2^-" << peak + 1 << ", growth " << growth << " over " << kWindow
          << " dyadic scales";
  ev.accumulation_set_summary = summary.str();
  if (!enough) {
    out.reason = "fewer than min_points sample points";
    return out;
  }
  // A cluster count that holds steady across many refinements points at finitely
  // many accumulation points, none of them resolved as sample points.
  std::size_t run = 0, longest = 0, run_lo = 0, run_hi = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (n[k] >= 2 && run > 0 && 5 * std::max(run_hi, n[k]) <= 6 * std::min(run_lo, n[k])) {
      ++run;
      run_lo = std::min(run_lo, n[k]);
      run_hi = std::max(run_hi, n[k]);
    } else {
      run = n[k] >= 2 ? 1 : 0;
      run_lo = run_hi = n[k];
    }
    longest = std::max(longest, run);
  }
  if (longest >= kPlateau) {
    out.verdict = Verdict::AccumulatesOnProperSubset;
    out.reason = "cluster count steady over " + std::to_string(longest) + " dyadic scales";
    return out;
  }
  if (growth >= 2.5 && top >= 16) {
    out.verdict = Verdict::CantorType;
    out.level = 1;
    out.reason = "gaps persist at every resolved scale while accumulation clusters multiply";
    return out;
  }
  if (growth <= 1.5) {
    out.verdict = Verdict::AccumulatesOnProperSubset;
    out.reason = "accumulation concentrates on a stable finite set of clusters off the sample";
    return out;
  }
  out.reason = "cluster growth between the Cantor and proper-subset regimes";
  return out;
}

Classification classify_orbit(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                              const ClassifyParams& params, const OrbitOptions& options, bool double_budget) {
  const ComponentDecomposition dec = default_decomposition(system);
  if (dec.component_of(x, system.domain) == ComponentDecomposition::npos)
    throw Error(Errc::BaseInP, to_string(x) + " is a finite-orbit point");
  Classification c = classify(orbit(system, x, budget, options), dec, system.domain, params);
  if (double_budget) {
    const OrbitBudget twice{budget.max_word_len * 2, budget.max_points * 2};
    const Classification d = classify(orbit(system, x, twice, options), dec, system.domain, params);
    c.evidence.survived_doubling = d.verdict == c.verdict;
  }
  return c;
}

LevelEstimate estimate_level(const GeneratorSystem& system, const Rational& x, const std::vector<NamedRung>& ladder,
                             const OrbitBudget& budget, const ClassifyParams& params, const OrbitOptions& options) {
  const ComponentDecomposition dec = default_decomposition(system);
  if (dec.component_of(x, system.domain) == ComponentDecomposition::npos)
    throw Error(Errc::BaseInP, to_string(x) + " is a finite-orbit point");
  const Rational tol = options.dedup_tol;

  // Rungs away from the edges are compared; points near P(G) say nothing about levels.
  Rational lo, hi;
  if (system.domain == DomainKind::Interval01) {
    lo = params.edge_margin;
    hi = 1 - params.edge_margin;
  } else {
    lo = -pow2(60);
    hi = pow2(60);
  }

  std::vector<std::vector<Rational>> rung_samples;
  std::vector<int> levels;
  LevelEstimate out;
  auto level_against = [&](const std::vector<Rational>& xs, std::size_t upto, std::vector<RungEvidence>* record) {
    int level = 1;
    for (std::size_t r = 0; r < upto; ++r) {
      const Approach a = approach(rung_samples[r], xs, tol, lo, hi);
      const Approach b = approach(xs, rung_samples[r], tol, lo, hi);
      const bool disjoint = !a.touches && !b.touches;
      const bool acc = (b.closest_positive && *b.closest_positive < params.isolation_radius) ||
                       chains_onto(xs, rung_samples[r], tol, lo, hi);
      if (record) {
        RungEvidence& e = (*record)[r];
        e.accumulates = acc;
        e.disjoint = disjoint;
        e.closest_approach = b.closest_positive;
      }
      if (disjoint && acc) level = std::max(level, levels[r] + 1);
    }
    return level;
  };

  for (std::size_t r = 0; r < ladder.size(); ++r) {
    const OrbitSample s = orbit(system, ladder[r].point, budget, options);
    auto mids = sorted_mids(s);
    for (std::size_t q = 0; q < r; ++q)
      if (near_any(rung_samples[q], ladder[r].point, tol))
        throw Error(Errc::LadderPointCoincidesWithX, "ladder point '" + ladder[r].name +
                                                         "' lies on the orbit of '" + ladder[q].name + "'");
    levels.push_back(level_against(mids, r, nullptr));
    rung_samples.push_back(std::move(mids));
    RungEvidence e;
    e.name = ladder[r].name;
    e.point = ladder[r].point;
    e.level = levels.back();
    e.sample_points = s.points.size();
    out.rungs.push_back(e);
  }

  std::size_t upto = ladder.size();
  for (std::size_t r = 0; r < ladder.size(); ++r) {
    if (near_any(rung_samples[r], x, tol)) {
      out.rungs[r].contains_x = true;
      upto = r;
      break;
    }
  }
  const std::vector<Rational> xs =
      upto < ladder.size() ? rung_samples[upto] : sorted_mids(orbit(system, x, budget, options));
  out.level = level_against(xs, upto, &out.rungs);
  if (upto < ladder.size()) out.level = levels[upto];
  return out;
}

LevelEstimate estimate_level(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                             const ClassifyParams& params, const OrbitOptions& options) {
  std::vector<NamedRung> ladder;
  for (const auto& name : system.ladder) ladder.push_back({name, system.point(name)});
  return estimate_level(system, x, ladder, budget, params, options);
}

std::string parallel_name(ParallelVerdict v) {
  switch (v) {
    case ParallelVerdict::Parallel: return "Parallel";
    case ParallelVerdict::NotParallel: return "NotParallel";
    case ParallelVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

ParallelReport parallel_test(const GeneratorSystem& system, const Rational& x, const OrbitSample& z_sample,
                             const OrbitBudget& budget, const OrbitOptions& options) {
  const LabeledOrbit z = label_orbit(z_sample);
  const Rational tol = z_sample.dedup_tol;
  for (const auto& p : z.points)
    if (p.where.gap_to(Enclosure::exact(x)) < tol)
      throw Error(Errc::XOnReferenceOrbit, to_string(x) + " lies on the reference orbit");

  const long first = -z.base_index;
  const long last = static_cast<long>(z.points.size()) - 1 - z.base_index;
  // Label n of the interval (z_n, z_{n+1}) holding y, if both ends are sampled.
  auto interval_of = [&](const Enclosure& y) -> std::optional<long> {
    for (long n = first; n < last; ++n)
      if (z.at(n).where.hi < y.lo && y.hi < z.at(n + 1).where.lo) return n;
    return std::nullopt;
  };

  struct Count {
    std::map<long, std::vector<Rational>> by_interval;
    std::optional<long> crowded;
  };
  auto count = [&](const OrbitSample& s) {
    Count c;
    for (const auto& p : s.points)
      if (auto n = interval_of(p.where)) {
        auto& v = c.by_interval[*n];
        const Rational m = p.where.mid();
        const bool distinct = std::all_of(v.begin(), v.end(), [&](const Rational& q) { return abs_q(q - m) > tol; });
        if (distinct) v.push_back(m);
        if (v.size() >= 2 && !c.crowded) c.crowded = *n;
      }
    return c;
  };

  ParallelReport rep;
  const Count once = count(orbit(system, x, budget, options));
  rep.intervals_met = once.by_interval.size();
  if (once.crowded) {
    rep.verdict = ParallelVerdict::NotParallel;
    rep.crowded_interval = once.crowded;
    rep.reason = "I_" + std::to_string(*once.crowded) + " holds two orbit points";
    const Count again = count(orbit(system, x, {budget.max_word_len * 2, budget.max_points * 2}, options));
    rep.intervals_met_doubled = again.by_interval.size();
    rep.stable_under_doubling = again.crowded.has_value();
    return rep;
  }
  const Count again = count(orbit(system, x, {budget.max_word_len * 2, budget.max_points * 2}, options));
  rep.intervals_met_doubled = again.by_interval.size();
  if (again.crowded) {
    rep.verdict = ParallelVerdict::NotParallel;
    rep.crowded_interval = again.crowded;
    rep.reason = "doubling the budget puts a second point in I_" + std::to_string(*again.crowded);
    return rep;
  }
  rep.stable_under_doubling = true;
  if (rep.intervals_met < 3) {
    rep.reason = "the sample meets fewer than three labeled intervals";
    return rep;
  }
  rep.verdict = ParallelVerdict::Parallel;
  rep.reason = "one point in each of " + std::to_string(rep.intervals_met) + " intervals, unchanged after doubling";
  return rep;
}

}  // namespace circorb
