#include "circorb/action.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "circorb/error.hpp"
#include "circorb/homeo.hpp"

namespace circorb {

namespace {

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1 || n < 16) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_lock;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> hold(failure_lock);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool cancels(const MapWord& word, const Syllable& letter) {
  if (word.empty()) return false;
  const Syllable& last = word.syllables().back();
  return last.generator == letter.generator && (last.power > 0) != (letter.power > 0);
}

Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// Largest distance between a point of a and a point of b.
Rational spread(const Enclosure& a, const Enclosure& b) {
  return std::max(abs_q(a.hi - b.lo), abs_q(b.hi - a.lo));
}

Rational circle_distance(const Rational& x, const Rational& y) {
  const Rational d = mod1(x - y);
  return std::min(d, Rational(1 - d));
}

class DedupIndex {
 public:
  DedupIndex(Rational tol, bool circle) : tol_(std::move(tol)), circle_(circle) {}

  // Index of a stored point within tol of e, if any.
  std::optional<std::size_t> near(const Enclosure& e, const std::vector<OrbitPoint>& pts) const {
    auto check = [&](std::map<Rational, std::size_t>::const_iterator it) -> std::optional<std::size_t> {
      if (it == by_lo_.end()) return std::nullopt;
      const Enclosure& s = pts[it->second].where;
      if (s.gap_to(e) < tol_) return it->second;
      if (circle_ && (circle_distance(s.lo, e.hi) < tol_ || circle_distance(e.lo, s.hi) < tol_)) return it->second;
      return std::nullopt;
    };
    auto it = by_lo_.lower_bound(e.lo);
    if (auto hit = check(it)) return hit;
    if (it != by_lo_.begin())
      if (auto hit = check(std::prev(it))) return hit;
    if (circle_ && !by_lo_.empty()) {
      if (auto hit = check(by_lo_.begin())) return hit;
      if (auto hit = check(std::prev(by_lo_.end()))) return hit;
    }
    return std::nullopt;
  }

  void insert(const Enclosure& e, std::size_t index) { by_lo_.emplace(e.lo, index); }

 private:
  Rational tol_;
  bool circle_;
  std::map<Rational, std::size_t> by_lo_;
};

struct Candidate {
  std::size_t parent;
  std::size_t letter;
  std::optional<Enclosure> where;
};

Enclosure step(const GeneratorSystem& system, const OrbitSample& s, const OrbitPoint& parent, const MapWord& letter,
               const MapWord& word, const OrbitOptions& opt) {
  const Rational cap = opt.dedup_tol / 4;
  Enclosure e;
  if (letter.syllables().size() == 1) {
    const Syllable& l = letter.syllables().front();
    e = apply_power(system.generator(l.generator), l.power, parent.where, opt.prec);
  } else {
    e = eval_word(system, letter, parent.where, opt.prec);
  }
  if (e.width() > cap) e = eval_word(system, word, s.base, std::min(opt.prec, cap));
  // Keep stored endpoints small: huge exact rationals are widened onto a fine dyadic grid.
  const long bits = bits_for(opt.prec) + 16;
  const std::size_t limit = static_cast<std::size_t>(4 * bits + 256);
  if (bit_size(e.lo) > limit || bit_size(e.hi) > limit) {
    e = {floor_dyadic(e.lo, bits), ceil_dyadic(e.hi, bits)};
    if (e.width() > cap) e = eval_word(system, word, s.base, std::min(opt.prec, cap));
  }
  return e;
}

bool is_endpoint_fixed(const FixedPointEnclosure& f) { return f.where.contains(Rational(0)) || f.where.contains(Rational(1)); }

std::optional<Enclosure> intersect(const Enclosure& a, const Enclosure& b) {
  if (!a.intersects(b)) return std::nullopt;
  return Enclosure{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

int kind_rank(FixedKind k) {
  switch (k) {
    case FixedKind::Interval: return 0;
    case FixedKind::Certified: return 1;
    case FixedKind::Possible: return 2;
  }
  return 2;
}

FixedKind meet_kind(const FixedPointEnclosure& a, const FixedPointEnclosure& b, const Enclosure& where) {
  if (a.kind == FixedKind::Interval && b.kind == FixedKind::Interval) return FixedKind::Interval;
  if (a.kind == FixedKind::Interval) return b.kind;
  if (b.kind == FixedKind::Interval) return a.kind;
  if (a.kind == FixedKind::Certified && b.kind == FixedKind::Certified && where.is_exact()) return FixedKind::Certified;
  return FixedKind::Possible;
}

OverlapCertificate overlap_certificate(const PiecewiseMap& g, const Rational& a, const Rational& b,
                                       const Rational& prec) {
  OverlapCertificate c;
  c.generator = g.name();
  const Enclosure ga = eval(g, a, prec), gb = eval(g, b, prec);
  c.image = {ga.lo, gb.hi};
  // [g(a), g(b)] meets [a, b] exactly when g(a) <= b and g(b) >= a.
  c.overlaps = ga.hi <= b && gb.lo >= a;
  return c;
}

struct InteriorFixed {
  std::vector<FixedPointEnclosure> points;
  bool bounded_away = true;
};

InteriorFixed interior_fixed(const PiecewiseMap& g, const Rational& resolution) {
  InteriorFixed out;
  for (const auto& f : fixed_point_enclosures(g, resolution)) {
    if (f.kind != FixedKind::Interval && is_endpoint_fixed(f)) continue;
    if (f.where.lo <= resolution || f.where.hi >= 1 - resolution) out.bounded_away = false;
    out.points.push_back(f);
  }
  return out;
}

// Widens [a, b] toward the ends until pred holds, halving the distance to 0 and 1.
std::optional<std::pair<Rational, Rational>> grow(Rational a, Rational b,
                                                  const std::function<bool(const Rational&, const Rational&)>& pred) {
  for (int i = 0; i < 64; ++i) {
    if (pred(a, b)) return std::make_pair(a, b);
    a /= 2;
    b = 1 - (1 - b) / 2;
  }
  return std::nullopt;
}

bool maps_onto(const GeneratorSystem& system, const MapWord& w, const Rational& a, const Rational& b,
               const Rational& tol, const Rational& prec) {
  const bool circle = system.domain == DomainKind::Circle;
  auto close = [&](const Enclosure& e, const Rational& target) {
    if (circle) return circle_distance(e.lo, target) < tol && circle_distance(e.hi, target) < tol;
    return spread(e, Enclosure::exact(target)) < tol;
  };
  if (!close(eval_word(system, w, a, prec), a) || !close(eval_word(system, w, b, prec), b)) return false;
  const Rational mid = (a + b) / 2;
  const Enclosure m = eval_word(system, w, mid, prec);
  if (circle) {
    // Measure positions along the arc starting at a.
    const Rational len = mod1(b - a) == 0 ? Rational(1) : mod1(b - a);
    const Rational lo = mod1(m.lo - a), hi = mod1(m.hi - a);
    return lo > 0 && lo < len && hi > 0 && hi < len;
  }
  return m.lo > a && m.hi < b;
}

}  // namespace

std::vector<Rational> OrbitSample::sorted_midpoints() const {
  std::vector<Rational> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.where.mid());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Syllable> search_letters(const GeneratorSystem& system) {
  std::vector<Syllable> out;
  for (const auto& g : system.generators) {
    out.push_back({g.name(), 1});
    if (system.invertible && g.surjective()) out.push_back({g.name(), -1});
  }
  return out;
}

OrbitSample orbit(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                  const OrbitOptions& options) {
  if (options.prec <= 0 || options.dedup_tol <= 0) throw Error(Errc::BadParams, "prec and dedup_tol must be positive");
  if (budget.max_points == 0) throw Error(Errc::BadParams, "max_points must be positive");
  const bool circle = system.domain == DomainKind::Circle;
  if (system.domain == DomainKind::Interval01 && (x < 0 || x > 1))
    throw Error(Errc::OutOfDomain, to_string(x) + " is outside [0,1]");

  OrbitSample s;
  s.base = circle ? mod1(x) : x;
  s.dedup_tol = options.dedup_tol;
  s.budget = budget;
  s.points.push_back({Enclosure::exact(s.base), MapWord()});
  DedupIndex index(options.dedup_tol, circle);
  index.insert(s.points.front().where, 0);

  const bool custom = !options.alphabet.empty();
  std::vector<MapWord> letters = options.alphabet;
  const auto basic = search_letters(system);
  if (!custom)
    for (const auto& l : basic) letters.push_back(MapWord::letter(l.generator, l.power));
  for (const auto& l : letters) {
    if (l.empty()) throw Error(Errc::BadParams, "alphabet words must be nonempty");
    for (const auto& syl : l.syllables()) system.generator(syl.generator);
  }
  std::vector<std::size_t> frontier{0};
  for (std::size_t len = 1; len <= budget.max_word_len && s.points.size() < budget.max_points; ++len) {
    std::vector<Candidate> cands;
    for (std::size_t p : frontier)
      for (std::size_t l = 0; l < letters.size(); ++l)
        if (custom || !cancels(s.points[p].word, basic[l])) cands.push_back({p, l, std::nullopt});
    parallel_for(cands.size(), options.workers, [&](std::size_t i) {
      Candidate& c = cands[i];
      const OrbitPoint& parent = s.points[c.parent];
      try {
        c.where = step(system, s, parent, letters[c.letter], parent.word.then(letters[c.letter]), options);
      } catch (const Error& e) {
        if (e.code() != Errc::OutOfDomain && e.code() != Errc::NotInImage) throw;
      }
    });
    s.max_word_len_used = len;
    std::vector<std::size_t> next;
    for (const Candidate& c : cands) {
      if (s.points.size() >= budget.max_points) break;
      if (!c.where) continue;
      MapWord w = s.points[c.parent].word.then(letters[c.letter]);
      if (auto hit = index.near(*c.where, s.points)) {
        const Enclosure& stored = s.points[*hit].where;
        if (!stored.intersects(*c.where))
          s.collisions.push_back(w.str() + " ~ " + s.points[*hit].word.str() + " (gap " +
                                 to_string(stored.gap_to(*c.where)) + ")");
        continue;
      }
      index.insert(*c.where, s.points.size());
      next.push_back(s.points.size());
      s.points.push_back({*c.where, std::move(w), len});
    }
    if (next.empty()) {
      s.exhausted = true;
      break;
    }
    frontier = std::move(next);
  }
  return s;
}

std::vector<FixedPointEnclosure> common_fixed_points(const GeneratorSystem& system, const Rational& resolution) {
  if (resolution <= 0) throw Error(Errc::BadParams, "resolution must be positive");
  if (system.generators.empty()) return {};
  std::vector<FixedPointEnclosure> acc = fixed_point_enclosures(system.generators.front(), resolution);
  for (std::size_t i = 1; i < system.generators.size(); ++i) {
    const auto other = fixed_point_enclosures(system.generators[i], resolution);
    std::vector<FixedPointEnclosure> next;
    for (const auto& a : acc)
      for (const auto& b : other)
        if (auto w = intersect(a.where, b.where)) next.push_back({*w, meet_kind(a, b, *w)});
    std::sort(next.begin(), next.end(), [](const auto& p, const auto& q) {
      if (p.where.lo != q.where.lo) return p.where.lo < q.where.lo;
      return kind_rank(p.kind) < kind_rank(q.kind);
    });
    acc = std::move(next);
  }
  return acc;
}

std::size_t ComponentDecomposition::component_of(const Rational& x, DomainKind kind) const {
  const Rational y = kind == DomainKind::Circle ? mod1(x) : x;
  for (const Rational& p : finite_orbit_points)
    if ((kind == DomainKind::Circle ? mod1(p) : p) == y) return npos;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Component& c = components[i];
    if (c.unbounded) return i;
    if (c.lo < y && y < c.hi) return i;
    if (kind == DomainKind::Circle && c.lo < y + 1 && y + 1 < c.hi) return i;
  }
  return npos;
}

ComponentDecomposition default_decomposition(const GeneratorSystem& system) {
  ComponentDecomposition d;
  std::vector<MapWord> all;
  for (const auto& g : system.generators) all.push_back(MapWord::letter(g.name()));
  switch (system.domain) {
    case DomainKind::Interval01:
      d.finite_orbit_points = {Rational(0), Rational(1)};
      d.components.push_back({Rational(0), Rational(1), false, all});
      break;
    case DomainKind::Line:
      d.components.push_back({Rational(0), Rational(0), true, all});
      break;
    case DomainKind::Circle: {
      auto pts = system.finite_orbit_points;
      if (pts.empty()) pts.push_back(Rational(0));
      return reduce_circle(system, pts, 2);
    }
  }
  return d;
}

ComponentDecomposition reduce_circle(const GeneratorSystem& system, const std::vector<Rational>& points,
                                     std::size_t max_word_len, const Rational& tol) {
  if (system.domain != DomainKind::Circle) throw Error(Errc::BadParams, "reduce_circle needs a circle system");
  if (points.empty()) throw Error(Errc::BadParams, "P must be nonempty");
  std::vector<Rational> pts;
  for (const auto& p : points) pts.push_back(mod1(p));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const Rational prec = tol / 4;
  for (const auto& g : system.generators)
    for (const auto& p : pts) {
      const Enclosure e = eval(g, p, prec);
      const bool lands = std::any_of(pts.begin(), pts.end(), [&](const Rational& q) {
        return circle_distance(e.lo, q) < tol && circle_distance(e.hi, q) < tol;
      });
      if (!lands)
        throw Error(Errc::PNotInvariant,
                    "generator '" + g.name() + "' moves " + to_string(p) + " to " + e.str() + ", off P");
    }

  ComponentDecomposition d;
  d.finite_orbit_points = pts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Rational lo = pts[i];
    const Rational hi = i + 1 < pts.size() ? pts[i + 1] : pts.front() + 1;
    d.components.push_back({lo, hi, false, {}});
  }
  const auto words = enumerate_words(system, max_word_len);
  for (auto& c : d.components)
    for (const auto& w : words) {
      try {
        if (maps_onto(system, w, c.lo, c.hi, tol, prec)) c.stabilizers.push_back(w);
      } catch (const Error&) {
      }
    }
  return d;
}

std::set<std::size_t> range_of(const GeneratorSystem& system, const ComponentDecomposition& decomposition,
                               const Rational& x, const OrbitBudget& budget, const OrbitOptions& options) {
  const std::size_t own = decomposition.component_of(x, system.domain);
  if (own == ComponentDecomposition::npos) throw Error(Errc::BaseInP, to_string(x) + " is a finite-orbit point");
  std::set<std::size_t> out{own};
  if (budget.max_word_len == 0) return out;
  const OrbitSample s = orbit(system, x, budget, options);
  for (const auto& p : s.points) {
    const std::size_t c = decomposition.component_of(p.where.mid(), system.domain);
    if (c != ComponentDecomposition::npos) out.insert(c);
  }
  return out;
}

std::string condition_name(WitnessInterval::Condition c) { return c == WitnessInterval::Condition::C1 ? "C1" : "C2"; }

WitnessInterval witness_interval(const GeneratorSystem& system, const Rational& resolution) {
  if (system.domain != DomainKind::Interval01)
    throw Error(Errc::BadParams, "witness intervals are defined for systems on [0,1]");
  if (system.generators.empty()) throw Error(Errc::NeitherConditionVerified, "system has no generators");
  const Rational prec = resolution / 4;
  std::vector<std::string> blocked;

  std::vector<InteriorFixed> fixed;
  for (const auto& g : system.generators) fixed.push_back(interior_fixed(g, resolution));

  auto try_c2 = [&](const Rational& a0, const Rational& b0) -> std::optional<WitnessInterval> {
    for (const auto& c : common_fixed_points(system, resolution))
      if (c.kind == FixedKind::Interval || !is_endpoint_fixed(c)) {
        blocked.push_back("C2: common interior fixed point near " + c.where.str());
        return std::nullopt;
      }
    const auto j = grow(a0, b0, [&](const Rational& a, const Rational& b) {
      return std::all_of(system.generators.begin(), system.generators.end(),
                         [&](const PiecewiseMap& g) { return overlap_certificate(g, a, b, prec).overlaps; });
    });
    if (!j) {
      blocked.push_back("C2: no central interval overlapped by every generator");
      return std::nullopt;
    }
    WitnessInterval w;
    w.a = j->first;
    w.b = j->second;
    w.condition = WitnessInterval::Condition::C2;
    w.c2_also_holds = true;
    for (const auto& g : system.generators) w.certificates.push_back(overlap_certificate(g, w.a, w.b, prec));
    return w;
  };

  auto try_c1 = [&](std::size_t i) -> std::optional<WitnessInterval> {
    const PiecewiseMap& g = system.generators[i];
    const InteriorFixed& f = fixed[i];
    if (!f.bounded_away) {
      blocked.push_back("C1(" + g.name() + "): fixed points reach within " + to_string(resolution) + " of 0 or 1");
      return std::nullopt;
    }
    Rational a(1, 4), b(3, 4);
    if (!f.points.empty()) {
      Rational lo = f.points.front().where.lo, hi = f.points.front().where.hi;
      for (const auto& p : f.points) {
        lo = std::min(lo, p.where.lo);
        hi = std::max(hi, p.where.hi);
      }
      a = std::min(a, Rational(lo / 2));
      b = std::max(b, Rational((1 + hi) / 2));
    }
    const auto j = grow(a, b, [&](const Rational& x, const Rational& y) { return overlap_certificate(g, x, y, prec).overlaps; });
    if (!j) {
      blocked.push_back("C1(" + g.name() + "): no interval overlapped by its image");
      return std::nullopt;
    }
    WitnessInterval w;
    w.a = j->first;
    w.b = j->second;
    w.condition = WitnessInterval::Condition::C1;
    w.generator = g.name();
    w.certificates.push_back(overlap_certificate(g, w.a, w.b, prec));
    w.notes.push_back("non-accumulation of fixed points at 0 and 1 is certified down to resolution " +
                      to_string(resolution) + " only");
    return w;
  };

  const bool all_free = std::all_of(fixed.begin(), fixed.end(), [](const InteriorFixed& f) { return f.points.empty(); });
  if (all_free && system.generators.size() > 1) {
    // With no interior fixed points anywhere the joint certificate covers every generator.
    if (auto w = try_c2(Rational(1, 4), Rational(3, 4))) return *w;
  }
  for (std::size_t i = 0; i < system.generators.size(); ++i) {
    if (auto w = try_c1(i)) {
      if (auto both = try_c2(w->a, w->b); both && both->a == w->a && both->b == w->b) {
        w->c2_also_holds = true;
        w->certificates = both->certificates;
      }
      return *w;
    }
  }
  if (auto w = try_c2(Rational(1, 4), Rational(3, 4))) return *w;
  std::string why;
  for (const auto& b : blocked) why += (why.empty() ? "" : "; ") + b;
  throw Error(Errc::NeitherConditionVerified, why);
}

bool verify_witness(const GeneratorSystem& system, const WitnessInterval& w) {
  if (!(w.a < w.b) || w.certificates.empty()) return false;
  const Rational prec = pow2(-50);
  for (const auto& c : w.certificates) {
    const PiecewiseMap& g = system.generator(c.generator);
    const Enclosure ga = eval(g, w.a, prec), gb = eval(g, w.b, prec);
    if (!(ga.hi <= w.b && gb.lo >= w.a)) return false;
  }
  if (w.condition == WitnessInterval::Condition::C2) {
    if (w.certificates.size() != system.generators.size()) return false;
    return true;
  }
  const PiecewiseMap& g = system.generator(w.generator);
  for (const auto& f : fixed_point_enclosures(g, pow2(-30))) {
    if (f.kind != FixedKind::Interval && is_endpoint_fixed(f)) continue;
    if (!(w.a < f.where.lo && f.where.hi < w.b)) return false;
  }
  return true;
}

const OrbitPoint& LabeledOrbit::at(long i) const {
  if (!has(i)) throw Error(Errc::BudgetExhausted, "orbit label " + std::to_string(i) + " is outside the sample");
  return points[static_cast<std::size_t>(i + base_index)];
}

LabeledOrbit label_orbit(const OrbitSample& sample) {
  LabeledOrbit out;
  out.points = sample.points;
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const OrbitPoint& a, const OrbitPoint& b) { return a.where.lo < b.where.lo; });
  for (std::size_t i = 0; i < out.points.size(); ++i)
    if (out.points[i].word.empty()) out.base_index = static_cast<long>(i);
  return out;
}

MapWord transport_word(const GeneratorSystem& system, const OrbitSample& z_orbit, long i, long j,
                       const OrbitOptions& options) {
  if (!system.invertible) throw Error(Errc::BadParams, "transport needs an invertible system");
  if (i == j) return MapWord();
  const LabeledOrbit z = label_orbit(z_orbit);
  for (long k : {i, i + 1, j, j + 1})
    if (!z.has(k))
      throw Error(Errc::BudgetExhausted, "z_" + std::to_string(k) + " is not in the reference orbit sample");
  const MapWord w = z.at(i).word.inverse().then(z.at(j).word);
  const Rational tol = z_orbit.dedup_tol;
  const Rational prec = std::min(options.prec, Rational(tol / 8));
  for (long d : {0L, 1L}) {
    const Enclosure image = eval_word(system, w, z.at(i + d).where, prec);
    if (!(spread(image, z.at(j + d).where) < tol))
      throw Error(Errc::BudgetExhausted, "word '" + w.str() + "' does not carry z_" + std::to_string(i + d) +
                                             " onto z_" + std::to_string(j + d));
  }
  return w;
}

std::vector<MapWord> enumerate_words(const GeneratorSystem& system, std::size_t max_len) {
  const auto letters = search_letters(system);
  std::vector<MapWord> out{MapWord()};
  std::vector<MapWord> layer{MapWord()};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<MapWord> next;
    for (const auto& w : layer)
      for (const auto& l : letters)
        if (!cancels(w, l)) next.push_back(w.then(MapWord::letter(l.generator, l.power)));
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

std::vector<MapWord> stabilizer_words(const GeneratorSystem& system, const Rational& a, const Rational& b,
                                      std::size_t max_word_len, const OrbitOptions& options) {
  if (!system.invertible) throw Error(Errc::BadParams, "stabilizer search needs an invertible system");
  const auto words = enumerate_words(system, max_word_len);
  std::vector<char> keep(words.size(), 0);
  const Rational prec = std::min(options.prec, Rational(options.dedup_tol / 8));
  parallel_for(words.size(), options.workers, [&](std::size_t i) {
    try {
      keep[i] = maps_onto(system, words[i], a, b, options.dedup_tol, prec) ? 1 : 0;
    } catch (const Error& e) {
      if (e.code() != Errc::OutOfDomain && e.code() != Errc::NotInImage) throw;
    }
  });
  std::vector<MapWord> out;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (keep[i]) out.push_back(words[i]);
  return out;
}

}  // namespace circorb
