#pragma once

#include <set>
#include <string>
#include <vector>

#include "circorb/generator_system.hpp"
#include "circorb/map_word.hpp"
#include "circorb/piecewise_map.hpp"

namespace circorb {

struct OrbitBudget {
  std::size_t max_word_len = 8;
  std::size_t max_points = 2000;
};

struct OrbitPoint {
  Enclosure where;
  MapWord word;
  std::size_t depth = 0;  // search level at which the point was found
};

struct OrbitSample {
  Rational base;
  // Discovery order: breadth-first by word length, then canonical letter order.
  std::vector<OrbitPoint> points;
  std::size_t max_word_len_used = 0;
  Rational dedup_tol;
  OrbitBudget budget;
  // Candidates dropped because they fell within dedup_tol of a stored point
  // without overlapping it.
  std::vector<std::string> collisions;
  bool exhausted = false;  // no new points at the last explored length

  std::vector<Rational> sorted_midpoints() const;
};

struct OrbitOptions {
  Rational prec = pow2(-42);
  Rational dedup_tol = pow2(-40);
  unsigned workers = 0;  // 0 picks the hardware concurrency
  // When nonempty, search uses these words as letters (forward only) and word
  // length counts them; otherwise the generators and their inverses.
  std::vector<MapWord> alphabet;
};

// The letters available to breadth-first search: each generator, then its
// inverse when the system is a group and the generator is onto.
std::vector<Syllable> search_letters(const GeneratorSystem& system);

OrbitSample orbit(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                  const OrbitOptions& options = {});

std::vector<FixedPointEnclosure> common_fixed_points(const GeneratorSystem& system, const Rational& resolution);

struct Component {
  Rational lo;
  Rational hi;  // hi may exceed 1 for the arc that wraps on the circle
  bool unbounded = false;  // the whole line
  std::vector<MapWord> stabilizers;
};

struct ComponentDecomposition {
  std::vector<Rational> finite_orbit_points;
  std::vector<Component> components;

  // Index of the component containing x, or npos when x is one of the points.
  std::size_t component_of(const Rational& x, DomainKind kind) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Interval systems split at their fixed endpoints; line systems form one component.
ComponentDecomposition default_decomposition(const GeneratorSystem& system);

ComponentDecomposition reduce_circle(const GeneratorSystem& system, const std::vector<Rational>& points,
                                     std::size_t max_word_len, const Rational& tol = pow2(-40));

std::set<std::size_t> range_of(const GeneratorSystem& system, const ComponentDecomposition& decomposition,
                               const Rational& x, const OrbitBudget& budget, const OrbitOptions& options = {});

struct OverlapCertificate {
  std::string generator;
  Enclosure image;  // enclosure of g(J) from the images of J's endpoints
  bool overlaps = false;
};

struct WitnessInterval {
  Rational a;
  Rational b;
  enum class Condition { C1, C2 } condition = Condition::C1;
  std::string generator;  // the element used for C1
  bool c2_also_holds = false;
  std::vector<OverlapCertificate> certificates;
  std::vector<std::string> notes;
};

std::string condition_name(WitnessInterval::Condition c);

WitnessInterval witness_interval(const GeneratorSystem& system, const Rational& resolution = pow2(-30));

// Re-evaluates every generator at J's endpoints and checks the recorded overlaps.
bool verify_witness(const GeneratorSystem& system, const WitnessInterval& w);

// Consecutive orbit points z_i labeled around the base z_0, ordered by position.
struct LabeledOrbit {
  std::vector<OrbitPoint> points;
  long base_index = 0;

  const OrbitPoint& at(long i) const;
  bool has(long i) const { return i + base_index >= 0 && i + base_index < static_cast<long>(points.size()); }
};

LabeledOrbit label_orbit(const OrbitSample& sample);

MapWord transport_word(const GeneratorSystem& system, const OrbitSample& z_orbit, long i, long j,
                       const OrbitOptions& options = {});

std::vector<MapWord> stabilizer_words(const GeneratorSystem& system, const Rational& a, const Rational& b,
                                      std::size_t max_word_len, const OrbitOptions& options = {});

// All freely reduced words of length <= max_len over the search letters, shortlex.
std::vector<MapWord> enumerate_words(const GeneratorSystem& system, std::size_t max_len);

}  // namespace circorb
