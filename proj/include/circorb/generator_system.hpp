#pragma once

#include <string>
#include <utility>
#include <vector>

#include "circorb/piecewise_map.hpp"

namespace circorb {

struct NamedPoint {
  std::string name;
  Rational value;

  bool operator==(const NamedPoint&) const = default;
};

// Named generators acting on a common domain, a group when invertible.
struct GeneratorSystem {
  std::string name;
  DomainKind domain = DomainKind::Interval01;
  bool invertible = true;
  std::vector<PiecewiseMap> generators;
  std::vector<NamedPoint> designated;
  std::vector<std::string> ladder;
  // Points of finite orbits declared by the builder (circle systems).
  std::vector<Rational> finite_orbit_points;
  std::vector<std::string> notes;

  const PiecewiseMap& generator(const std::string& name) const;
  std::size_t generator_index(const std::string& name) const;
  bool has_generator(const std::string& name) const;
  const Rational& point(const std::string& name) const;
  std::vector<Rational> ladder_points() const;
};

}  // namespace circorb
