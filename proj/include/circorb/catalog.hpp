#pragma once

#include <map>
#include <string>
#include <vector>

#include "circorb/generator_system.hpp"

namespace circorb {

struct ExampleSpec {
  std::string name;
  // Overrides by parameter name; values are rational or integer strings.
  std::map<std::string, std::string> params;
  bool as_printed = false;  // semigroup only: keep the unrepaired formulas
};

const std::vector<std::string>& catalog_names();

GeneratorSystem build_example(const ExampleSpec& spec);
GeneratorSystem build_example(const std::string& name);

// The two-piece base map: 2x on [0,1/4], then the line through (1/4,1/2) and (1,1).
PiecewiseMap base_map(const std::string& name = "g");

// base_map conjugated onto [a, b] by the increasing affine chart, as segments.
std::vector<AffineSegment> rescaled_base(const Rational& a, const Rational& b);
// The same map on [0,1], extended by the identity outside [a, b].
PiecewiseMap rescaled_base_map(const Rational& a, const Rational& b, const std::string& name);

// Intervals A_1, A_2, ... of the nested construction: A_{k+1} starts at the
// midpoint of A_k and ends at its image under the rescaled base map.
std::vector<std::pair<Rational, Rational>> nested_intervals(int depth);

}  // namespace circorb
