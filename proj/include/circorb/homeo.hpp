#pragma once

#include <vector>

#include "circorb/enclosure.hpp"
#include "circorb/generator_system.hpp"
#include "circorb/map_word.hpp"
#include "circorb/piecewise_map.hpp"

namespace circorb {

ValidationReport validate_map(const PiecewiseMap& map);

// Throws NonMonotonePiece (or GapInDomain for a jump) when the map is not usable.
void ensure_usable(const PiecewiseMap& map);

Enclosure eval(const PiecewiseMap& map, const Rational& x, const Rational& prec);
// Image of an enclosure under an increasing map: [lower(f(lo)), upper(f(hi))].
Enclosure eval(const PiecewiseMap& map, const Enclosure& x, const Rational& prec);

Enclosure invert_point(const PiecewiseMap& map, const Rational& y, const Rational& prec);
Enclosure invert_point(const PiecewiseMap& map, const Enclosure& y, const Rational& prec);

// map^power applied to an enclosure, iterating affine pieces in closed form.
Enclosure apply_power(const PiecewiseMap& map, long power, const Enclosure& x, const Rational& prec);

Enclosure eval_word(const GeneratorSystem& system, const MapWord& word, const Rational& x, const Rational& prec);
Enclosure eval_word(const GeneratorSystem& system, const MapWord& word, const Enclosure& x, const Rational& prec);

std::vector<FixedPointEnclosure> fixed_point_enclosures(const PiecewiseMap& map, const Rational& resolution);
// Restricted to [lo, hi] (both inside the domain).
std::vector<FixedPointEnclosure> fixed_point_enclosures(const PiecewiseMap& map, const Rational& resolution,
                                                        const Rational& lo, const Rational& hi);

PiecewiseMap compose_affine(const PiecewiseMap& a, const PiecewiseMap& b);

// Reduction of circle coordinates into [0, 1).
Rational mod1(const Rational& x);

// Building blocks for closed-form iteration, shared with the lazy rules.
std::optional<AffineSegment> forward_segment(const PiecewiseMap& map, const Rational& x);
std::optional<AffineSegment> inverse_segment(const PiecewiseMap& map, const Rational& y);
// Number of legal consecutive applications of seg from x (inside seg), capped.
long admissible_steps(const AffineSegment& seg, const Rational& x, long cap);
Rational affine_iterate(const AffineSegment& seg, const Rational& x, long steps);
// seg applied `steps` times, as one affine segment valid on the points whose
// first steps-1 iterates stay inside seg.
AffineSegment affine_power(const AffineSegment& seg, long steps);
// Fixed points of an affine segment restricted to [lo, hi].
void affine_fixed_points(const AffineSegment& seg, const Rational& lo, const Rational& hi, bool circle,
                         std::vector<FixedPointEnclosure>& out);

}  // namespace circorb
