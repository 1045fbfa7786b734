#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "circorb/enclosure.hpp"

namespace circorb {

enum class DomainKind { Interval01, Circle, Line };

std::string domain_kind_name(DomainKind kind);
DomainKind parse_domain_kind(const std::string& text);

// An exact affine map x -> slope*x + offset on [lo, hi]; unbounded ends are nullopt.
struct AffineSegment {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  Rational slope;
  Rational offset;

  Rational apply(const Rational& x) const { return slope * x + offset; }
  Rational unapply(const Rational& y) const { return (y - offset) / slope; }
  // The same segment read backwards: defined on the image, mapping back to the domain.
  AffineSegment inverse() const;
  bool contains(const Rational& x) const { return (!lo || *lo <= x) && (!hi || x <= *hi); }
};

enum class FixedKind { Certified, Possible, Interval };

struct FixedPointEnclosure {
  Enclosure where;
  FixedKind kind = FixedKind::Possible;
};

// A lazily evaluated increasing homeomorphism between two intervals. Every
// implementation in this library is piecewise affine with exact rational data,
// possibly with infinitely many pieces.
class PieceRule {
 public:
  virtual ~PieceRule() = default;

  virtual std::string kind() const = 0;
  virtual Enclosure eval(const Rational& x, const Rational& prec) const = 0;
  virtual Enclosure invert(const Rational& y, const Rational& prec) const = 0;

  // An affine segment through x, if the rule is affine near x.
  virtual std::optional<AffineSegment> affine_at(const Rational& x) const = 0;

  // Fixed points in [lo, hi] at the given resolution, or nullopt when the rule
  // cannot enumerate them; the default walks the affine decomposition.
  virtual std::optional<std::vector<FixedPointEnclosure>> fixed_points(const Rational& lo, const Rational& hi,
                                                                       const Rational& resolution) const;
};

// Exact affine decomposition of a rule over [lo, hi], or nullopt if more than
// max_segments are needed.
std::optional<std::vector<AffineSegment>> affine_segments(const PieceRule& rule, const Rational& lo,
                                                          const Rational& hi, std::size_t max_segments);

using RulePtr = std::shared_ptr<const PieceRule>;

struct AffineForm {
  Rational slope;
  Rational offset;
};

// x -> c * ((x - a) / s)^e + b
struct PowerForm {
  Rational c;
  Rational a;
  Rational b;
  Rational e;
  Rational s{1};
};

struct Piece {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  std::variant<AffineForm, PowerForm, RulePtr> form;

  static Piece affine(Rational lo, Rational hi, Rational slope, Rational offset);
  static Piece power(Rational lo, Rational hi, PowerForm form);
  static Piece with_rule(Rational lo, Rational hi, RulePtr rule);

  bool is_affine() const { return std::holds_alternative<AffineForm>(form); }
  bool is_power() const { return std::holds_alternative<PowerForm>(form); }
  bool is_rule() const { return std::holds_alternative<RulePtr>(form); }
  bool contains(const Rational& x) const { return (!lo || *lo <= x) && (!hi || x <= *hi); }
};

struct BreakpointCheck {
  Rational at;
  Enclosure left_value;
  Enclosure right_value;
  bool continuous = false;
};

struct ValidationReport {
  std::vector<BreakpointCheck> breakpoints;
  std::vector<bool> piece_monotone;
  bool continuous = true;
  bool monotone = true;
  bool fixes_zero = false;
  bool fixes_one = false;
  bool surjective = false;
  bool usable = false;
  std::vector<std::string> problems;
};

// A monotone map given by pieces that tile its domain. Interval01 maps tile
// [0,1]; Circle maps tile [0,1] with a degree-one lift; Line maps may have
// unbounded first and last pieces. Immutable once built.
class PiecewiseMap {
 public:
  // Throws OverlappingPieces / GapInDomain when the pieces do not tile the domain.
  PiecewiseMap(std::string name, DomainKind kind, std::vector<Piece> pieces);

  const std::string& name() const { return name_; }
  DomainKind domain_kind() const { return kind_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const ValidationReport& report() const { return *report_; }
  bool usable() const { return report_->usable; }
  bool surjective() const { return report_->surjective; }
  bool all_affine() const;

  // Index of the first piece containing x; throws OutOfDomain.
  std::size_t piece_index(const Rational& x) const;

  PiecewiseMap renamed(std::string name) const;

 private:
  std::string name_;
  DomainKind kind_;
  std::vector<Piece> pieces_;
  std::shared_ptr<const ValidationReport> report_;
};

}  // namespace circorb
