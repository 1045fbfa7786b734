#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "circorb/cantor.hpp"
#include "circorb/piecewise_map.hpp"

namespace circorb {

// Finitely many exact affine segments tiling [lo, hi], increasing.
class SegmentRule : public PieceRule {
 public:
  explicit SegmentRule(std::vector<AffineSegment> segments, std::optional<SplitHomeoSpec> origin = std::nullopt);

  std::string kind() const override { return origin_ ? "cantor-split" : "segments"; }
  Enclosure eval(const Rational& x, const Rational& prec) const override;
  Enclosure invert(const Rational& y, const Rational& prec) const override;
  std::optional<AffineSegment> affine_at(const Rational& x) const override;

  const std::vector<AffineSegment>& segments() const { return segments_; }
  // The split-homeo data this rule was built from, if any.
  const std::optional<SplitHomeoSpec>& origin() const { return origin_; }
  const Rational& lo() const { return *segments_.front().lo; }
  const Rational& hi() const { return *segments_.back().hi; }

 private:
  std::size_t index_of(const Rational& x) const;
  std::size_t index_of_image(const Rational& y) const;

  std::vector<AffineSegment> segments_;
  std::optional<SplitHomeoSpec> origin_;
};

RulePtr make_segment_rule(std::vector<AffineSegment> segments);

// Maps psi_n : D -> D indexed by an integer; a null rule means the identity.
class PsiFamily {
 public:
  virtual ~PsiFamily() = default;
  virtual std::string kind() const = 0;
  virtual RulePtr at(long n) const = 0;
};

using PsiFamilyPtr = std::shared_ptr<const PsiFamily>;

// psi_n = maps[n - first] for n in range, otherwise fallback (identity when null).
class ListFamily : public PsiFamily {
 public:
  ListFamily(long first, std::vector<RulePtr> maps, RulePtr fallback = nullptr)
      : first_(first), maps_(std::move(maps)), fallback_(std::move(fallback)) {}

  std::string kind() const override { return "list"; }
  RulePtr at(long n) const override;

  long first() const { return first_; }
  const std::vector<RulePtr>& maps() const { return maps_; }
  const RulePtr& fallback() const { return fallback_; }

 private:
  long first_;
  std::vector<RulePtr> maps_;
  RulePtr fallback_;
};

// psi_n is the split homeo of K = [k_lo, k_hi] onto itself pinned by
// quad_unrank(n + offset) (p1 -> p1s, p2 -> p2s), and the identity on [k_hi, d_hi].
class QuadSplitFamily : public PsiFamily {
 public:
  QuadSplitFamily(Rational k_lo, Rational k_hi, Rational d_hi, long offset);

  std::string kind() const override { return "quad-split"; }
  RulePtr at(long n) const override;

  const Rational& k_lo() const { return k_lo_; }
  const Rational& k_hi() const { return k_hi_; }
  const Rational& d_hi() const { return d_hi_; }
  long offset() const { return offset_; }

 private:
  Rational k_lo_, k_hi_, d_hi_;
  long offset_;
  mutable std::mutex mutex_;
  mutable std::map<long, RulePtr> cache_;
};

struct ConjugationSpec {
  PiecewiseMap phi;
  Rational d0;
  int shift = 0;
  PsiFamilyPtr psi;
  std::optional<Rational> lo;
  std::optional<Rational> hi;
};

// f(x) = phi^(n+shift)(psi_n(phi^-n(x))) on the cell phi^n([d0, phi(d0)]).
// phi must be all-affine with phi(d0) > d0; shift 0 gives a map preserving every
// cell, shift 1 a map carrying each cell to the next. Points fixed by phi
// (accumulation points of the cells) are fixed by f.
class ConjugationRule : public PieceRule {
 public:
  explicit ConjugationRule(ConjugationSpec spec);

  std::string kind() const override { return "conjugation"; }
  Enclosure eval(const Rational& x, const Rational& prec) const override;
  Enclosure invert(const Rational& y, const Rational& prec) const override;
  std::optional<AffineSegment> affine_at(const Rational& x) const override;
  std::optional<std::vector<FixedPointEnclosure>> fixed_points(const Rational& lo, const Rational& hi,
                                                               const Rational& resolution) const override;

  struct Cell {
    long n = 0;
    Rational y;  // phi^-n(x), in [d0, d1)
  };
  // Throws OutOfDomain for points fixed by phi.
  Cell locate(const Rational& x) const;

  const ConjugationSpec& spec() const { return spec_; }
  const Rational& d1() const { return d1_; }

 private:
  bool accumulates_at(const Rational& x) const;

  ConjugationSpec spec_;
  Rational d1_;
};

// phi^k(x) exactly for an all-affine map, with the affine segment realizing it near x.
struct IterateResult {
  Rational value;
  AffineSegment segment;
};
IterateResult iterate_affine_map(const PiecewiseMap& phi, long k, const Rational& x);

// outer after inner, on the points of inner's domain that inner sends into outer's domain.
AffineSegment compose_segments(const AffineSegment& outer, const AffineSegment& inner);

}  // namespace circorb
