#pragma once

#include <array>
#include <compare>
#include <optional>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "circorb/enclosure.hpp"
#include "circorb/map_word.hpp"
#include "circorb/piecewise_map.hpp"

namespace circorb {

enum class TailKind { AllZeros, AllTwos, Periodic };

// A point of the middle-thirds Cantor set written as prefix digits over {0,2}
// followed by an infinite tail. Stored in canonical form.
class CantorAddress {
 public:
  CantorAddress() = default;
  CantorAddress(std::string prefix, TailKind tail, std::string period = {});

  // Grammar: PREFIX ['(' PERIOD ')'], digits over {0,2}; "()" or no parentheses ends in zeros.
  static CantorAddress parse(std::string_view text);

  const std::string& prefix() const { return prefix_; }
  TailKind tail() const { return tail_; }
  const std::string& period() const { return period_; }

  Rational value() const;
  std::string str() const;
  // Left endpoint of a removed interval: canonical prefix ends in 0, tail all twos.
  bool is_left_endpoint() const;

  bool operator==(const CantorAddress& other) const = default;
  std::strong_ordering operator<=>(const CantorAddress& other) const;

 private:
  void canonicalize();

  std::string prefix_;
  TailKind tail_ = TailKind::AllZeros;
  std::string period_;
};

// The removed open interval (value(word 0 (2)), value(word 2)).
struct GapId {
  std::string word;

  std::size_t generation() const { return word.size() + 1; }
  Rational lo() const;
  Rational hi() const;
  Rational width() const { return pow3(-static_cast<long>(generation())); }
  CantorAddress left_endpoint() const;

  bool operator==(const GapId&) const = default;
};

struct Membership {
  enum class Kind { InC, InGap, Undetermined };
  Kind kind = Kind::Undetermined;
  CantorAddress address;  // InC
  GapId gap;              // InGap
  Rational local;         // InGap: affine position inside the gap, in (0, 1)
};

Membership membership(const Rational& x, unsigned depth = 64);
Membership membership(const Enclosure& x, unsigned depth);
// Euclidean distance from x in [0,1] to the Cantor set (exact).
Rational distance_to_cantor(const Rational& x);

// Left endpoints enumerated by gap generation, then left to right; rank 1 is 1/3.
CantorAddress left_endpoint(std::uint64_t rank);
Rational left_endpoint_value(std::uint64_t rank);
std::uint64_t left_endpoint_rank(const CantorAddress& address);
std::uint64_t left_endpoint_rank(const GapId& gap);
GapId gap_of_rank(std::uint64_t rank);

struct QuadIndex {
  CantorAddress p1;
  CantorAddress p2;
  CantorAddress p1s;
  CantorAddress p2s;

  bool operator==(const QuadIndex&) const = default;
};

using QuadRanks = std::array<std::uint64_t, 4>;

// Tuples of left-endpoint ranks ordered by rank sum, then lexicographically,
// keeping those with p1 < p2 and p1s < p2s as points.
QuadRanks quad_unrank_ranks(std::uint64_t n);
std::uint64_t quad_rank_ranks(const QuadRanks& ranks);
QuadIndex quad_unrank(std::uint64_t n);
std::uint64_t quad_rank(const QuadIndex& q);

// A homeomorphism between two intervals carrying affine copies of the Cantor
// set. Each pin sends a source left endpoint (in unit coordinates) to a target one.
struct SplitHomeoSpec {
  Rational source_lo{0};
  Rational source_hi{1};
  Rational target_lo{0};
  Rational target_hi{1};
  std::vector<std::pair<CantorAddress, CantorAddress>> pins;

  bool operator==(const SplitHomeoSpec&) const = default;
};

// The exact affine segments of the split homeo, tiling [source_lo, source_hi].
std::vector<AffineSegment> split_homeo_segments(const SplitHomeoSpec& spec);
RulePtr make_split_rule(const SplitHomeoSpec& spec);
PiecewiseMap build_split_homeo(const SplitHomeoSpec& spec, const std::string& name = "split");

PiecewiseMap build_g();
PiecewiseMap build_f();

enum class KnRegion { K, J, K0A, JStar, K0B };

std::string kn_region_name(KnRegion region);

struct KnCoordinate {
  KnRegion region = KnRegion::K;
  long n = 0;
  // Position inside the region, scaled to [0, 1]. For K-type regions this is a
  // Cantor position when x lies in C; for J-type regions it is the affine coordinate.
  Rational local;
  std::optional<CantorAddress> position;
};

// Block K_n = [lo, hi] of the two-generator Cantor example.
Enclosure kn_block(long n);
Enclosure jn_gap(long n);
KnCoordinate kn_locate(const Rational& x);

struct BlockPosition {
  long n = 0;
  Rational position;
};
// x in C strictly inside (0,1): the block K_n containing x and the position of x in it.
BlockPosition block_position(const Rational& x);

struct DensityWitness {
  MapWord word;
  std::uint64_t r = 0;
  QuadRanks brackets{};
  long n = 0;
  long m = 0;
};

// Word h with |h(x) - y| < eps in the group generated by build_g() ("g") and build_f() ("f").
DensityWitness density_witness_detail(const Rational& x, const Rational& y, const Rational& eps);
MapWord density_witness(const Rational& x, const Rational& y, const Rational& eps);
MapWord density_witness(const CantorAddress& x, const CantorAddress& y, const Rational& eps);

}  // namespace circorb
