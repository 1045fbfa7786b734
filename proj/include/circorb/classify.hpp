#pragma once

#include <optional>
#include <string>
#include <vector>

#include "circorb/action.hpp"

namespace circorb {

enum class Verdict { Dense, IntegerType, CantorType, AccumulatesOnProperSubset, Inconclusive };

std::string verdict_name(Verdict v);

// eps_dense and edge_margin are fractions of each component's length.
struct ClassifyParams {
  Rational eps_dense{1, 64};
  std::size_t min_points = 500;
  Rational edge_margin{1, 32};
  Rational isolation_radius = pow2(-20);
};

struct Evidence {
  Rational max_gap_in_range;  // relative to component length
  double isolated_point_fraction = 0;
  std::string accumulation_set_summary;
  OrbitBudget budget;
  std::size_t points = 0;
  std::size_t points_in_range = 0;
  std::size_t max_word_len_used = 0;
  // Two-sided accumulation clusters at scales 2^-k of the component length, from k = 1.
  std::vector<std::size_t> cluster_counts;
  std::optional<bool> survived_doubling;
};

struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  Evidence evidence;
  std::optional<int> level;
  std::string reason;
};

Classification classify(const OrbitSample& sample, const ComponentDecomposition& decomposition, DomainKind domain,
                        const ClassifyParams& params = {});

// Samples the orbit, classifies it, and when double_budget is set repeats with
// both budgets doubled and records whether the verdict survived.
Classification classify_orbit(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                              const ClassifyParams& params = {}, const OrbitOptions& options = {},
                              bool double_budget = false);

struct RungEvidence {
  std::string name;
  Rational point;
  int level = 0;
  bool contains_x = false;
  bool accumulates = false;
  bool disjoint = true;
  std::optional<Rational> closest_approach;  // smallest positive distance from x's sample to the rung's sample
  std::size_t sample_points = 0;
};

struct LevelEstimate {
  int level = 1;
  std::vector<RungEvidence> rungs;
};

struct NamedRung {
  std::string name;
  Rational point;
};

LevelEstimate estimate_level(const GeneratorSystem& system, const Rational& x, const std::vector<NamedRung>& ladder,
                             const OrbitBudget& budget, const ClassifyParams& params = {},
                             const OrbitOptions& options = {});
// Ladder taken from the system's designated points.
LevelEstimate estimate_level(const GeneratorSystem& system, const Rational& x, const OrbitBudget& budget,
                             const ClassifyParams& params = {}, const OrbitOptions& options = {});

enum class ParallelVerdict { Parallel, NotParallel, Inconclusive };

std::string parallel_name(ParallelVerdict v);

struct ParallelReport {
  ParallelVerdict verdict = ParallelVerdict::Inconclusive;
  std::size_t intervals_met = 0;
  std::size_t intervals_met_doubled = 0;
  std::optional<long> crowded_interval;  // label n of an I_n holding two points
  bool stable_under_doubling = false;
  std::string reason;
};

ParallelReport parallel_test(const GeneratorSystem& system, const Rational& x, const OrbitSample& z_sample,
                             const OrbitBudget& budget, const OrbitOptions& options = {});

}  // namespace circorb
