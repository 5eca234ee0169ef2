#pragma once

#include "relucheck/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relucheck {

/// Equal-width bin table over an input box: bins[i][j] = [lo, hi) of bin j
/// for node i (the last bin closes at the node's upper bound).
struct BinTable {
  std::vector<std::vector<std::pair<double, double>>> bins;
};

/// Splits node i's range into bins_per_node[i] equal-width bins with
/// boundary j at lower(i) + (upper(i) - lower(i)) / X_i * j. A degenerate
/// node must have exactly one bin.
BinTable make_bins(const Box &domain, const std::vector<int> &bins_per_node);

struct SegmentationPlan {
  std::vector<int> bins_per_node;
  /// Node index sets kept free (un-pinned); every other node is pinned per
  /// bin. Empty means one singleton set per node, in node order.
  std::vector<std::vector<int>> variable_sets;
  std::uint64_t rng_seed = 0;
  int samples_per_bin = 1; // repeats per bin combination, distinct streams

  void validate(Index dim) const;
};

/// One pinned sub-domain: variable nodes span their full range, every fixed
/// node is pinned to one uniformly random value inside its bin.
struct SubProblem {
  Box domain;
  std::vector<int> variable;
  long long index = 0; // dispatch order
};

/// Enumerates sub-domains: for each variable set, all bin combinations of
/// the fixed nodes (first fixed node slowest), each pinned at random values
/// drawn from a stream derived from (rng_seed, set, combination, repeat) —
/// the same plan always yields the same pins.
std::vector<SubProblem> ris_subproblems(const Box &domain,
                                        const SegmentationPlan &plan);
long long ris_subproblem_count(const Box &domain, const SegmentationPlan &plan);

/// Regular-interval sampling of the property's box with the given step per
/// node. Incomplete: completion without a violation is NoneFound, never
/// Unsat. Degenerate nodes contribute exactly one sample.
Verdict coarse_grid_verify(const Network &net, const SafetyProperty &prop,
                           const Vector &steps, const EngineConfig &cfg,
                           const std::atomic<bool> *cancel = nullptr);

/// Runs the selected engine on every sub-domain (optionally on `workers`
/// threads), stopping early on the first violation. Aggregation: any Sat
/// wins (lowest sub-problem index), else any Timeout, else NoneFound —
/// never Unsat. Each sub-problem gets cfg.timeout_seconds.
Verdict ris_verify(const Network &net, const SafetyProperty &prop,
                   const SegmentationPlan &plan, EngineKind engine,
                   const EngineConfig &cfg, int workers = 1,
                   const std::atomic<bool> *cancel = nullptr);

VerdictKind aggregate_verdicts(const std::vector<VerdictKind> &kinds);

/// Whether segmenting is cheaper than brute force: with total_nodes = I,
/// variable_nodes = M, fixed_nodes = M' = I - M and n enumerable options
/// per node, holds when I^n > M^n * I! / (M! M'!), evaluated in exact
/// integer arithmetic.
bool ris_optimality(long long total_nodes, long long variable_nodes,
                    long long fixed_nodes, long long noise_options);

SegmentationPlan parse_plan(const std::string &text);
std::string serialize_plan(const SegmentationPlan &plan);

} // namespace relucheck
