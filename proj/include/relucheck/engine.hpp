#pragma once

#include "relucheck/analysis.hpp"
#include "relucheck/network.hpp"
#include "relucheck/property.hpp"

#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace relucheck {

enum class EngineKind { Explicit, Reduced };
enum class VerdictKind { Sat, Unsat, NoneFound, Timeout };

std::string to_string(EngineKind k);
std::string to_string(VerdictKind k);
EngineKind engine_kind_from_string(const std::string &s);

struct EngineConfig {
  double timeout_seconds = 60.0;
  /// Explicit engine step per input node; empty means width/20 per node,
  /// with `grid_step_scalar` (if positive) used for every node instead.
  Vector grid_step;
  double grid_step_scalar = 0.0;
  /// Reduced engine floor for box widths, as a fraction of each node's
  /// searched width (or denormalized units when `epsilon_absolute`).
  double epsilon = 1e-4;
  bool epsilon_absolute = false;
  long long max_counterexamples = std::numeric_limits<long long>::max();
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SearchStats {
  long long points_evaluated = 0; // concrete forward passes
  long long boxes_split = 0;      // reduced engine only
  long long subproblems = 0;      // segmented runs only
  double undecided_volume = 0.0;  // fraction of the searched box
  double wall_seconds = 0.0;
};

/// Sat: a validated counterexample exists. Unsat: the whole box is proved
/// safe (interval pruning covered it completely). NoneFound: the search
/// finished without a counterexample but without proof. Timeout: the time
/// budget expired first.
struct Verdict {
  VerdictKind kind = VerdictKind::NoneFound;
  std::optional<Counterexample> witness;
  SearchStats stats;

  int exit_code() const; // 0 = Unsat/NoneFound, 1 = Sat, 2 = Timeout
};

/// Exhaustive enumeration of the property's box on a finite grid,
/// lexicographic with node 0 most significant. Grid points on the
/// exclusion list are skipped. Returns Sat with the first violating point,
/// Unsat when every grid point passes (the grid is this engine's whole
/// state space), Timeout when the budget expires mid-scan.
Verdict verify_explicit(const Network &net, const Property &prop,
                        const EngineConfig &cfg,
                        const std::atomic<bool> *cancel = nullptr);

/// Sound branch-and-bound with interval pruning. Unsat iff pruning covered
/// the entire box; boxes at the epsilon floor are centre-sampled and count
/// toward undecided volume when non-violating. A Sat witness re-validates
/// by construction (asserted before returning).
Verdict verify_reduced(const Network &net, const Property &prop,
                       const EngineConfig &cfg,
                       const std::atomic<bool> *cancel = nullptr);

Verdict verify(const Network &net, const Property &prop, EngineKind engine,
               const EngineConfig &cfg,
               const std::atomic<bool> *cancel = nullptr);

struct ToleranceLevel {
  double percent = 0.0;
  Verdict verdict;
};

/// Result of descending a strictly decreasing noise schedule: the first
/// level proved Unsat is the tolerance; no level proved means the
/// tolerance is below the smallest level tried.
struct ToleranceResult {
  std::optional<double> tolerance_percent;
  std::vector<ToleranceLevel> levels;
};

ToleranceResult noise_tolerance(const Network &net, const Vector &seed,
                                const std::vector<double> &schedule,
                                EngineKind engine, const EngineConfig &cfg,
                                const std::vector<bool> &noisy_mask = {});

/// Repeatedly searches, excluding each counterexample found, until the
/// budget or `cfg.max_counterexamples` is reached. Deterministic for fixed
/// config; a timeout mid-run leaves a prefix of the full sequence.
CEDatabase collect_counterexamples(const Network &net,
                                   const RobustnessProperty &prop,
                                   EngineKind engine, const EngineConfig &cfg);

} // namespace relucheck
