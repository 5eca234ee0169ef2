#pragma once

#include "relucheck/network.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace relucheck {

/// Percentage noise applied independently per input node. Nodes excluded by
/// the mask keep their exact value.
struct NoiseSpec {
  double percent = 0.0;
  std::vector<bool> noisy_mask; // empty = every node is noisy

  bool node_noisy(Index i) const;
  void validate(Index dim) const;
};

/// Interval reachable from `seed` under the noise model: node i moves within
/// seed(i) +/- |seed(i)| * percent / 100. A node with value zero therefore
/// stays pinned (degenerate interval) even when masked noisy.
Box noise_box(const Vector &seed, const NoiseSpec &spec);

struct Counterexample {
  Vector input;                 // denormalized input that violates the property
  std::optional<Vector> noise;  // input - seed, for robustness properties
  int observed_class = -1;      // -1 when the property is score-based
  std::optional<Vector> scores; // raw output scores at `input`
  std::string property_id;
  std::string timestamp;
};

/// Classification must not change anywhere inside the seed's noise box.
struct RobustnessProperty {
  Vector seed;
  int expected_class = 0; // classify(net, seed), fixed at construction
  NoiseSpec noise;
  /// Noise vectors never to be reported again (counterexample mining).
  std::vector<Vector> excluded;

  static RobustnessProperty around(const Network &net, const Vector &seed,
                                   NoiseSpec spec);
  Box box() const { return noise_box(seed, noise); }

  /// Exact-point exclusion (grid search) and radius exclusion (interval
  /// search: excluded if within `radius` of a stored vector on every node).
  bool is_excluded_exact(const Vector &noise_vec) const;
  bool is_excluded_within(const Vector &noise_vec, const Vector &radius) const;
};

bool holds_robust(const Network &net, const RobustnessProperty &prop,
                  const Vector &x);

/// Returns a copy of `prop` with the counterexamples' noise vectors added to
/// the exclusion list.
RobustnessProperty exclude(RobustnessProperty prop,
                           const std::vector<Counterexample> &ces);

/// Boolean combination of score comparisons, evaluated on raw output scores.
/// Output indices are 0-based.
struct OutputConstraint {
  enum class Kind { OutLess, OutGreater, AtMost, AtLeast, AllOf, AnyOf };

  Kind kind = Kind::AtMost;
  int lhs = 0;
  int rhs = 0;       // OutLess / OutGreater only
  double bound = 0.0; // AtMost / AtLeast only
  std::vector<OutputConstraint> children;

  static OutputConstraint out_less(int i, int j);
  static OutputConstraint out_greater(int i, int j);
  static OutputConstraint at_most(int i, double c);
  static OutputConstraint at_least(int i, double c);
  static OutputConstraint all_of(std::vector<OutputConstraint> cs);
  static OutputConstraint any_of(std::vector<OutputConstraint> cs);

  bool eval(const Vector &scores) const;

  /// Three-valued evaluation over a score box: +1 holds on the whole box,
  /// -1 fails on the whole box, 0 undecided.
  int eval_interval(const Box &scores) const;

  int max_output_index() const;
};

/// The constraint states the safe behaviour over the input box; engines
/// search the box for scores that falsify it.
struct SafetyProperty {
  Box input_box;
  OutputConstraint constraint;
  std::string name;
};

bool holds_safe(const SafetyProperty &prop, const Vector &scores);

using Property = std::variant<RobustnessProperty, SafetyProperty>;

/// Input box an engine must search for the given property.
Box search_box(const Property &prop);
std::string property_name(const Property &prop);

/// The four collision-avoidance benchmark properties, with open-ended bounds
/// clamped to the given input domain. `index` is 1-based.
SafetyProperty acas_property(int index, const Box &domain);
std::vector<SafetyProperty> acas_properties(const Box &domain);

/// JSON round-trip. Robustness files may omit "expected_class"; it is then
/// computed from `net`, and when present it must match the net's decision.
Property parse_property(const std::string &text, const Network &net);
std::string serialize_property(const Property &prop);

/// Stable content hash, used in database metadata and manifests.
std::string property_hash(const Property &prop);

} // namespace relucheck
