#pragma once

#include "relucheck/types.hpp"

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace relucheck {

using LabelSet = std::set<std::string>;

/// Finite transition system over atomic class labels. States are dense
/// indices into `labels`; `transitions` is kept sorted and duplicate-free.
struct KripkeStructure {
  std::vector<LabelSet> labels;
  std::vector<int> initial;
  std::vector<std::pair<int, int>> transitions;

  int state_count() const { return static_cast<int>(labels.size()); }
  long long transition_count() const {
    return static_cast<long long>(transitions.size());
  }
  bool has_transition(int from, int to) const;
  void validate() const;
  std::string to_dot() const;
};

/// Model of a classifier under `noise_options` enumerable perturbations of
/// one input: an initial state branching to one state per (option, class)
/// outcome, with every outcome reachable from every other (complete digraph
/// with self-loops). States: 1 + n*C. Transitions: n*C*(n*C + 1).
KripkeStructure build_explicit_model(long long noise_options, int class_count);

/// Class-level abstraction keeping one state per class regardless of the
/// number of noise options. States: 1 + C. Transitions: C*(C + 1).
KripkeStructure build_reduced_model(int class_count);

/// Collapses states carrying identical label sets when they are adjacent or
/// share a parent and have identical outgoing label sets, repeated to a
/// fixed point. Idempotent. On explicit models this reproduces the reduced
/// model's state and transition counts.
KripkeStructure merge_equilabeled(const KripkeStructure &m);

/// All label sequences of length <= depth along transitions, starting from
/// initial states.
std::set<std::vector<LabelSet>> label_traces(const KripkeStructure &m,
                                             int depth);

/// Cartesian sample grid over a box: per dimension, points lower(i),
/// lower(i) + step(i), ... while <= upper(i) (first point always included,
/// so degenerate dimensions contribute exactly one point). Flattened index
/// is lexicographic with dimension 0 most significant.
struct SampleGrid {
  Vector base;
  Vector upper; // points are clamped here against step round-off
  Vector step;
  std::vector<long long> counts;
  long long total = 1;

  Vector point(long long flat) const;
};

SampleGrid make_grid(const Box &box, const Vector &step);

} // namespace relucheck
