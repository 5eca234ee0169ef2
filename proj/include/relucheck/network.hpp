#pragma once

#include "relucheck/types.hpp"

#include <string>
#include <vector>

namespace relucheck {

/// How raw output scores are turned into a class decision.
enum class OutputConvention { Argmax, Argmin, Raw };

std::string to_string(OutputConvention c);
OutputConvention output_convention_from_string(const std::string &s);

/// Trained feed-forward fully-connected network with ReLU activations on
/// every hidden layer. Inputs are normalized per node as (x - mean) / range
/// before the first layer; raw outputs are mapped back through the scalar
/// output mean/range. Treated as immutable once validated.
struct Network {
  /// weights[k] has one row per node of layer k+1 and one column per node
  /// of layer k; biases[k] has one entry per node of layer k+1.
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Vector input_mean;
  Vector input_range; // nonzero per node
  double output_mean = 0.0;
  double output_range = 1.0;

  /// Hidden layers are always ReLU; the final layer only if this is set.
  bool output_relu = false;
  OutputConvention convention = OutputConvention::Raw;

  /// Declared operating range per input node; empty when unknown.
  Vector input_min;
  Vector input_max;

  Index layer_count() const { return static_cast<Index>(weights.size()); }
  Index input_size() const;
  Index output_size() const;
  std::vector<Index> layer_sizes() const; // input size first, output last
  long long parameter_count() const;
  bool has_domain() const { return input_min.size() > 0; }
  Box domain() const;

  /// Throws Error on any structural defect (mismatched shapes, zero
  /// normalization range, non-finite parameters, missing layers).
  void validate() const;
};

/// (x - mean) / range, applied per input node.
Vector normalize_input(const Network &net, const Vector &x);

/// Full forward pass on a denormalized input; returns denormalized scores.
/// Throws Error if a non-finite value appears at any layer.
Vector forward(const Network &net, const Vector &x);

/// Applies the network's output convention to raw scores. Ties resolve to
/// the lowest index. Throws Error for convention Raw.
int decide(const Network &net, const Vector &scores);

/// forward + decide.
int classify(const Network &net, const Vector &x);

/// Sound interval propagation of an input box through the network. For a
/// degenerate box the result equals forward() on that point bit-for-bit
/// (both paths accumulate each row as bias + sum over inputs in ascending
/// index order).
Box forward_interval(const Network &net, const Box &box);

} // namespace relucheck
