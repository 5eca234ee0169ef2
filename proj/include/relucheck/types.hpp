#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace relucheck {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Error raised for malformed inputs, dimension mismatches and contract
/// violations. Parse errors carry line/field context in the message.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Axis-aligned box, lower(i) <= upper(i) for every dimension. Dimensions
/// with lower == upper are degenerate (pinned to a single value).
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi);

  Index dim() const { return lower.size(); }
  Vector width() const { return upper - lower; }
  Vector center() const;
  bool degenerate(Index i) const { return lower(i) == upper(i); }
  bool contains(const Vector &x, double tol = 0.0) const;
  bool contains(const Box &inner) const;
  bool finite() const;

  /// Fraction of `outer`'s volume this box occupies; dimensions degenerate
  /// in `outer` are skipped so pinned nodes do not zero the product.
  double volume_fraction_of(const Box &outer) const;

  static Box single_point(const Vector &x) { return Box(x, x); }
};

} // namespace relucheck
