#include "relucheck/types.hpp"

#include <cmath>

namespace relucheck {

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size())
    throw Error("box bounds have different dimensions");
  for (Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)))
      throw Error("box bound is NaN at dimension " + std::to_string(i));
    if (lower(i) > upper(i))
      throw Error("box lower bound exceeds upper bound at dimension " +
                  std::to_string(i));
  }
}

Vector Box::center() const {
  // The midpoint can land an ulp outside a tight box; clamp it back in.
  return (0.5 * (lower + upper)).cwiseMax(lower).cwiseMin(upper);
}

bool Box::contains(const Vector &x, double tol) const {
  if (x.size() != dim())
    return false;
  for (Index i = 0; i < dim(); ++i)
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol)
      return false;
  return true;
}

bool Box::contains(const Box &inner) const {
  if (inner.dim() != dim())
    return false;
  for (Index i = 0; i < dim(); ++i)
    if (inner.lower(i) < lower(i) || inner.upper(i) > upper(i))
      return false;
  return true;
}

bool Box::finite() const {
  return lower.allFinite() && upper.allFinite();
}

double Box::volume_fraction_of(const Box &outer) const {
  if (outer.dim() != dim())
    throw Error("volume fraction of a box with different dimension");
  double frac = 1.0;
  for (Index i = 0; i < dim(); ++i) {
    const double w = outer.upper(i) - outer.lower(i);
    if (w == 0.0)
      continue;
    frac *= (upper(i) - lower(i)) / w;
  }
  return frac;
}

} // namespace relucheck
