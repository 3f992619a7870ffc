#include "safeopt/types.hpp"

#include "safeopt/errors.hpp"

namespace safeopt {

bool Box::contains(const Point& x, double tol) const {
  if (x.size() != dim()) return false;
  return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
}

Point Box::clip(const Point& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InputError("box bounds must be non-empty and of equal dimension");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw InputError("box lower bounds must be strictly below upper bounds");
  }
}

}  // namespace safeopt
