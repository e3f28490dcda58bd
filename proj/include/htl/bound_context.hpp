#pragma once

#include <cstddef>
#include <limits>

namespace htl {

// Everything the stability certificates depend on.  `alpha` is always the
// ratio kappa/lambda, never stored separately.  Fields that a particular
// certificate does not need may stay NaN; the evaluators complain when a
// required field is missing.
struct bound_context {
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;

  // Source risk estimated on held-out data, and its training counterpart.
  double source_risk = std::numeric_limits<double>::quiet_NaN();
  double source_risk_train = std::numeric_limits<double>::quiet_NaN();

  // Upper bound on the per-sample source loss.
  double m_s = std::numeric_limits<double>::quiet_NaN();

  // Softplus temperature, when the loss carries one.
  double s = std::numeric_limits<double>::quiet_NaN();

  double alpha() const { return kappa / lambda; }
};

}  // namespace htl
