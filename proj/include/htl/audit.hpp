#pragma once

#include <cstdint>
#include <vector>

#include "htl/datagen.hpp"
#include "htl/dataset.hpp"
#include "htl/kernel.hpp"
#include "htl/losses.hpp"
#include "htl/rerm.hpp"
#include "htl/source.hpp"

namespace htl {

// Per-fold measurements: loss deviations plus the RKHS deviation of the
// refit against its theoretical ceiling
//   sqrt(k(X_i, X_i)) |phi'(margin_i of the full fit)| / (lambda n).
struct per_index_audit {
  Eigen::Index index = 0;
  double delta_ell_mean = 0.0;  // mean |delta loss| over the fresh sample
  double delta_ell_at_i = 0.0;  // |delta loss| at the deleted point
  double rkhs_dev = 0.0;
  double deviation_bound_rhs = 0.0;
  bool violated = false;
};

struct audit_report {
  double emp_hypothesis_stability = 0.0;  // mean over folds and fresh points
  double emp_pointwise_stability = 0.0;   // mean over folds at deleted points
  // Max |delta loss| seen across all folds and supplied points.  Only a
  // witnessed max: it certifies nothing beyond the evaluated points.
  double witnessed_max_delta = 0.0;
  int deviation_bound_violations = 0;
  std::vector<per_index_audit> per_index;
};

// Fits once, refits once per training index, and measures loss deviations on
// the held-out `fresh` sample (the Monte Carlo stand-in for a population
// average) and at each deleted point.
audit_report audit_stability(const dataset& train, const dataset& fresh,
                             const loss_spec& loss, const kernel_spec& kernel,
                             double lambda, const source_hypothesis& source,
                             const solver_config& cfg = {}, int threads = 1);

struct gen_gap_estimate {
  double mean = 0.0;
  double std_error = 0.0;
  int replicas = 0;
  std::vector<double> gaps;  // per-replica values, replica order
};

// Monte Carlo estimate of E[train risk - test risk] over fresh target draws
// of the scenario; replica r uses seed base_seed + r.
gen_gap_estimate audit_gen_gap(const scenario_config& scenario,
                               const loss_spec& loss,
                               const kernel_spec& kernel, double lambda,
                               const source_hypothesis& source, int replicas,
                               Eigen::Index test_size, std::uint64_t base_seed,
                               const solver_config& cfg = {}, int threads = 1);

struct loo_audit {
  double loo_risk = 0.0;
  double test_risk = 0.0;
  double abs_gap = 0.0;
};

// Leave-one-out estimate next to the held-out estimate of the same risk.
loo_audit audit_loo(const dataset& train, const dataset& test,
                    const loss_spec& loss, const kernel_spec& kernel,
                    double lambda, const source_hypothesis& source,
                    const solver_config& cfg = {}, int threads = 1);

}  // namespace htl
