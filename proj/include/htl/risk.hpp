#pragma once

#include <Eigen/Dense>

#include "htl/dataset.hpp"
#include "htl/losses.hpp"
#include "htl/model.hpp"
#include "htl/source.hpp"

namespace htl {

struct solver_config;  // rerm.hpp

// (1/n) sum_i phi(score_i * y_i) from precomputed scores.
double empirical_risk(const Eigen::VectorXd& scores,
                      const Eigen::VectorXd& labels, const loss_spec& loss);
double empirical_risk(const fitted_model& model, const dataset& data,
                      const loss_spec& loss);
double empirical_risk(const source_hypothesis& source, const dataset& data,
                      const loss_spec& loss);

// Training error with sample i removed: (1/(n-1)) sum_{j != i}.
double empirical_risk_minus_i(const Eigen::VectorXd& scores,
                              const Eigen::VectorXd& labels,
                              const loss_spec& loss, Eigen::Index i);

// Per-sample losses phi(score_i * y_i).
Eigen::VectorXd per_sample_losses(const Eigen::VectorXd& scores,
                                  const Eigen::VectorXd& labels,
                                  const loss_spec& loss);

// Deleted estimate of the risk: refit without sample i, evaluate on sample i,
// average.  Folds run in parallel when threads > 1; results are identical
// either way.
double loo_risk(const dataset& train, const loss_spec& loss,
                const kernel_spec& kernel, double lambda,
                const source_hypothesis& source, const solver_config& cfg,
                int threads = 1);

}  // namespace htl
