#pragma once

#include <Eigen/Dense>
#include <functional>

#include "htl/dataset.hpp"
#include "htl/kernel.hpp"
#include "htl/losses.hpp"
#include "htl/model.hpp"
#include "htl/source.hpp"

namespace htl {

struct solver_config {
  int max_iters = 5000;
  // Tolerance on the optimality residual (1/n)(y .* phi'(m)) + 2*lambda*a,
  // which vanishes exactly at the minimizer and does not involve the Gram
  // matrix, so near-singular Gram matrices do not inflate it.
  double grad_tol = 1e-8;
  double ls_shrink = 0.5;
  double ls_sufficient_decrease = 1e-4;
  // Optional per-iteration hook: (iteration, objective, residual norm).
  std::function<void(int, double, double)> on_iteration;
};

// F(a) = (1/n) sum_i phi(((G a)_i + s_i) y_i) + lambda a' G a.
double objective(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& gram,
                 const Eigen::VectorXd& source_scores,
                 const Eigen::VectorXd& labels, const loss_spec& loss,
                 double lambda);

// grad F(a) = G [ (1/n)(y .* phi'(m)) + 2 lambda a ].
Eigen::VectorXd gradient(const Eigen::VectorXd& coeffs,
                         const Eigen::MatrixXd& gram,
                         const Eigen::VectorXd& source_scores,
                         const Eigen::VectorXd& labels, const loss_spec& loss,
                         double lambda);

// The bracketed factor above; zero exactly at the minimizer.
Eigen::VectorXd optimality_residual(const Eigen::VectorXd& coeffs,
                                    const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& source_scores,
                                    const Eigen::VectorXd& labels,
                                    const loss_spec& loss, double lambda);

// Minimizes F by descent along the negative optimality residual (gradient
// descent in the RKHS geometry) with backtracking line search.  Deterministic;
// starts from zero coefficients.  Throws convergence_error when the iteration
// budget runs out.
fitted_model fit(const dataset& train, const loss_spec& loss,
                 const kernel_spec& kernel, double lambda,
                 const source_hypothesis& source,
                 const solver_config& cfg = {});

// Refits with sample i removed, warm-started from the full solution with
// entry i dropped.  The returned coefficients live on the reduced support.
fitted_model refit_without(const fitted_model& full, const dataset& train,
                           Eigen::Index i, const solver_config& cfg = {});

// Closed-form solution of (1/n)|X u + s - y|^2 + lambda |u|^2; the
// independent check for `fit` on linear-kernel MSE instances.
Eigen::VectorXd ridge_oracle(const dataset& train, double lambda,
                             const Eigen::VectorXd& source_scores);

// |h_a - h_b|_k for models sharing kernel and training support.
double rkhs_distance(const fitted_model& a, const fitted_model& b);

// Same distance between a full model and a leave-one-out refit; the fold's
// coefficients are embedded with a zero at the removed index.
double rkhs_distance_loo(const fitted_model& full, const fitted_model& fold,
                         Eigen::Index removed);

}  // namespace htl
