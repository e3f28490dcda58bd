#pragma once

#include <Eigen/Dense>

#include "htl/kernel.hpp"
#include "htl/losses.hpp"
#include "htl/source.hpp"

namespace htl {

struct solver_stats {
  int iterations = 0;
  double residual_norm = 0.0;
  double objective = 0.0;
};

// Result of the regularized fit: representer coefficients of the correction
// term plus the frozen source.  The predictor is
//   score(x) = sum_j coeffs[j] * k(x_j, x) + source(x).
struct fitted_model {
  Eigen::VectorXd coeffs;
  Eigen::MatrixXd train_features;
  Eigen::MatrixXd gram;  // Gram matrix of train_features under `kernel`
  kernel_spec kernel;
  double lambda = 0.0;
  loss_spec loss;
  source_hypothesis source;
  solver_stats stats;

  double predict_score(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict_scores(const Eigen::MatrixXd& points) const;

  // Correction term alone, without the source offset.
  double correction(const Eigen::VectorXd& x) const;
  Eigen::VectorXd corrections(const Eigen::MatrixXd& points) const;

  double rkhs_norm_sq() const { return coeffs.dot(gram * coeffs); }
};

}  // namespace htl
