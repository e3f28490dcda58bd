#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace htl {

enum class kernel_kind {
  linear,
  gaussian,
  polynomial,
  sigmoid,
};

// Positive-definite kernel with its boundedness constant kappa.  The sigmoid
// kernel is only conditionally PSD and is accepted on an advisory basis.
struct kernel_spec {
  kernel_kind kind = kernel_kind::gaussian;
  double gamma = 1.0;   // gaussian: exp(-gamma * |x - x'|^2)
  int degree = 2;       // polynomial: (x.x' + offset)^degree
  double offset = 0.0;  // polynomial / sigmoid shift
  double scale = 1.0;   // sigmoid: tanh(scale * x.x' + offset)
  std::optional<double> kappa;  // supplied bound on sup k(x, x')

  static kernel_spec linear() {
    kernel_spec k;
    k.kind = kernel_kind::linear;
    return k;
  }
  static kernel_spec gaussian(double gamma) {
    kernel_spec k;
    k.kind = kernel_kind::gaussian;
    k.gamma = gamma;
    return k;
  }
  static kernel_spec polynomial(int degree, double offset) {
    kernel_spec k;
    k.kind = kernel_kind::polynomial;
    k.degree = degree;
    k.offset = offset;
    return k;
  }
  static kernel_spec sigmoid(double scale, double offset) {
    kernel_spec k;
    k.kind = kernel_kind::sigmoid;
    k.scale = scale;
    k.offset = offset;
    return k;
  }

  double eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  bool operator==(const kernel_spec&) const = default;
};

kernel_kind kernel_kind_from_name(const std::string& name);
std::string kernel_name(kernel_kind kind);

// Gram matrix G[i][j] = k(x_i, x_j); rows of `points` are the inputs.
Eigen::MatrixXd gram(const kernel_spec& kernel, const Eigen::MatrixXd& points);

// Cross matrix K[i][j] = k(a_i, b_j).
Eigen::MatrixXd cross_gram(const kernel_spec& kernel, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b);

// sup k(x, x') witnessed by the sample: the analytic value where one exists
// (gaussian and sigmoid are bounded by 1), otherwise the max over sample
// pairs.
double estimate_kappa(const kernel_spec& kernel, const Eigen::MatrixXd& sample);

// kappa actually used downstream: the supplied value when present, else the
// analytic bound, else the sample estimate inflated by 10% since the data can
// only witness, not certify, boundedness.
double resolve_kappa(const kernel_spec& kernel, const Eigen::MatrixXd& sample);

}  // namespace htl
