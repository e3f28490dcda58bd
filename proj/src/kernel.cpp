#include "htl/kernel.hpp"

#include <cmath>
#include <limits>

#include "htl/errors.hpp"

namespace htl {

double kernel_spec::eval(const Eigen::VectorXd& a,
                         const Eigen::VectorXd& b) const {
  switch (kind) {
    case kernel_kind::linear:
      return a.dot(b);
    case kernel_kind::gaussian:
      return std::exp(-gamma * (a - b).squaredNorm());
    case kernel_kind::polynomial:
      return std::pow(a.dot(b) + offset, degree);
    case kernel_kind::sigmoid:
      return std::tanh(scale * a.dot(b) + offset);
  }
  throw config_error("unknown kernel kind");
}

kernel_kind kernel_kind_from_name(const std::string& name) {
  if (name == "linear") return kernel_kind::linear;
  if (name == "gaussian") return kernel_kind::gaussian;
  if (name == "polynomial") return kernel_kind::polynomial;
  if (name == "sigmoid") return kernel_kind::sigmoid;
  throw config_error("unknown kernel name: " + name);
}

std::string kernel_name(kernel_kind kind) {
  switch (kind) {
    case kernel_kind::linear: return "linear";
    case kernel_kind::gaussian: return "gaussian";
    case kernel_kind::polynomial: return "polynomial";
    case kernel_kind::sigmoid: return "sigmoid";
  }
  throw config_error("unknown kernel kind");
}

Eigen::MatrixXd gram(const kernel_spec& kernel, const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw config_error("gram: empty point set");
  if (!points.allFinite()) throw config_error("gram: non-finite points");

  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel.eval(points.row(i), points.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd cross_gram(const kernel_spec& kernel, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b) {
  if (a.rows() == 0 || b.rows() == 0)
    throw config_error("cross_gram: empty point set");
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = kernel.eval(a.row(i), b.row(j));
  return k;
}

double estimate_kappa(const kernel_spec& kernel,
                      const Eigen::MatrixXd& sample) {
  switch (kernel.kind) {
    case kernel_kind::gaussian:
    case kernel_kind::sigmoid:
      return 1.0;
    case kernel_kind::linear:
    case kernel_kind::polynomial:
      break;
  }
  if (sample.rows() == 0) throw config_error("estimate_kappa: empty sample");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sample.rows(); ++i)
    for (Eigen::Index j = i; j < sample.rows(); ++j)
      best = std::max(best, kernel.eval(sample.row(i), sample.row(j)));
  return best;
}

double resolve_kappa(const kernel_spec& kernel,
                     const Eigen::MatrixXd& sample) {
  if (kernel.kappa) {
    if (!(*kernel.kappa > 0.0))
      throw config_error("resolve_kappa: kappa must be positive");
    return *kernel.kappa;
  }
  switch (kernel.kind) {
    case kernel_kind::gaussian:
    case kernel_kind::sigmoid:
      return 1.0;
    case kernel_kind::linear:
    case kernel_kind::polynomial:
      return 1.1 * estimate_kappa(kernel, sample);
  }
  throw config_error("unknown kernel kind");
}

}  // namespace htl
