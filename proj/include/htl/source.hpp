#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "htl/kernel.hpp"

namespace htl {

// Frozen scorer carried over from the source task.  Three functional forms
// cover everything the experiments need; a stack of bounded monotone
// squashes supports score rescaling without touching the base form.
class source_hypothesis {
 public:
  struct linear_form {
    Eigen::VectorXd weights;
  };
  struct kernel_form {
    Eigen::MatrixXd support;
    Eigen::VectorXd coeffs;
    kernel_spec kernel;
  };
  struct constant_form {
    double value = 0.0;
  };
  using form_type = std::variant<linear_form, kernel_form, constant_form>;

  // score = bound * tanh(inner * raw); inner > 0 keeps it increasing.
  struct squash {
    double inner = 0.0;
    double bound = 0.0;
  };

  source_hypothesis() : form_(constant_form{0.0}) {}
  explicit source_hypothesis(form_type form,
                             std::optional<double> sup_norm_hint = {})
      : form_(std::move(form)), sup_norm_hint_(sup_norm_hint) {}

  static source_hypothesis linear(Eigen::VectorXd weights,
                                  std::optional<double> hint = {}) {
    return source_hypothesis(linear_form{std::move(weights)}, hint);
  }
  static source_hypothesis expansion(Eigen::MatrixXd support,
                                     Eigen::VectorXd coeffs, kernel_spec k,
                                     std::optional<double> hint = {}) {
    return source_hypothesis(
        kernel_form{std::move(support), std::move(coeffs), std::move(k)}, hint);
  }
  static source_hypothesis constant(double value) {
    return source_hypothesis(constant_form{value}, std::abs(value));
  }

  double score(const Eigen::VectorXd& x) const;
  Eigen::VectorXd scores(const Eigen::MatrixXd& points) const;

  // Sup-norm of the score: the hint when given, an analytic value when the
  // form provides one, otherwise max |score| over the sample.  Throws
  // config_error when nothing is available.
  double sup_norm(const Eigen::MatrixXd* sample = nullptr) const;

  const form_type& form() const { return form_; }
  const std::vector<squash>& squashes() const { return squashes_; }
  const std::optional<double>& sup_norm_hint() const { return sup_norm_hint_; }

  void set_sup_norm_hint(double hint) { sup_norm_hint_ = hint; }
  void push_squash(squash sq);

 private:
  form_type form_;
  std::vector<squash> squashes_;
  std::optional<double> sup_norm_hint_;
};

// Monotone rescaling of the source score into (-target_bound, target_bound):
// x -> target_bound * tanh(score(x) / sup_norm * atanh(0.99)).  The sup-norm
// is taken from the hint or estimated on `sample`.
source_hypothesis scale_score(const source_hypothesis& source,
                              double target_bound,
                              const Eigen::MatrixXd* sample = nullptr);

}  // namespace htl
