#pragma once

#include <string>

#include "htl/bound_context.hpp"

namespace htl {

enum class loss_kind {
  exponential,
  logistic,
  mse,
  squared_hinge,
  softplus,
};

// A margin loss phi(score * label).  All five kinds are convex, non-negative
// and differentiable on the whole line; softplus carries a temperature s > 0.
struct loss_spec {
  loss_kind kind = loss_kind::logistic;
  double s = 0.1;

  static loss_spec exponential() { return {loss_kind::exponential, 0.0}; }
  static loss_spec logistic() { return {loss_kind::logistic, 0.0}; }
  static loss_spec mse() { return {loss_kind::mse, 0.0}; }
  static loss_spec squared_hinge() { return {loss_kind::squared_hinge, 0.0}; }
  static loss_spec softplus(double temperature = 0.1);

  bool operator==(const loss_spec&) const = default;
};

// Config-file names: "exponential" | "logistic" | "mse" | "squared_hinge" |
// "softplus".
loss_kind loss_kind_from_name(const std::string& name);
std::string loss_name(loss_kind kind);

double loss_value(const loss_spec& loss, double margin);
double loss_derivative(const loss_spec& loss, double margin);

// sup over the real line of |phi'|: 1 for logistic and softplus, +infinity
// for the rest.  Returning the infinity marker makes min(psi, sup^2) collapse
// to the psi term exactly when the derivative is unbounded.
double derivative_sup(const loss_spec& loss);

// Per-loss rate functions converting a source-risk level x >= 0 into the
// hypothesis-stability (psi1) and pointwise-stability (psi2) magnitudes.
// The context supplies alpha, and for the exponential/logistic/softplus rows
// also m_s and n (through the moment constant c_s).
double psi1(const loss_spec& loss, double x, const bound_context& ctx);
double psi2(const loss_spec& loss, double x, const bound_context& ctx);

}  // namespace htl
