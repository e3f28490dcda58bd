#include "htl/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "htl/bounds.hpp"
#include "htl/errors.hpp"

namespace htl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// IEEE doubles overflow past exp(709); cap the exponent at 700 and report
// the overflowed value as the infinity marker.
double safe_exp(double e) { return e > 700.0 ? kInf : std::exp(e); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double et = std::exp(t);
  return et / (1.0 + et);
}

// log(1 + e^t) without overflow for large |t|.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

void check_margin(double margin) {
  if (!std::isfinite(margin)) throw std::domain_error("loss: non-finite margin");
}

void check_psi_input(double x, double alpha) {
  if (!std::isfinite(x) || x < 0.0)
    throw std::domain_error("psi: risk level must be finite and non-negative");
  if (!std::isfinite(alpha) || alpha <= 0.0)
    throw config_error("psi: context is missing kappa/lambda");
}

// Moment constant shared by the exponential/logistic/softplus rows.
double row_c_s(const bound_context& ctx) {
  if (!std::isfinite(ctx.m_s))
    throw config_error("psi: context is missing the per-sample loss bound m_s");
  if (ctx.n < 2) throw config_error("psi: context needs n >= 2");
  return c_s(ctx);
}

}  // namespace

loss_spec loss_spec::softplus(double temperature) {
  if (!(temperature > 0.0))
    throw config_error("softplus temperature must be positive");
  return {loss_kind::softplus, temperature};
}

loss_kind loss_kind_from_name(const std::string& name) {
  if (name == "exponential") return loss_kind::exponential;
  if (name == "logistic") return loss_kind::logistic;
  if (name == "mse") return loss_kind::mse;
  if (name == "squared_hinge") return loss_kind::squared_hinge;
  if (name == "softplus") return loss_kind::softplus;
  throw config_error("unknown loss name: " + name);
}

std::string loss_name(loss_kind kind) {
  switch (kind) {
    case loss_kind::exponential: return "exponential";
    case loss_kind::logistic: return "logistic";
    case loss_kind::mse: return "mse";
    case loss_kind::squared_hinge: return "squared_hinge";
    case loss_kind::softplus: return "softplus";
  }
  throw config_error("unknown loss kind");
}

double loss_value(const loss_spec& loss, double margin) {
  check_margin(margin);
  switch (loss.kind) {
    case loss_kind::exponential:
      return safe_exp(-margin);
    case loss_kind::logistic:
      return log1p_exp(-margin);
    case loss_kind::mse: {
      const double r = 1.0 - margin;
      return r * r;
    }
    case loss_kind::squared_hinge: {
      const double r = std::max(0.0, 1.0 - margin);
      return r * r;
    }
    case loss_kind::softplus:
      return loss.s * log1p_exp((1.0 - margin) / loss.s);
  }
  throw config_error("unknown loss kind");
}

double loss_derivative(const loss_spec& loss, double margin) {
  check_margin(margin);
  switch (loss.kind) {
    case loss_kind::exponential:
      return -safe_exp(-margin);
    case loss_kind::logistic:
      return -sigmoid(-margin);
    case loss_kind::mse:
      return -2.0 * (1.0 - margin);
    case loss_kind::squared_hinge:
      return -2.0 * std::max(0.0, 1.0 - margin);
    case loss_kind::softplus:
      return -sigmoid((1.0 - margin) / loss.s);
  }
  throw config_error("unknown loss kind");
}

double derivative_sup(const loss_spec& loss) {
  switch (loss.kind) {
    case loss_kind::logistic:
    case loss_kind::softplus:
      return 1.0;
    case loss_kind::exponential:
    case loss_kind::mse:
    case loss_kind::squared_hinge:
      return kInf;
  }
  throw config_error("unknown loss kind");
}

double psi1(const loss_spec& loss, double x, const bound_context& ctx) {
  const double alpha = ctx.alpha();
  check_psi_input(x, alpha);
  switch (loss.kind) {
    case loss_kind::mse:
    case loss_kind::squared_hinge:
      return 8.0 * x * (4.0 * alpha + 1.0);
    case loss_kind::exponential:
      return row_c_s(ctx) * x * x * safe_exp(2.0 * alpha * x);
    case loss_kind::logistic: {
      const double g = std::expm1(std::sqrt(x));
      return row_c_s(ctx) * safe_exp(2.0 * alpha * x) * g * g;
    }
    case loss_kind::softplus: {
      const double g = std::expm1(std::sqrt(x / loss.s));
      return row_c_s(ctx) * safe_exp(2.0 * alpha * x) * g * g;
    }
  }
  throw config_error("unknown loss kind");
}

double psi2(const loss_spec& loss, double x, const bound_context& ctx) {
  const double alpha = ctx.alpha();
  check_psi_input(x, alpha);
  switch (loss.kind) {
    case loss_kind::mse:
    case loss_kind::squared_hinge:
      return 8.0 * x * (4.0 * alpha + 1.0);
    case loss_kind::exponential:
      return ctx.m_s * row_c_s(ctx) * x * safe_exp(2.0 * alpha * x);
    case loss_kind::logistic:
      return row_c_s(ctx) * safe_exp(2.0 * alpha * x) * std::expm1(std::sqrt(x));
    case loss_kind::softplus:
      return row_c_s(ctx) * safe_exp(2.0 * alpha * x) *
             std::expm1(std::sqrt(x / loss.s));
  }
  throw config_error("unknown loss kind");
}

}  // namespace htl
