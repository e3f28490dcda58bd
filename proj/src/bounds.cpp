#include "htl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htl/errors.hpp"

namespace htl {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw config_error(msg);
}

double checked_alpha(const bound_context& ctx) {
  require(std::isfinite(ctx.kappa) && ctx.kappa > 0.0,
          "bounds: kappa must be positive");
  require(std::isfinite(ctx.lambda) && ctx.lambda > 0.0,
          "bounds: lambda must be positive");
  return ctx.alpha();
}

}  // namespace

double radius(const bound_context& ctx) {
  const double alpha = checked_alpha(ctx);
  require(std::isfinite(ctx.source_risk_train) && ctx.source_risk_train >= 0.0,
          "bounds: training source risk missing");
  return std::sqrt(alpha * ctx.source_risk_train);
}

loo_radii radius_loo(const bound_context& ctx,
                     const std::vector<double>& per_sample_losses_of_source) {
  const double alpha = checked_alpha(ctx);
  const std::size_t n = per_sample_losses_of_source.size();
  require(n >= 2, "bounds: per-sample losses need n >= 2");
  require(std::isfinite(ctx.m_s) && ctx.m_s >= 0.0,
          "bounds: per-sample loss bound m_s missing");

  double total = 0.0;
  for (double v : per_sample_losses_of_source) total += v;

  const double r_full = radius(ctx);
  loo_radii out;
  out.r.reserve(n);
  out.rho.reserve(n);
  out.tau.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double risk_minus_i =
        (total - per_sample_losses_of_source[i]) / static_cast<double>(n - 1);
    const double r_i = std::sqrt(alpha * risk_minus_i);
    out.r.push_back(r_i);
    out.rho.push_back(std::max(r_full, r_i));
    out.tau.push_back(
        std::sqrt(alpha * (risk_minus_i + ctx.m_s / static_cast<double>(n))));
  }
  return out;
}

double c_s(const bound_context& ctx) {
  const double alpha = checked_alpha(ctx);
  require(ctx.n >= 2, "bounds: c_s needs n >= 2");
  require(std::isfinite(ctx.m_s) && ctx.m_s >= 0.0,
          "bounds: per-sample loss bound m_s missing");
  const double n = static_cast<double>(ctx.n);
  return std::exp(2.0 + 2.0 * alpha * ctx.m_s / n +
                  4.0 * alpha * alpha * ctx.m_s * ctx.m_s / (n - 1.0));
}

double beta_bound(const loss_spec& loss, const bound_context& ctx) {
  const double alpha = checked_alpha(ctx);
  require(ctx.n >= 1, "bounds: n missing");
  require(std::isfinite(ctx.source_risk) && ctx.source_risk >= 0.0,
          "bounds: source risk missing");
  const double sup = derivative_sup(loss);
  const double capped =
      std::min(psi1(loss, ctx.source_risk, ctx), sup * sup);
  return alpha * capped / static_cast<double>(ctx.n);
}

double gamma_bound(const loss_spec& loss, const bound_context& ctx) {
  const double alpha = checked_alpha(ctx);
  require(ctx.n >= 1, "bounds: n missing");
  require(std::isfinite(ctx.source_risk) && ctx.source_risk >= 0.0,
          "bounds: source risk missing");
  const double sup = derivative_sup(loss);
  const double capped =
      std::min(psi2(loss, ctx.source_risk, ctx), sup * sup);
  return alpha * capped / static_cast<double>(ctx.n);
}

double gen_gap_bound(const loss_spec& loss, const bound_context& ctx) {
  const double alpha = checked_alpha(ctx);
  require(ctx.n >= 1, "bounds: n missing");
  require(std::isfinite(ctx.source_risk) && ctx.source_risk >= 0.0,
          "bounds: source risk missing");
  const double sup = derivative_sup(loss);
  const double joint =
      alpha *
      std::min(psi1(loss, ctx.source_risk, ctx) +
                   psi2(loss, ctx.source_risk, ctx),
               2.0 * sup * sup) /
      static_cast<double>(ctx.n);
  // The joint cap can exceed the per-term sum when only one psi clears the
  // slope cap; both are valid, report the tighter.
  return std::min(joint, beta_bound(loss, ctx) + gamma_bound(loss, ctx));
}

lambda_schedule excess_lambda_schedule(const loss_spec& loss, std::size_t n,
                                       double source_risk, double m_s,
                                       double s) {
  require(n >= 2, "schedule: n must be at least 2");
  require(std::isfinite(source_risk) && source_risk >= 0.0,
          "schedule: source risk must be non-negative");
  const double nn = static_cast<double>(n);
  const double sqrt_n = std::sqrt(nn);
  const double log_n = std::log(nn);

  switch (loss.kind) {
    case loss_kind::mse:
    case loss_kind::squared_hinge: {
      const double lam = std::sqrt(source_risk / sqrt_n);
      if (lam > 0.0) return {lam, "sqrt(R/sqrt n)"};
      return {1.0 / sqrt_n, "1/sqrt n"};  // degenerate R = 0
    }
    case loss_kind::exponential: {
      require(std::isfinite(m_s) && m_s >= 0.0,
              "schedule: exponential needs the loss bound m_s");
      if (source_risk > 0.0 &&
          nn >= m_s * m_s * log_n * log_n / source_risk) {
        const double lam =
            4.0 * std::min(std::sqrt(source_risk), 1.0) / log_n;
        return {lam, "(sqrt R min 1)/ln n"};
      }
      return {log_n * log_n / sqrt_n, "ln^2 n/sqrt n"};
    }
    case loss_kind::logistic:
    case loss_kind::softplus: {
      const bool small_risk =
          n >= 9 && source_risk > 0.0 && source_risk <= 1.0 / sqrt_n;
      const bool temp_ok =
          loss.kind == loss_kind::logistic ||
          (s > 0.0 && 1.0 / s <= -std::log(source_risk));
      if (small_risk && temp_ok) {
        const double lam = 8.0 / std::sqrt(-nn * std::log(source_risk));
        return {lam, "1/sqrt(-n ln R)"};
      }
      return {1.0 / sqrt_n, "1/sqrt n"};
    }
  }
  throw config_error("unknown loss kind");
}

double estimate_loss_bound(const loss_spec& loss,
                           const source_hypothesis& source,
                           const dataset& pooled) {
  if (loss.kind != loss_kind::exponential) {
    // phi is non-increasing up to margin 1 and these four peak at the most
    // negative margin, so a known sup-norm gives the bound exactly.
    bool have_sup = true;
    double sup = 0.0;
    try {
      sup = source.sup_norm(nullptr);
    } catch (const config_error&) {
      have_sup = false;
    }
    if (have_sup) return loss_value(loss, -sup);
  }
  pooled.validate();
  const Eigen::VectorXd scores = source.scores(pooled.features);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    worst = std::max(worst,
                     loss_value(loss, scores[i] * pooled.labels[i]));
  return 1.1 * worst;
}

bound_context make_bound_context(const loss_spec& loss,
                                 const kernel_spec& kernel, double lambda,
                                 const dataset& train, const dataset& test,
                                 const source_hypothesis& source) {
  train.validate();
  test.validate();
  if (train.d() != test.d())
    throw config_error("bound context: train/test dimension mismatch");

  dataset pooled;
  pooled.features.resize(train.n() + test.n(), train.d());
  pooled.features << train.features, test.features;
  pooled.labels.resize(train.n() + test.n());
  pooled.labels << train.labels, test.labels;

  bound_context ctx;
  ctx.kappa = resolve_kappa(kernel, pooled.features);
  ctx.lambda = lambda;
  ctx.n = static_cast<std::size_t>(train.n());
  ctx.s = loss.kind == loss_kind::softplus ? loss.s
                                           : std::numeric_limits<double>::quiet_NaN();
  ctx.m_s = estimate_loss_bound(loss, source, pooled);

  const Eigen::VectorXd train_scores = source.scores(train.features);
  const Eigen::VectorXd test_scores = source.scores(test.features);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < train.n(); ++i)
    acc += loss_value(loss, train_scores[i] * train.labels[i]);
  ctx.source_risk_train = acc / static_cast<double>(train.n());
  acc = 0.0;
  for (Eigen::Index i = 0; i < test.n(); ++i)
    acc += loss_value(loss, test_scores[i] * test.labels[i]);
  ctx.source_risk = acc / static_cast<double>(test.n());
  return ctx;
}

stability_bound_report build_report(
    const loss_spec& loss, const bound_context& ctx,
    const std::vector<double>& per_sample_losses_of_source) {
  stability_bound_report report;
  report.beta = beta_bound(loss, ctx);
  report.gamma = gamma_bound(loss, ctx);
  report.gen_gap = gen_gap_bound(loss, ctx);
  report.c_s = c_s(ctx);
  report.radius = radius(ctx);
  report.radius_loo = radius_loo(ctx, per_sample_losses_of_source);
  report.excess_schedule = excess_lambda_schedule(
      loss, ctx.n, ctx.source_risk, ctx.m_s, ctx.s);
  return report;
}

}  // namespace htl
