#pragma once

#include <string>
#include <vector>

#include "htl/bound_context.hpp"
#include "htl/dataset.hpp"
#include "htl/kernel.hpp"
#include "htl/losses.hpp"
#include "htl/source.hpp"

namespace htl {

// Per-index radii around the leave-one-out solutions:
//   r:   sqrt(alpha * R_hat^{\i}[h_S])
//   rho: max(full-sample radius, r)
//   tau: sqrt(alpha * (R_hat^{\i}[h_S] + m_s / n)), an upper bound on rho
//        that does not depend on the deleted sample.
struct loo_radii {
  std::vector<double> r;
  std::vector<double> rho;
  std::vector<double> tau;
};

struct lambda_schedule {
  double lambda = 0.0;
  std::string rate_label;
};

// Certificates and the empirical context they were computed from, as emitted
// by the bounds command.
struct stability_bound_report {
  double beta = 0.0;
  double gamma = 0.0;
  double gen_gap = 0.0;
  double c_s = 0.0;
  double radius = 0.0;
  loo_radii radius_loo;
  lambda_schedule excess_schedule;
};

// Sup-norm radius of the fitted correction: sqrt(alpha * R_hat[h_S]).
double radius(const bound_context& ctx);

// Radii with sample i deleted, from the per-sample source losses on the
// training set.
loo_radii radius_loo(const bound_context& ctx,
                     const std::vector<double>& per_sample_losses_of_source);

// Hypothesis stability: alpha * min(psi1(R[h_S]), sup|phi'|^2) / n.
double beta_bound(const loss_spec& loss, const bound_context& ctx);

// Pointwise hypothesis stability, with psi2 in place of psi1.
double gamma_bound(const loss_spec& loss, const bound_context& ctx);

// exp{2 + 2 alpha m_s / n + 4 alpha^2 m_s^2 / (n - 1)}.
double c_s(const bound_context& ctx);

// Generalization gap: alpha * min(psi1 + psi2, 2 sup|phi'|^2) / n.
double gen_gap_bound(const loss_spec& loss, const bound_context& ctx);

// Loss-specific regularization schedule for the excess risk, with the label
// of the rate it buys.  Falls back to the unconditional schedule when the
// source risk is zero and the schedule would degenerate.
lambda_schedule excess_lambda_schedule(const loss_spec& loss, std::size_t n,
                                       double source_risk, double m_s,
                                       double s);

// Upper bound on the per-sample source loss.  With a monotone loss and a
// known sup-norm this is phi(-|h_S|_inf) exactly; the exponential loss and
// sources without a known sup-norm fall back to the empirical max over the
// pooled sample, inflated by 10%.
double estimate_loss_bound(const loss_spec& loss,
                           const source_hypothesis& source,
                           const dataset& pooled);

// Assembles the context from data: kappa resolved on the pooled features,
// the source risk estimated on the held-out split, its training counterpart
// on the training split, and m_s as above.
bound_context make_bound_context(const loss_spec& loss,
                                 const kernel_spec& kernel, double lambda,
                                 const dataset& train, const dataset& test,
                                 const source_hypothesis& source);

// All certificates in one record; per-index radii come from the per-sample
// source losses on the training set.
stability_bound_report build_report(const loss_spec& loss,
                                    const bound_context& ctx,
                                    const std::vector<double>&
                                        per_sample_losses_of_source);

}  // namespace htl
