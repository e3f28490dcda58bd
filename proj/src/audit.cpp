#include "htl/audit.hpp"

#include <cmath>

#include "htl/errors.hpp"
#include "htl/parallel.hpp"
#include "htl/risk.hpp"

namespace htl {

audit_report audit_stability(const dataset& train, const dataset& fresh,
                             const loss_spec& loss, const kernel_spec& kernel,
                             double lambda, const source_hypothesis& source,
                             const solver_config& cfg, int threads) {
  train.validate();
  fresh.validate();
  const Eigen::Index n = train.n();
  if (n < 2) throw config_error("audit_stability: need n >= 2");

  const fitted_model full = fit(train, loss, kernel, lambda, source, cfg);

  // One cross-Gram block serves every fold's fresh-sample evaluation.
  const Eigen::MatrixXd k_fresh =
      cross_gram(kernel, fresh.features, train.features);
  const Eigen::VectorXd s_fresh = source.scores(fresh.features);
  const Eigen::VectorXd s_train = source.scores(train.features);

  if (source.sup_norm_hint()) {
    const double hint = *source.sup_norm_hint();
    const double seen = std::max(s_fresh.cwiseAbs().maxCoeff(),
                                 s_train.cwiseAbs().maxCoeff());
    if (seen > hint * (1.0 + 1e-9) + 1e-12)
      throw config_error(
          "audit: sampled source scores exceed the declared sup-norm hint");
  }
  const Eigen::VectorXd full_fresh_scores =
      k_fresh * full.coeffs + s_fresh;
  const Eigen::VectorXd full_fresh_losses =
      per_sample_losses(full_fresh_scores, fresh.labels, loss);
  const Eigen::VectorXd full_train_scores =
      full.gram * full.coeffs + s_train;
  const Eigen::VectorXd full_train_losses =
      per_sample_losses(full_train_scores, train.labels, loss);

  audit_report report;
  report.per_index.resize(static_cast<std::size_t>(n));
  std::vector<double> max_delta(static_cast<std::size_t>(n), 0.0);

  parallel_for(static_cast<int>(n), threads, [&](int i) {
    fitted_model fold;
    try {
      fold = refit_without(full, train, i, cfg);
    } catch (const convergence_error& e) {
      throw convergence_error(std::string("audit fold ") + std::to_string(i) +
                                  ": " + e.what(),
                              e.residual(), i);
    }

    // Fold scores at the fresh points, reusing the cross-Gram.
    Eigen::VectorXd fold_fresh = s_fresh;
    {
      Eigen::Index r = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        fold_fresh += fold.coeffs[r++] * k_fresh.col(j);
      }
    }
    const Eigen::VectorXd fold_losses =
        per_sample_losses(fold_fresh, fresh.labels, loss);

    per_index_audit& row = report.per_index[static_cast<std::size_t>(i)];
    row.index = i;
    const Eigen::VectorXd deltas =
        (fold_losses - full_fresh_losses).cwiseAbs();
    row.delta_ell_mean = deltas.mean();
    max_delta[static_cast<std::size_t>(i)] = deltas.maxCoeff();

    const double fold_score_at_i = fold.predict_score(train.features.row(i));
    row.delta_ell_at_i =
        std::abs(loss_value(loss, fold_score_at_i * train.labels[i]) -
                 full_train_losses[i]);
    max_delta[static_cast<std::size_t>(i)] =
        std::max(max_delta[static_cast<std::size_t>(i)], row.delta_ell_at_i);

    row.rkhs_dev = rkhs_distance_loo(full, fold, i);
    const double margin_i = full_train_scores[i] * train.labels[i];
    row.deviation_bound_rhs =
        std::sqrt(full.gram(i, i)) *
        std::abs(loss_derivative(loss, margin_i)) /
        (lambda * static_cast<double>(n));
    row.violated = row.rkhs_dev > row.deviation_bound_rhs + 1e-6;
  });

  double hyp = 0.0;
  double pointwise = 0.0;
  double witnessed = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const per_index_audit& row = report.per_index[static_cast<std::size_t>(i)];
    hyp += row.delta_ell_mean;
    pointwise += row.delta_ell_at_i;
    witnessed = std::max(witnessed, max_delta[static_cast<std::size_t>(i)]);
    if (row.violated) ++report.deviation_bound_violations;
  }
  report.emp_hypothesis_stability = hyp / static_cast<double>(n);
  report.emp_pointwise_stability = pointwise / static_cast<double>(n);
  report.witnessed_max_delta = witnessed;
  return report;
}

gen_gap_estimate audit_gen_gap(const scenario_config& scenario,
                               const loss_spec& loss,
                               const kernel_spec& kernel, double lambda,
                               const source_hypothesis& source, int replicas,
                               Eigen::Index test_size, std::uint64_t base_seed,
                               const solver_config& cfg, int threads) {
  if (replicas < 1) throw config_error("audit_gen_gap: replicas must be >= 1");

  std::vector<double> gaps(static_cast<std::size_t>(replicas));
  parallel_for(replicas, threads, [&](int r) {
    scenario_config draw = scenario;
    draw.seed = base_seed + static_cast<std::uint64_t>(r);
    draw.n_test = test_size;
    const dataset train = make_target(draw, target_split::train);
    const dataset test = make_target(draw, target_split::test);
    const fitted_model model = fit(train, loss, kernel, lambda, source, cfg);
    gaps[static_cast<std::size_t>(r)] =
        empirical_risk(model, train, loss) - empirical_risk(model, test, loss);
  });

  gen_gap_estimate est;
  est.replicas = replicas;
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(replicas);
  est.mean = mean;
  if (replicas > 1) {
    double ss = 0.0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    est.std_error = std::sqrt(ss / static_cast<double>(replicas - 1) /
                              static_cast<double>(replicas));
  }
  est.gaps = std::move(gaps);
  return est;
}

loo_audit audit_loo(const dataset& train, const dataset& test,
                    const loss_spec& loss, const kernel_spec& kernel,
                    double lambda, const source_hypothesis& source,
                    const solver_config& cfg, int threads) {
  loo_audit out;
  out.loo_risk = loo_risk(train, loss, kernel, lambda, source, cfg, threads);
  const fitted_model model = fit(train, loss, kernel, lambda, source, cfg);
  out.test_risk = empirical_risk(model, test, loss);
  out.abs_gap = std::abs(out.loo_risk - out.test_risk);
  return out;
}

}  // namespace htl
