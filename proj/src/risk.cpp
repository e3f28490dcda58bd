#include "htl/risk.hpp"

#include "htl/errors.hpp"
#include "htl/parallel.hpp"
#include "htl/rerm.hpp"

namespace htl {

double empirical_risk(const Eigen::VectorXd& scores,
                      const Eigen::VectorXd& labels, const loss_spec& loss) {
  if (scores.size() != labels.size() || scores.size() == 0)
    throw config_error("empirical_risk: score/label mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    acc += loss_value(loss, scores[i] * labels[i]);
  return acc / static_cast<double>(scores.size());
}

double empirical_risk(const fitted_model& model, const dataset& data,
                      const loss_spec& loss) {
  return empirical_risk(model.predict_scores(data.features), data.labels,
                        loss);
}

double empirical_risk(const source_hypothesis& source, const dataset& data,
                      const loss_spec& loss) {
  return empirical_risk(source.scores(data.features), data.labels, loss);
}

double empirical_risk_minus_i(const Eigen::VectorXd& scores,
                              const Eigen::VectorXd& labels,
                              const loss_spec& loss, Eigen::Index i) {
  const Eigen::Index n = scores.size();
  if (n != labels.size()) throw config_error("risk: score/label mismatch");
  if (n < 2) throw config_error("risk: need n >= 2 to delete a sample");
  if (i < 0 || i >= n) throw config_error("risk: index out of range");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    acc += loss_value(loss, scores[j] * labels[j]);
  }
  return acc / static_cast<double>(n - 1);
}

Eigen::VectorXd per_sample_losses(const Eigen::VectorXd& scores,
                                  const Eigen::VectorXd& labels,
                                  const loss_spec& loss) {
  if (scores.size() != labels.size())
    throw config_error("risk: score/label mismatch");
  Eigen::VectorXd out(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    out[i] = loss_value(loss, scores[i] * labels[i]);
  return out;
}

double loo_risk(const dataset& train, const loss_spec& loss,
                const kernel_spec& kernel, double lambda,
                const source_hypothesis& source, const solver_config& cfg,
                int threads) {
  train.validate();
  const Eigen::Index n = train.n();
  if (n < 2) throw config_error("loo_risk: need n >= 2");

  const fitted_model full = fit(train, loss, kernel, lambda, source, cfg);

  std::vector<double> fold_losses(static_cast<std::size_t>(n));
  parallel_for(static_cast<int>(n), threads, [&](int i) {
    fitted_model fold;
    try {
      fold = refit_without(full, train, i, cfg);
    } catch (const convergence_error& e) {
      throw convergence_error(std::string("loo_risk fold ") +
                                  std::to_string(i) + ": " + e.what(),
                              e.residual(), i);
    }
    const double score = fold.predict_score(train.features.row(i));
    fold_losses[static_cast<std::size_t>(i)] =
        loss_value(loss, score * train.labels[i]);
  });

  double acc = 0.0;
  for (double v : fold_losses) acc += v;
  return acc / static_cast<double>(n);
}

}  // namespace htl
