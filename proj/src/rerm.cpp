#include "htl/rerm.hpp"

#include <cmath>
#include <limits>

#include "htl/errors.hpp"
#include "htl/risk.hpp"

namespace htl {

namespace {

Eigen::VectorXd margins(const Eigen::VectorXd& values,
                        const Eigen::VectorXd& source_scores,
                        const Eigen::VectorXd& labels) {
  return ((values + source_scores).array() * labels.array()).matrix();
}

double mean_loss(const Eigen::VectorXd& m, const loss_spec& loss) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) acc += loss_value(loss, m[i]);
  return acc / static_cast<double>(m.size());
}

Eigen::VectorXd loss_slopes(const Eigen::VectorXd& m, const loss_spec& loss) {
  Eigen::VectorXd out(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i)
    out[i] = loss_derivative(loss, m[i]);
  return out;
}

void check_dims(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& gram,
                const Eigen::VectorXd& source_scores,
                const Eigen::VectorXd& labels) {
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n || coeffs.size() != n || source_scores.size() != n ||
      labels.size() != n)
    throw config_error("rerm: dimension mismatch");
}

struct solve_result {
  Eigen::VectorXd coeffs;
  solver_stats stats;
};

// Descent along the negative optimality residual r = w(y.*phi'(m)) + 2*l*a
// with backtracking line search on F, where w is the per-sample weight
// (1/n for a fresh fit; leave-one-out refits keep the full-sample divisor so
// deleting a stationary point leaves the solution fixed).  The direction
// satisfies dF . (-r) = -r' G r <= 0, with equality only at function-space
// optimality, where the step still contracts the null-space component of r.
// All line search trials reuse v = G a and g = G r, so each iteration costs
// one matrix-vector product.
solve_result minimize(const Eigen::MatrixXd& gram,
                      const Eigen::VectorXd& source_scores,
                      const Eigen::VectorXd& labels, const loss_spec& loss,
                      double lambda, const solver_config& cfg,
                      const Eigen::VectorXd& init, double sample_weight) {
  const Eigen::Index n = gram.rows();
  const double inv_n = sample_weight;
  const auto weighted_loss = [&](const Eigen::VectorXd& m) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) acc += loss_value(loss, m[i]);
    return acc * inv_n;
  };

  Eigen::VectorXd a = init;
  // Never start above the zero vector's objective; it anchors the
  // R(A) + lambda|h|^2 <= R(h_S) guarantee for warm starts too.
  {
    const double f_zero = weighted_loss(
        margins(Eigen::VectorXd::Zero(n), source_scores, labels));
    const Eigen::VectorXd v_init = gram * a;
    const double f_init =
        weighted_loss(margins(v_init, source_scores, labels)) +
        lambda * a.dot(v_init);
    if (!(f_init <= f_zero)) a = Eigen::VectorXd::Zero(n);
  }

  Eigen::VectorXd v = gram * a;
  const double step_cap = 0.5 / lambda;
  double step = step_cap;

  solve_result res;
  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    if (iter > 0 && iter % 64 == 0) v = gram * a;  // curb rounding drift

    const Eigen::VectorXd m = margins(v, source_scores, labels);
    const double quad = a.dot(v);
    const double f = weighted_loss(m) + lambda * quad;
    const Eigen::VectorXd r =
        (inv_n * labels.array() * loss_slopes(m, loss).array()).matrix() +
        2.0 * lambda * a;
    const double rnorm = r.norm();

    if (cfg.on_iteration) cfg.on_iteration(iter, f, rnorm);

    if (rnorm <= cfg.grad_tol) {
      res.coeffs = a;
      res.stats = {iter, rnorm, f};
      return res;
    }
    if (iter == cfg.max_iters) {
      throw convergence_error("rerm: iteration budget exhausted", rnorm);
    }

    const Eigen::VectorXd g = gram * r;
    const double rv = r.dot(v);
    const double rg = r.dot(g);
    const double slope = -rg;  // dF along -r
    // Once the model decrease drops below the rounding noise of F, objective
    // comparisons carry no information; the residual norm still does.
    const double f_noise = 1e-12 * (1.0 + std::abs(f));

    double eta = std::min(2.0 * step, step_cap);
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      const Eigen::VectorXd v_t = v - eta * g;
      const double quad_t = quad - 2.0 * eta * rv + eta * eta * rg;
      const Eigen::VectorXd m_t = margins(v_t, source_scores, labels);
      bool ok;
      if (eta * rg > f_noise) {
        const double f_t = weighted_loss(m_t) + lambda * quad_t;
        ok = f_t <= f + cfg.ls_sufficient_decrease * eta * slope;
      } else {
        const Eigen::VectorXd r_t =
            (inv_n * labels.array() * loss_slopes(m_t, loss).array())
                .matrix() +
            2.0 * lambda * (a - eta * r);
        ok = r_t.norm() <= rnorm;
      }
      if (ok) {
        a -= eta * r;
        v = v_t;
        step = eta;
        accepted = true;
        break;
      }
      eta *= cfg.ls_shrink;
    }
    if (!accepted)
      throw convergence_error("rerm: line search stalled", rnorm);
  }
  throw convergence_error("rerm: unreachable", 0.0);
}

fitted_model assemble(Eigen::VectorXd coeffs, const dataset& train,
                      Eigen::MatrixXd g, const kernel_spec& kernel,
                      double lambda, const loss_spec& loss,
                      const source_hypothesis& source, solver_stats stats) {
  fitted_model model;
  model.coeffs = std::move(coeffs);
  model.train_features = train.features;
  model.gram = std::move(g);
  model.kernel = kernel;
  model.lambda = lambda;
  model.loss = loss;
  model.source = source;
  model.stats = stats;
  return model;
}

}  // namespace

double objective(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& gram,
                 const Eigen::VectorXd& source_scores,
                 const Eigen::VectorXd& labels, const loss_spec& loss,
                 double lambda) {
  check_dims(coeffs, gram, source_scores, labels);
  const Eigen::VectorXd v = gram * coeffs;
  return mean_loss(margins(v, source_scores, labels), loss) +
         lambda * coeffs.dot(v);
}

Eigen::VectorXd optimality_residual(const Eigen::VectorXd& coeffs,
                                    const Eigen::MatrixXd& gram,
                                    const Eigen::VectorXd& source_scores,
                                    const Eigen::VectorXd& labels,
                                    const loss_spec& loss, double lambda) {
  check_dims(coeffs, gram, source_scores, labels);
  const Eigen::VectorXd m =
      margins(gram * coeffs, source_scores, labels);
  const double inv_n = 1.0 / static_cast<double>(gram.rows());
  return (inv_n * labels.array() * loss_slopes(m, loss).array()).matrix() +
         2.0 * lambda * coeffs;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& coeffs,
                         const Eigen::MatrixXd& gram,
                         const Eigen::VectorXd& source_scores,
                         const Eigen::VectorXd& labels, const loss_spec& loss,
                         double lambda) {
  return gram * optimality_residual(coeffs, gram, source_scores, labels, loss,
                                    lambda);
}

fitted_model fit(const dataset& train, const loss_spec& loss,
                 const kernel_spec& kernel, double lambda,
                 const source_hypothesis& source, const solver_config& cfg) {
  train.validate();
  if (!(lambda > 0.0)) throw config_error("fit: lambda must be positive");

  Eigen::MatrixXd g = gram(kernel, train.features);
  const Eigen::VectorXd s = source.scores(train.features);
  solve_result sol =
      minimize(g, s, train.labels, loss, lambda, cfg,
               Eigen::VectorXd::Zero(train.n()),
               1.0 / static_cast<double>(train.n()));
  return assemble(std::move(sol.coeffs), train, std::move(g), kernel, lambda,
                  loss, source, sol.stats);
}

fitted_model refit_without(const fitted_model& full, const dataset& train,
                           Eigen::Index i, const solver_config& cfg) {
  const Eigen::Index n = train.n();
  if (n < 2) throw config_error("refit_without: need at least two samples");
  if (i < 0 || i >= n) throw config_error("refit_without: index out of range");
  if (full.coeffs.size() != n)
    throw config_error("refit_without: model does not match dataset");

  dataset reduced = train.without_row(i);

  // Subset the cached Gram matrix instead of re-evaluating the kernel.
  Eigen::MatrixXd g(n - 1, n - 1);
  Eigen::VectorXd warm(n - 1);
  {
    Eigen::Index r = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      warm[r] = full.coeffs[a];
      Eigen::Index c = 0;
      for (Eigen::Index b = 0; b < n; ++b) {
        if (b == i) continue;
        g(r, c) = full.gram(a, b);
        ++c;
      }
      ++r;
    }
  }

  // The deleted objective keeps the full-sample divisor: dropping a point
  // whose loss slope vanishes at the optimum then leaves the fit unchanged,
  // and the per-index deviation bound is exact rather than up-to-reweighting.
  const Eigen::VectorXd s = full.source.scores(reduced.features);
  solve_result sol = minimize(g, s, reduced.labels, full.loss, full.lambda,
                              cfg, warm, 1.0 / static_cast<double>(n));
  return assemble(std::move(sol.coeffs), reduced, std::move(g), full.kernel,
                  full.lambda, full.loss, full.source, sol.stats);
}

Eigen::VectorXd ridge_oracle(const dataset& train, double lambda,
                             const Eigen::VectorXd& source_scores) {
  train.validate();
  if (!(lambda > 0.0))
    throw config_error("ridge_oracle: lambda must be positive");
  if (source_scores.size() != train.n())
    throw config_error("ridge_oracle: source score length mismatch");

  const double n = static_cast<double>(train.n());
  const Eigen::MatrixXd& x = train.features;
  Eigen::MatrixXd normal = (x.transpose() * x) / n;
  normal.diagonal().array() += lambda;
  const Eigen::VectorXd rhs =
      x.transpose() * (train.labels - source_scores) / n;
  return normal.ldlt().solve(rhs);
}

double rkhs_distance(const fitted_model& a, const fitted_model& b) {
  if (!(a.kernel == b.kernel))
    throw config_error("rkhs_distance: kernels differ");
  if (a.train_features.rows() != b.train_features.rows() ||
      a.train_features.cols() != b.train_features.cols() ||
      a.train_features != b.train_features)
    throw config_error("rkhs_distance: training supports differ");
  const Eigen::VectorXd delta = a.coeffs - b.coeffs;
  return std::sqrt(std::max(0.0, delta.dot(a.gram * delta)));
}

double rkhs_distance_loo(const fitted_model& full, const fitted_model& fold,
                         Eigen::Index removed) {
  if (!(full.kernel == fold.kernel))
    throw config_error("rkhs_distance: kernels differ");
  const Eigen::Index n = full.coeffs.size();
  if (fold.coeffs.size() != n - 1 || removed < 0 || removed >= n)
    throw config_error("rkhs_distance: fold does not match full model");

  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(n);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == removed) continue;
    embedded[j] = fold.coeffs[r++];
  }
  const Eigen::VectorXd delta = full.coeffs - embedded;
  return std::sqrt(std::max(0.0, delta.dot(full.gram * delta)));
}

double fitted_model::predict_score(const Eigen::VectorXd& x) const {
  return correction(x) + source.score(x);
}

double fitted_model::correction(const Eigen::VectorXd& x) const {
  if (x.size() != train_features.cols())
    throw config_error("predict: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < train_features.rows(); ++j)
    acc += coeffs[j] * kernel.eval(train_features.row(j), x);
  return acc;
}

Eigen::VectorXd fitted_model::predict_scores(
    const Eigen::MatrixXd& points) const {
  return corrections(points) + source.scores(points);
}

Eigen::VectorXd fitted_model::corrections(const Eigen::MatrixXd& points) const {
  if (points.cols() != train_features.cols())
    throw config_error("predict: dimension mismatch");
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < train_features.rows(); ++j)
      acc += coeffs[j] * kernel.eval(train_features.row(j), points.row(i));
    out[i] = acc;
  }
  return out;
}

}  // namespace htl
