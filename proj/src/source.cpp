#include "htl/source.hpp"

#include <cmath>

#include "htl/errors.hpp"

namespace htl {

double source_hypothesis::score(const Eigen::VectorXd& x) const {
  double v = std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, linear_form>) {
          if (f.weights.size() != x.size())
            throw config_error("source: dimension mismatch");
          return f.weights.dot(x);
        } else if constexpr (std::is_same_v<T, kernel_form>) {
          if (f.support.cols() != x.size())
            throw config_error("source: dimension mismatch");
          double acc = 0.0;
          for (Eigen::Index j = 0; j < f.support.rows(); ++j)
            acc += f.coeffs[j] * f.kernel.eval(f.support.row(j), x);
          return acc;
        } else {
          return f.value;
        }
      },
      form_);
  for (const squash& sq : squashes_) v = sq.bound * std::tanh(sq.inner * v);
  return v;
}

Eigen::VectorXd source_hypothesis::scores(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = score(points.row(i));
  return out;
}

double source_hypothesis::sup_norm(const Eigen::MatrixXd* sample) const {
  if (sup_norm_hint_) return *sup_norm_hint_;
  if (!squashes_.empty()) return std::abs(squashes_.back().bound);
  if (std::holds_alternative<constant_form>(form_))
    return std::abs(std::get<constant_form>(form_).value);
  if (sample == nullptr || sample->rows() == 0)
    throw config_error(
        "source: sup-norm unknown and no sample available to estimate it");
  return scores(*sample).cwiseAbs().maxCoeff();
}

void source_hypothesis::push_squash(squash sq) {
  squashes_.push_back(sq);
  sup_norm_hint_.reset();
}

source_hypothesis scale_score(const source_hypothesis& source,
                              double target_bound,
                              const Eigen::MatrixXd* sample) {
  if (!(target_bound > 0.0))
    throw config_error("scale_score: target bound must be positive");
  const double m = source.sup_norm(sample);
  const double atanh99 = std::atanh(0.99);
  source_hypothesis scaled = source;
  // A zero source stays zero; any inner slope works, zero is the tidy one.
  scaled.push_squash({m > 0.0 ? atanh99 / m : 0.0, target_bound});
  scaled.set_sup_norm_hint(0.99 * target_bound);
  return scaled;
}

}  // namespace htl
