#include "htl/datagen.hpp"

#include <cmath>

#include "htl/errors.hpp"

namespace htl {

namespace {

// Sub-stream ids off a scenario seed.
enum : std::uint64_t {
  kStreamSource = 0,
  kStreamTargetTrain = 1,
  kStreamTargetTest = 2,
};

// Balanced two-class sample: positives from `pos`, negatives from `pos`
// mirrored at -mean.  Positive count gets the extra point for odd n.
dataset two_class(const t_component& pos, Eigen::Index n, rng64& rng) {
  const Eigen::Index n_pos = (n + 1) / 2;
  const Eigen::Index n_neg = n - n_pos;

  t_component neg = pos;
  neg.mean = -pos.mean;

  dataset out;
  out.features.resize(n, pos.mean.size());
  out.labels.resize(n);
  out.features.topRows(n_pos) = sample_t(pos, n_pos, rng);
  out.labels.head(n_pos).setConstant(1.0);
  if (n_neg > 0) {
    out.features.bottomRows(n_neg) = sample_t(neg, n_neg, rng);
    out.labels.tail(n_neg).setConstant(-1.0);
  }
  return out;
}

}  // namespace

void scenario_config::validate() const {
  if (n_source < 1 || n_target < 1 || n_test < 1)
    throw config_error("scenario: sample counts must be at least 1");
  if (!(theta >= 0.0 && theta <= 3.14159265358979323846 + 1e-12))
    throw config_error("scenario: theta must lie in [0, pi]");
}

Eigen::MatrixXd sample_t(const t_component& component, Eigen::Index count,
                         rng64& rng) {
  if (count < 1) throw config_error("sample_t: count must be at least 1");
  const Eigen::Index d = component.mean.size();
  if (component.scale.rows() != d || component.scale.cols() != d)
    throw config_error("sample_t: scale shape does not match mean");
  if (!(component.dof > 0.0)) throw config_error("sample_t: dof must be > 0");

  Eigen::LLT<Eigen::MatrixXd> llt(component.scale);
  if (llt.info() != Eigen::Success)
    throw config_error("sample_t: scale matrix is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  Eigen::MatrixXd out(count, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    const double w = rng.chi_square(component.dof);
    out.row(i) = (component.mean + chol * z * std::sqrt(component.dof / w))
                     .transpose();
  }
  return out;
}

dataset make_source(const scenario_config& cfg) {
  cfg.validate();
  t_component pos;
  pos.mean = Eigen::Vector2d(cfg.r, 0.0);
  pos.scale = 3.0 * Eigen::Matrix2d::Identity();
  pos.dof = 2.5;

  rng64 rng = rng64(cfg.seed).split(kStreamSource);
  return two_class(pos, cfg.n_source, rng);
}

dataset make_target(const scenario_config& cfg, target_split split) {
  cfg.validate();
  const double radius = cfg.r + cfg.d_offset;
  t_component pos;
  pos.mean = Eigen::Vector2d(radius * std::cos(cfg.theta),
                             radius * std::sin(cfg.theta));
  pos.scale = Eigen::Matrix2d::Identity();
  pos.dof = 2.5;

  const bool train = split == target_split::train;
  rng64 rng = rng64(cfg.seed).split(train ? kStreamTargetTrain
                                          : kStreamTargetTest);
  return two_class(pos, train ? cfg.n_target : cfg.n_test, rng);
}

}  // namespace htl
