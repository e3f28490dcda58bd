#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "htl/dataset.hpp"
#include "htl/rng.hpp"

namespace htl {

// Multivariate Student-t component: mean + scale matrix + degrees of freedom.
struct t_component {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scale;
  double dof = 2.5;
};

// Two-class synthetic shift scenario.  Source classes sit at (+-r, 0) with
// scale 3*I; target classes sit at +-(r + d_offset)(cos theta, sin theta)
// with unit scale.  theta = 0 aligns the decision boundaries, theta = pi
// flips them.
struct scenario_config {
  double r = 5.0;
  double d_offset = 5.0;
  double theta = 0.0;
  Eigen::Index n_source = 10000;
  Eigen::Index n_target = 100;
  Eigen::Index n_test = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

// count draws of mean + z * sqrt(dof / w), z ~ N(0, scale) via Cholesky,
// w ~ chi-square(dof).  One row per draw.
Eigen::MatrixXd sample_t(const t_component& component, Eigen::Index count,
                         rng64& rng);

dataset make_source(const scenario_config& cfg);

enum class target_split { train, test };
dataset make_target(const scenario_config& cfg, target_split split);

}  // namespace htl
