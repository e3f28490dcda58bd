#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "htl/datagen.hpp"
#include "htl/dataset.hpp"
#include "htl/kernel.hpp"
#include "htl/losses.hpp"
#include "htl/rerm.hpp"
#include "htl/source.hpp"

namespace htl {

// How the scenario's source classifier is trained: a linear margin fit with
// its own loss and regularization strength.
struct source_trainer_spec {
  loss_spec loss = loss_spec::squared_hinge();
  double lambda = 1e-3;
};

// Shift sweep: for each theta and each loss, fit the transfer model on a
// fresh target draw and record the held-out risk, over seeded replicas.
struct experiment_config {
  scenario_config scenario;
  std::vector<loss_spec> losses;
  kernel_spec kernel = kernel_spec::gaussian(1.0);
  double lambda = 1.0;
  std::vector<double> theta_grid;
  int n_sims = 1000;
  source_trainer_spec source_trainer;
  std::string output_path = "negative_transfer.csv";

  void validate() const;

  // 17 equally spaced points on [0, pi].
  static std::vector<double> default_theta_grid();
};

struct curve_row {
  double theta = 0.0;
  std::string loss;
  double median_risk = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n_sims = 0;
};

// Primal minimizer of (1/n) sum phi((w.x_i) y_i) + lambda |w|^2; the
// function space of the linear kernel, solved in weight coordinates.
Eigen::VectorXd train_linear_source(const dataset& data, const loss_spec& loss,
                                    double lambda,
                                    const solver_config& cfg = {});

// One row per (theta, loss), thetas in grid order.  A row aggregates the
// replicas whose fits converged and requires at least 90% of them; fewer is
// an error.  Replica r derives all of its draws from base_seed + r.
std::vector<curve_row> run_negative_transfer(const experiment_config& cfg,
                                             std::uint64_t base_seed,
                                             int threads = 1,
                                             const solver_config& solver = {});

// Header "theta,loss,median_risk,q25,q75,n_sims"; byte-stable for a fixed
// build and inputs.
void write_curve_csv(const std::vector<curve_row>& rows,
                     const std::string& path);

// JSON (de)serialization for the config surface.
nlohmann::json loss_to_json(const loss_spec& loss);
loss_spec loss_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const kernel_spec& kernel);
kernel_spec kernel_from_json(const nlohmann::json& j);
nlohmann::json source_to_json(const source_hypothesis& source);
source_hypothesis source_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const scenario_config& cfg);
scenario_config scenario_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const experiment_config& cfg);
experiment_config experiment_from_json(const nlohmann::json& j);

}  // namespace htl
