#pragma once

#include <Eigen/Dense>
#include <string>

namespace htl {

// Labeled binary-classification sample: rows of `features` paired with
// labels in {-1, +1}.
struct dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index d() const { return features.cols(); }

  // Enforces the invariants: at least one row, finite features, labels
  // exactly +-1 and as many as rows.
  void validate() const;

  dataset without_row(Eigen::Index i) const;
};

// CSV with d feature columns followed by a label column; header row required.
dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const dataset& data, const std::string& path);

}  // namespace htl
