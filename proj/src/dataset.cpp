#include "htl/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "htl/errors.hpp"

namespace htl {

void dataset::validate() const {
  if (features.rows() < 1) throw config_error("dataset: empty");
  if (labels.size() != features.rows())
    throw config_error("dataset: label count does not match row count");
  if (!features.allFinite()) throw config_error("dataset: non-finite feature");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw config_error("dataset: label not in {-1, +1}");
}

dataset dataset::without_row(Eigen::Index i) const {
  if (i < 0 || i >= n()) throw config_error("dataset: row index out of range");
  dataset out;
  out.features.resize(n() - 1, d());
  out.labels.resize(n() - 1);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < n(); ++j) {
    if (j == i) continue;
    out.features.row(r) = features.row(j);
    out.labels[r] = labels[j];
    ++r;
  }
  return out;
}

dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw io_error("dataset file is empty: " + path);

  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) !=
                                       std::string::npos)
          throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw io_error("bad numeric cell at " + path + ":" +
                       std::to_string(line_no));
      }
    }
    if (row.size() < 2)
      throw io_error("dataset rows need at least one feature and a label: " +
                     path);
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw io_error("ragged row at " + path + ":" + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("dataset has no data rows: " + path);

  dataset out;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(width - 1);
  out.features.resize(n, d);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out.features(i, j) = rows[i][j];
    out.labels[i] = rows[i][width - 1];
  }
  try {
    out.validate();
  } catch (const config_error& e) {
    throw io_error(std::string(e.what()) + " in " + path);
  }
  return out;
}

void write_dataset_csv(const dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw io_error("cannot write dataset file: " + path);
  for (Eigen::Index j = 0; j < data.d(); ++j) out << "x" << (j + 1) << ",";
  out << "label\n";
  char buf[40];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features(i, j));
      out << buf << ",";
    }
    out << (data.labels[i] > 0 ? "1" : "-1") << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace htl
