#pragma once

#include <stdexcept>
#include <string>

namespace htl {

// Unreadable/unwritable/corrupt data files.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: missing fields, dimension mismatches, invalid parameters.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver exhausted its iteration budget before reaching tolerance.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double residual, int fold = -1)
      : std::runtime_error(what), residual_(residual), fold_(fold) {}

  double residual() const { return residual_; }
  // Index of the leave-one-out fold that failed, or -1 outside l.o.o. loops.
  int fold() const { return fold_; }

 private:
  double residual_;
  int fold_;
};

}  // namespace htl
