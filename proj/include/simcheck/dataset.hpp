#pragma once

#include <Eigen/Core>

#include "simcheck/errors.hpp"

namespace simcheck {

// Response vector and covariate matrix, one row per observation.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // n x p

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return x.cols(); }

  void validate() const {
    if (x.rows() != y.size()) throw InputError("dataset: response and covariate row counts differ");
    if (!y.allFinite() || !x.allFinite()) throw InputError("dataset: non-finite entries");
  }
};

}  // namespace simcheck
