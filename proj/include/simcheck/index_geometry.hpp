#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "simcheck/errors.hpp"

namespace simcheck {

// Unit-norm index direction whose first component is strictly positive.
class Direction {
 public:
  Direction() = default;

  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  Eigen::Index dim() const noexcept { return beta_.size(); }

 private:
  explicit Direction(Eigen::VectorXd beta) : beta_(std::move(beta)) {}
  friend Direction normalize_direction(const Eigen::VectorXd& v);

  Eigen::VectorXd beta_;
};

inline Direction normalize_direction(const Eigen::VectorXd& v) {
  if (v.size() < 1 || !v.allFinite()) throw InputError("normalize_direction: non-finite or empty vector");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DegenerateDirection("normalize_direction: zero vector has no direction");
  Eigen::VectorXd beta = v / norm;
  if (beta(0) == 0.0) throw IdentificationError("normalize_direction: first component must be nonzero");
  if (beta(0) < 0.0) beta = -beta;
  return Direction(std::move(beta));
}

// Seeds whose |cos| with beta exceeds this are replaced by the spare e_1.
inline constexpr double kParallelThreshold = 1.0 - 1e-8;

struct ComplementBasis {
  Eigen::MatrixXd columns;  // p x (p-1)
  bool fallback_used = false;
};

// Gram-Schmidt of (beta, e_2, ..., e_p) with beta dropped. A seed nearly
// parallel to beta is swapped for the next unused canonical vector; columns
// stay ordered by the index of the canonical vector they come from.
inline ComplementBasis complement_basis_ex(const Direction& d) {
  const Eigen::Index p = d.dim();
  const Eigen::VectorXd& beta = d.beta();
  ComplementBasis out;
  out.columns.resize(p, p - 1);
  if (p < 2) return out;

  std::vector<Eigen::Index> seeds;
  std::vector<Eigen::Index> spares{0};
  for (Eigen::Index j = 1; j < p; ++j) {
    if (std::abs(beta(j)) > kParallelThreshold) {
      out.fallback_used = true;
      continue;
    }
    seeds.push_back(j);
  }
  // Spares are e_1 first; e_1 can never be near-parallel since then every
  // other seed is near-orthogonal and none was dropped.
  std::size_t next_spare = 0;
  while (static_cast<Eigen::Index>(seeds.size()) < p - 1) seeds.push_back(spares.at(next_spare++));
  std::sort(seeds.begin(), seeds.end());

  for (Eigen::Index c = 0; c < p - 1; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(p, seeds[static_cast<std::size_t>(c)]);
    // Two passes of modified Gram-Schmidt keep orthogonality at 1e-15 level.
    for (int pass = 0; pass < 2; ++pass) {
      v -= beta.dot(v) * beta;
      for (Eigen::Index k = 0; k < c; ++k) v -= out.columns.col(k).dot(v) * out.columns.col(k);
    }
    out.columns.col(c) = v / v.norm();
  }
  return out;
}

inline Eigen::MatrixXd complement_basis(const Direction& d) { return complement_basis_ex(d).columns; }

class IndexFrame {
 public:
  explicit IndexFrame(Direction d) : direction_(std::move(d)) {
    auto basis = complement_basis_ex(direction_);
    complement_ = std::move(basis.columns);
    fallback_used_ = basis.fallback_used;
  }

  // Explicit complement, e.g. a rotated A(beta) Q. Orthonormality is the
  // caller's responsibility.
  IndexFrame(Direction d, Eigen::MatrixXd complement)
      : direction_(std::move(d)), complement_(std::move(complement)) {
    if (complement_.rows() != direction_.dim() || complement_.cols() != direction_.dim() - 1)
      throw InputError("IndexFrame: complement must be p x (p-1)");
  }

  const Direction& direction() const noexcept { return direction_; }
  const Eigen::VectorXd& beta() const noexcept { return direction_.beta(); }
  const Eigen::MatrixXd& complement() const noexcept { return complement_; }
  bool complement_fallback_used() const noexcept { return fallback_used_; }
  Eigen::Index dim() const noexcept { return direction_.dim(); }

 private:
  Direction direction_;
  Eigen::MatrixXd complement_;
  bool fallback_used_ = false;
};

struct Projection {
  Eigen::VectorXd z;  // n
  Eigen::MatrixXd w;  // n x (p-1)
};

inline Projection project(const Eigen::MatrixXd& x, const IndexFrame& frame) {
  if (x.cols() != frame.dim()) throw InputError("project: covariate columns do not match direction length");
  return {x * frame.beta(), x * frame.complement()};
}

}  // namespace simcheck
