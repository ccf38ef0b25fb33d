#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "simcheck/errors.hpp"
#include "simcheck/kernel.hpp"

namespace simcheck {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// R_i = 1-based position of y_i among the order statistics, ties broken by
// input order.
inline std::vector<int> compute_ranks(const Eigen::VectorXd& y) {
  const auto n = static_cast<std::size_t>(y.size());
  if (n < 2) throw InputError("compute_ranks: need at least two responses");
  if (!y.allFinite()) throw InputError("compute_ranks: non-finite response");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return y(static_cast<Eigen::Index>(a)) < y(static_cast<Eigen::Index>(b));
  });
  std::vector<int> ranks(n);
  for (std::size_t pos = 0; pos < n; ++pos) ranks[order[pos]] = static_cast<int>(pos + 1);
  return ranks;
}

namespace detail {

inline void check_smoothing_args(Eigen::Index n, Eigen::Index nz, double g) {
  if (nz != n) throw InputError("smoother: length mismatch between responses and index values");
  if (n < 2) throw InputError("smoother: need at least two observations");
  if (!(g > 0.0) || !std::isfinite(g)) throw InputError("smoother: bandwidth must be positive and finite");
}

// Symmetric matrix of L((z_i - z_k)/g) with a zero diagonal.
inline Eigen::MatrixXd pair_kernel(const Eigen::VectorXd& z, double g, const KernelSpec& kernel) {
  const Eigen::Index n = z.size();
  Eigen::MatrixXd lk(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lk(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = kernel_unchecked(kernel.family, (z(i) - z(j)) / g);
      lk(i, j) = v;
      lk(j, i) = v;
    }
  }
  return lk;
}

}  // namespace detail

struct ResidualFieldMean {
  Eigen::VectorXd values;
  double bandwidth_g = 0.0;
};

// V_i = (n-1)^{-1} sum_{k != i} (Y_i - Y_k) g^{-1} L((Z_i - Z_k)/g)
inline ResidualFieldMean residual_field_mean(const Eigen::VectorXd& y, const Eigen::VectorXd& z, double g,
                                             const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::Index n = y.size();
  detail::check_smoothing_args(n, z.size(), g);
  if (!y.allFinite() || !z.allFinite()) throw InputError("residual_field_mean: non-finite input");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double d = (y(i) - y(k)) * detail::kernel_unchecked(kernel.family, (z(i) - z(k)) / g);
      v(i) += d;
      v(k) -= d;
    }
  }
  v *= 1.0 / (static_cast<double>(n - 1) * g);
  return {std::move(v), g};
}

// Row i, column m holds the step value of the smoothed indicator residual on
// the cell ((m-1)/M, m/M]. With rank levels M = n.
struct ResidualFieldLaw {
  RowMatrix step_values;  // n x M
  std::vector<int> levels;
  int grid = 0;
  double bandwidth_g = 0.0;

  Eigen::Index n() const noexcept { return step_values.rows(); }
};

// Generic form over integer levels in 1..grid: the indicator 1{Phi(Y_i) <= t}
// on cell m equals 1{level_i <= m}. Costs O(n^2 + n * grid).
inline ResidualFieldLaw residual_field_levels(const std::vector<int>& levels, int grid, const Eigen::VectorXd& z,
                                              double g, const KernelSpec& kernel = KernelSpec::smoothing()) {
  const auto n = static_cast<Eigen::Index>(levels.size());
  detail::check_smoothing_args(n, z.size(), g);
  if (grid < 1) throw InputError("residual_field_levels: grid must be positive");
  if (!z.allFinite()) throw InputError("residual_field_levels: non-finite index values");
  for (int lv : levels)
    if (lv < 1 || lv > grid) throw InputError("residual_field_levels: level outside 1..grid");

  // Observations bucketed by level, preserving input order inside a bucket.
  std::vector<std::vector<Eigen::Index>> by_level(static_cast<std::size_t>(grid) + 1);
  for (Eigen::Index k = 0; k < n; ++k) by_level[static_cast<std::size_t>(levels[static_cast<std::size_t>(k)])].push_back(k);

  const Eigen::MatrixXd lk = detail::pair_kernel(z, g, kernel);
  const double scale = 1.0 / (static_cast<double>(n - 1) * g);

  ResidualFieldLaw field;
  field.step_values.resize(n, grid);
  field.levels = levels;
  field.grid = grid;
  field.bandwidth_g = g;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = field.step_values.row(i);
    double prefix = 0.0;
    for (int m = 1; m <= grid; ++m) {
      for (Eigen::Index k : by_level[static_cast<std::size_t>(m)]) prefix += lk(k, i);
      row(m - 1) = prefix;  // C_i(m) for now
    }
    const double total = prefix;  // S_i, so the last column cancels exactly
    const int own = levels[static_cast<std::size_t>(i)];
    for (int m = 1; m <= grid; ++m) {
      const double indicator = own <= m ? total : 0.0;
      row(m - 1) = scale * (indicator - row(m - 1));
    }
  }
  return field;
}

inline void check_rank_permutation(const std::vector<int>& ranks) {
  const auto n = ranks.size();
  std::vector<char> seen(n + 1, 0);
  for (int r : ranks) {
    if (r < 1 || static_cast<std::size_t>(r) > n || seen[static_cast<std::size_t>(r)])
      throw InputError("residual_field_law: ranks must be a permutation of 1..n");
    seen[static_cast<std::size_t>(r)] = 1;
  }
}

// Empirical-distribution version: Phi(Y_i) = R_i / n, so the natural grid has
// n cells and the L2 integrals below are exact.
inline ResidualFieldLaw residual_field_law(const std::vector<int>& ranks, const Eigen::VectorXd& z, double g,
                                           const KernelSpec& kernel = KernelSpec::smoothing()) {
  check_rank_permutation(ranks);
  return residual_field_levels(ranks, static_cast<int>(ranks.size()), z, g, kernel);
}

inline constexpr int kFixedCdfGrid = 512;

// Levels for a fixed normal distribution function Phi((y - location)/scale),
// quantized on a grid of kFixedCdfGrid cells.
inline std::vector<int> fixed_normal_levels(const Eigen::VectorXd& y, double location = 0.0, double scale = 1.0,
                                            int grid = kFixedCdfGrid) {
  if (!(scale > 0.0)) throw InputError("fixed_normal_levels: scale must be positive");
  if (!y.allFinite()) throw InputError("fixed_normal_levels: non-finite response");
  std::vector<int> levels(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double u = 0.5 * std::erfc(-(y(i) - location) / (scale * std::sqrt(2.0)));
    const int lv = static_cast<int>(std::ceil(u * grid));
    levels[static_cast<std::size_t>(i)] = std::clamp(lv, 1, grid);
  }
  return levels;
}

// G_ij = <U_i, U_j>_{L2} = M^{-1} sum_m S_im S_jm, exact for step functions.
inline Eigen::MatrixXd law_gram(const ResidualFieldLaw& field) {
  const Eigen::Index n = field.n();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(field.step_values, 1.0 / field.grid);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

struct NadarayaWatsonFit {
  Eigen::VectorXd values;
  std::vector<Eigen::Index> fallback_rows;  // denominators below the floor
};

inline constexpr double kDenominatorFloor = 1e-30;

// Leave-one-out Nadaraya-Watson with the kernel applied directly to index
// differences (bandwidth absorbed in the index scale).
inline NadarayaWatsonFit loo_nadaraya_watson(const Eigen::VectorXd& y, const Eigen::VectorXd& index,
                                             const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::Index n = y.size();
  detail::check_smoothing_args(n, index.size(), 1.0);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double l = detail::kernel_unchecked(kernel.family, index(i) - index(k));
      num(i) += y(k) * l;
      den(i) += l;
      num(k) += y(i) * l;
      den(k) += l;
    }
  }
  NadarayaWatsonFit fit;
  fit.values.resize(n);
  const double total = y.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (den(i) < kDenominatorFloor) {
      fit.values(i) = (total - y(i)) / static_cast<double>(n - 1);
      fit.fallback_rows.push_back(i);
    } else {
      fit.values(i) = num(i) / den(i);
    }
  }
  return fit;
}

}  // namespace simcheck
