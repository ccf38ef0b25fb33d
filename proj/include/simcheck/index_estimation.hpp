#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "simcheck/dataset.hpp"
#include "simcheck/errors.hpp"
#include "simcheck/index_geometry.hpp"
#include "simcheck/kernel.hpp"
#include "simcheck/nelder_mead.hpp"
#include "simcheck/rng.hpp"
#include "simcheck/smoothers.hpp"

namespace simcheck {

struct OptimizerConfig {
  int max_evals = 2000;
  double tolerance = 1e-8;
  int starts = 5;
  std::uint64_t seed = 20140401;
  double initial_step = 0.1;
  // Law fit only; non-positive means the default 0.3 * n^{-1/5}.
  double gy_start = 0.0;
};

struct FitResult {
  Direction direction;
  Eigen::VectorXd raw;  // unnormalized minimizer, beta part only
  double raw_norm = 0.0;
  double bandwidth_g = 0.0;
  double objective = 0.0;
  int optimizer_evals = 0;
  bool converged = false;
  std::optional<double> gy;
  int starts_used = 0;
  long floor_events = 0;  // denominator or density floors hit at the optimum
  bool bandwidth_out_of_range = false;
};

struct StandardizedCovariates {
  Eigen::MatrixXd x;
  Eigen::VectorXd scales;
};

// Divide each column by its root mean squared deviation about the column
// mean. No centering: only differences of rows enter the objectives.
inline StandardizedCovariates standardize_covariates(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw InputError("standardize_covariates: empty covariate matrix");
  StandardizedCovariates out;
  out.scales.resize(x.cols());
  out.x.resize(n, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double rms = std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n));
    if (!(rms > 0.0) || !std::isfinite(rms))
      throw DegenerateCovariate("standardize_covariates: column x" + std::to_string(j + 1) + " has zero variance",
                                static_cast<std::size_t>(j));
    out.scales(j) = rms;
    out.x.col(j) = x.col(j) / rms;
  }
  return out;
}

// Sum of squared leave-one-out Nadaraya-Watson residuals with the kernel on
// raw index differences; |beta| plays the role of an inverse bandwidth.
inline double sls_objective(const Eigen::VectorXd& beta_raw, const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y,
                            const KernelSpec& kernel = KernelSpec::smoothing(), long* floor_events = nullptr) {
  const NadarayaWatsonFit fit = loo_nadaraya_watson(y, x_std * beta_raw, kernel);
  if (floor_events) *floor_events += static_cast<long>(fit.fallback_rows.size());
  return (y - fit.values).squaredNorm();
}

inline constexpr double kDensityFloor = 1e-30;

// Negative log pseudo-likelihood of the rank-based leave-one-out conditional
// density estimates:
//   -sum_i log[ sum_{j!=i} g_y^{-1} L((R_i-R_j)/(n g_y)) Lt_ij / sum_{j!=i} Lt_ij ].
inline double law_objective(const Eigen::VectorXd& beta_raw, double g_y, const Eigen::MatrixXd& x_std,
                            const std::vector<int>& ranks, const KernelSpec& kernel = KernelSpec::smoothing(),
                            long* floor_events = nullptr) {
  const Eigen::Index n = x_std.rows();
  if (static_cast<Eigen::Index>(ranks.size()) != n) throw InputError("law_objective: ranks length mismatch");
  if (!(g_y > 0.0)) throw InputError("law_objective: g_y must be positive");
  const Eigen::VectorXd index = x_std * beta_raw;
  const double scale = 1.0 / (static_cast<double>(n) * g_y);
  Eigen::VectorXd num = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ri = ranks[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = detail::kernel_unchecked(kernel.family, index(i) - index(j));
      const double r = detail::kernel_unchecked(kernel.family, (ri - ranks[static_cast<std::size_t>(j)]) * scale);
      num(i) += r * a;
      num(j) += r * a;
      den(i) += a;
      den(j) += a;
    }
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double density = den(i) > 0.0 ? num(i) / (g_y * den(i)) : 0.0;
    if (!(density >= kDensityFloor)) {
      density = kDensityFloor;
      if (floor_events) ++*floor_events;
    }
    total += std::log(density);
  }
  return -total;
}

namespace detail {

// Least-squares slope of `target` on the columns of x (intercept included).
inline Eigen::VectorXd ols_direction(const Eigen::MatrixXd& x, const Eigen::VectorXd& target) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
  return coef.tail(x.cols());
}

inline void fold_first_positive(Eigen::VectorXd& theta, Eigen::Index p) {
  if (theta(0) < 0.0) theta.head(p) *= -1.0;
}

// OLS slope scaled to `ols_norm`, then random unit directions scaled to
// 0.5, 1, 2, 4, ... cycling.
inline std::vector<Eigen::VectorXd> default_starts(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& target,
                                                   const OptimizerConfig& cfg) {
  const Eigen::Index p = x_std.cols();
  const double ols_norm = std::pow(static_cast<double>(x_std.rows()), 0.2);
  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd ols = ols_direction(x_std, target);
  if (ols.allFinite() && ols.norm() > 0.0) {
    ols *= ols_norm / ols.norm();
    fold_first_positive(ols, p);
    starts.push_back(ols);
  }
  static constexpr double kNorms[] = {0.5, 1.0, 2.0, 4.0};
  Rng rng = child_rng(cfg.seed, 0x5157A27ULL);
  std::normal_distribution<double> normal;
  for (int k = 0; static_cast<int>(starts.size()) < cfg.starts; ++k) {
    Eigen::VectorXd v(p);
    for (Eigen::Index j = 0; j < p; ++j) v(j) = normal(rng);
    if (!(v.norm() > 0.0)) continue;
    v *= kNorms[k % 4] / v.norm();
    fold_first_positive(v, p);
    starts.push_back(v);
  }
  return starts;
}

inline bool bandwidth_out_of_range(double g, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return g < 0.1 * std::pow(nn, -0.25) || g > 10.0 * std::pow(nn, -0.2);
}

inline FitResult finish_fit(const Eigen::VectorXd& raw, Eigen::Index n) {
  FitResult fit;
  fit.raw = raw;
  fit.raw_norm = raw.norm();
  fit.direction = normalize_direction(raw);
  fit.bandwidth_g = 1.0 / fit.raw_norm;
  fit.bandwidth_out_of_range = bandwidth_out_of_range(fit.bandwidth_g, n);
  return fit;
}

}  // namespace detail

inline NelderMeadOptions nm_options(const OptimizerConfig& cfg) {
  NelderMeadOptions opt;
  opt.max_evals = cfg.max_evals;
  opt.tolerance = cfg.tolerance;
  opt.initial_step = cfg.initial_step;
  return opt;
}

// Semiparametric least squares on standardized covariates from explicit
// starting points; keeps the best local minimum.
inline FitResult fit_index_mean(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y,
                                std::span<const Eigen::VectorXd> starts, const OptimizerConfig& cfg,
                                const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::Index p = x_std.cols();
  if (p < 2) throw InputError("estimate_index_mean: need at least two covariates");
  if (y.size() != x_std.rows()) throw InputError("estimate_index_mean: length mismatch");
  auto objective = [&](const Eigen::VectorXd& b) { return sls_objective(b, x_std, y, kernel); };
  auto fold = [p](Eigen::VectorXd& b) { detail::fold_first_positive(b, p); };

  NelderMeadResult best;
  int evals = 0, used = 0;
  for (const auto& s : starts) {
    if (s.size() != p) throw InputError("estimate_index_mean: start has wrong length");
    NelderMeadResult r = nelder_mead(objective, s, nm_options(cfg), fold);
    evals += r.evals;
    ++used;
    if (r.value < best.value && r.x.allFinite() && r.x(0) > 0.0) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw EstimationFailure("estimate_index_mean: no start produced a finite objective");
  FitResult fit = detail::finish_fit(best.x, x_std.rows());
  fit.objective = best.value;
  fit.optimizer_evals = evals;
  fit.converged = best.converged;
  fit.starts_used = used;
  sls_objective(best.x, x_std, y, kernel, &fit.floor_events);
  return fit;
}

inline FitResult estimate_index_mean(const Dataset& data, const OptimizerConfig& cfg = {},
                                     const KernelSpec& kernel = KernelSpec::smoothing()) {
  data.validate();
  if (data.p() < 2) throw InputError("estimate_index_mean: need at least two covariates");
  const StandardizedCovariates xs = standardize_covariates(data.x);
  const auto starts = detail::default_starts(xs.x, data.y, cfg);
  return fit_index_mean(xs.x, data.y, starts, cfg, kernel);
}

inline double default_gy_start(Eigen::Index n) { return 0.3 * std::pow(static_cast<double>(n), -0.2); }

// Joint minimization over (beta_raw, log g_y).
inline FitResult fit_index_law(const Eigen::MatrixXd& x_std, const std::vector<int>& ranks,
                               std::span<const Eigen::VectorXd> beta_starts, double gy_start,
                               const OptimizerConfig& cfg, const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::Index p = x_std.cols();
  if (p < 2) throw InputError("estimate_index_law: need at least two covariates");
  if (!(gy_start > 0.0)) throw InputError("estimate_index_law: g_y start must be positive");
  check_rank_permutation(ranks);
  auto objective = [&](const Eigen::VectorXd& theta) {
    return law_objective(theta.head(p), std::exp(theta(p)), x_std, ranks, kernel);
  };
  auto fold = [p](Eigen::VectorXd& theta) { detail::fold_first_positive(theta, p); };

  NelderMeadResult best;
  int evals = 0, used = 0;
  for (const auto& s : beta_starts) {
    if (s.size() != p) throw InputError("estimate_index_law: start has wrong length");
    Eigen::VectorXd theta(p + 1);
    theta.head(p) = s;
    theta(p) = std::log(gy_start);
    NelderMeadResult r = nelder_mead(objective, theta, nm_options(cfg), fold);
    evals += r.evals;
    ++used;
    if (r.value < best.value && r.x.allFinite() && r.x(0) > 0.0) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw EstimationFailure("estimate_index_law: no start produced a finite objective");
  FitResult fit = detail::finish_fit(best.x.head(p), x_std.rows());
  fit.objective = best.value;
  fit.optimizer_evals = evals;
  fit.converged = best.converged;
  fit.starts_used = used;
  fit.gy = std::exp(best.x(p));
  law_objective(best.x.head(p), *fit.gy, x_std, ranks, kernel, &fit.floor_events);
  return fit;
}

inline FitResult estimate_index_law(const Dataset& data, const OptimizerConfig& cfg = {},
                                    const KernelSpec& kernel = KernelSpec::smoothing()) {
  data.validate();
  if (data.p() < 2) throw InputError("estimate_index_law: need at least two covariates");
  const StandardizedCovariates xs = standardize_covariates(data.x);
  const std::vector<int> ranks = compute_ranks(data.y);
  Eigen::VectorXd rank_vec(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) rank_vec(i) = ranks[static_cast<std::size_t>(i)];
  const auto starts = detail::default_starts(xs.x, rank_vec, cfg);
  const double gy0 = cfg.gy_start > 0.0 ? cfg.gy_start : default_gy_start(data.n());
  return fit_index_law(xs.x, ranks, starts, gy0, cfg, kernel);
}

// Bandwidth selection along a fixed direction: the same criteria as the
// index fits, minimized over the scale s of s * beta only (and log g_y for
// the law criterion). Returns a FitResult whose direction is `dir`.
inline FitResult profile_bandwidth_mean(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Direction& dir,
                                        const OptimizerConfig& cfg = {},
                                        const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::VectorXd& beta = dir.beta();
  auto objective = [&](const Eigen::VectorXd& t) { return sls_objective(std::exp(t(0)) * beta, x, y, kernel); };
  NelderMeadResult best;
  int evals = 0;
  for (double s0 : {1.0, 2.0, 4.0, 8.0}) {
    NelderMeadResult r = nelder_mead(objective, Eigen::VectorXd::Constant(1, std::log(s0)), nm_options(cfg));
    evals += r.evals;
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw EstimationFailure("profile_bandwidth_mean: no finite objective");
  FitResult fit = detail::finish_fit(std::exp(best.x(0)) * beta, x.rows());
  fit.objective = best.value;
  fit.optimizer_evals = evals;
  fit.converged = best.converged;
  fit.starts_used = 4;
  return fit;
}

inline FitResult profile_bandwidth_law(const Eigen::MatrixXd& x, const std::vector<int>& ranks, const Direction& dir,
                                       double gy_start, const OptimizerConfig& cfg = {},
                                       const KernelSpec& kernel = KernelSpec::smoothing()) {
  const Eigen::VectorXd& beta = dir.beta();
  auto objective = [&](const Eigen::VectorXd& t) {
    return law_objective(std::exp(t(0)) * beta, std::exp(t(1)), x, ranks, kernel);
  };
  NelderMeadResult best;
  int evals = 0;
  for (double s0 : {1.0, 2.0, 4.0, 8.0}) {
    NelderMeadResult r = nelder_mead(objective, Eigen::Vector2d(std::log(s0), std::log(gy_start)), nm_options(cfg));
    evals += r.evals;
    if (r.value < best.value) best = std::move(r);
  }
  if (!std::isfinite(best.value)) throw EstimationFailure("profile_bandwidth_law: no finite objective");
  FitResult fit = detail::finish_fit(std::exp(best.x(0)) * beta, x.rows());
  fit.objective = best.value;
  fit.optimizer_evals = evals;
  fit.converged = best.converged;
  fit.starts_used = 4;
  fit.gy = std::exp(best.x(1));
  return fit;
}

}  // namespace simcheck
