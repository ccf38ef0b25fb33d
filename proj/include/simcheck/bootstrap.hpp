#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "simcheck/errors.hpp"
#include "simcheck/index_estimation.hpp"
#include "simcheck/index_geometry.hpp"
#include "simcheck/parallel.hpp"
#include "simcheck/rng.hpp"
#include "simcheck/smoothers.hpp"
#include "simcheck/test_statistics.hpp"

namespace simcheck {

// Two-point law with mean 0, variance 1 and third moment 1.
struct MammenLaw {
  static inline const double low = (1.0 - std::sqrt(5.0)) / 2.0;
  static inline const double high = (1.0 + std::sqrt(5.0)) / 2.0;
  static inline const double p_low = (5.0 + std::sqrt(5.0)) / 10.0;
};

inline Eigen::VectorXd mammen_multipliers(Rng& rng, Eigen::Index n) {
  if (n < 1) throw InputError("mammen_multipliers: n must be positive");
  std::bernoulli_distribution pick_low(MammenLaw::p_low);
  Eigen::VectorXd eta(n);
  for (Eigen::Index i = 0; i < n; ++i) eta(i) = pick_low(rng) ? MammenLaw::low : MammenLaw::high;
  return eta;
}

using MultiplierSource = std::function<Eigen::VectorXd(Rng&, Eigen::Index)>;

struct BootstrapConfig {
  int replicates = 499;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // Mean test: optimizer budget for the per-replicate re-estimation.
  OptimizerConfig optimizer{};
  int replicate_starts = 2;
  int max_redraws = 3;
  // Replaces the Mammen draws; test hook.
  MultiplierSource multipliers{};
};

struct BootstrapResult {
  std::vector<double> replicate_stats;  // successful replicates, by replicate index
  double observed = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  int B = 0;
  int failed = 0;
  int redraws = 0;
  double alpha = 0.10;
  std::uint64_t seed = 0;
  long optimizer_calls = 0;
  bool degraded = false;  // more than 5% of replicates failed

  bool reject() const { return observed > critical_value; }
};

// ceil((1 - alpha)(B + 1))-th order statistic, clamped to the available
// replicates.
inline double bootstrap_critical_value(std::vector<double> stats, double alpha) {
  if (stats.empty()) return std::numeric_limits<double>::infinity();
  std::sort(stats.begin(), stats.end());
  const double b1 = static_cast<double>(stats.size() + 1);
  auto k = static_cast<long>(std::ceil((1.0 - alpha) * b1 - 1e-9));
  k = std::clamp(k, 1L, static_cast<long>(stats.size()));
  return stats[static_cast<std::size_t>(k - 1)];
}

inline double bootstrap_p_value(const std::vector<double>& stats, double observed) {
  const auto exceed = std::count_if(stats.begin(), stats.end(), [&](double t) { return t >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(stats.size()) + 1.0);
}

namespace detail {

inline void check_bootstrap_config(const BootstrapConfig& cfg) {
  if (cfg.replicates < 1) throw InputError("bootstrap: B must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("bootstrap: alpha must lie in (0, 1)");
}

inline Eigen::VectorXd draw_multipliers(const BootstrapConfig& cfg, Rng& rng, Eigen::Index n) {
  return cfg.multipliers ? cfg.multipliers(rng, n) : mammen_multipliers(rng, n);
}

inline BootstrapResult summarize(const std::vector<std::optional<double>>& slots, double observed,
                                 const BootstrapConfig& cfg) {
  BootstrapResult res;
  res.B = cfg.replicates;
  res.alpha = cfg.alpha;
  res.seed = cfg.seed;
  res.observed = observed;
  for (const auto& s : slots) {
    if (s) res.replicate_stats.push_back(*s);
    else ++res.failed;
  }
  res.degraded = res.failed > 0.05 * cfg.replicates;
  res.critical_value = bootstrap_critical_value(res.replicate_stats, cfg.alpha);
  res.p_value = bootstrap_p_value(res.replicate_stats, observed);
  return res;
}

}  // namespace detail

// Observed mean-test ingredients on standardized covariates.
struct MeanTestInputs {
  Eigen::MatrixXd x_std;
  Eigen::VectorXd y;
  FitResult fit;
};

// Wild residual bootstrap with re-estimation of the index for every
// replicate. One result per test bandwidth in `hs`; the replicate data and
// fits are shared across bandwidths, the bandwidth h is never re-chosen.
inline std::vector<BootstrapResult> bootstrap_mean(const MeanTestInputs& in, std::span<const double> hs,
                                                   std::span<const double> observed, const BootstrapConfig& cfg,
                                                   const KernelSpec& smoothing = KernelSpec::smoothing(),
                                                   const KernelSpec& testing = KernelSpec::testing()) {
  detail::check_bootstrap_config(cfg);
  if (hs.size() != observed.size()) throw InputError("bootstrap_mean: one observed statistic per bandwidth");
  const Eigen::Index n = in.y.size();
  const Eigen::Index p = in.x_std.cols();
  const Eigen::VectorXd fitted = loo_nadaraya_watson(in.y, in.x_std * in.fit.raw, smoothing).values;
  const Eigen::VectorXd resid = in.y - fitted;

  const auto B = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<std::optional<double>>> slots(hs.size(), std::vector<std::optional<double>>(B));
  std::vector<int> redraws(B, 0), calls(B, 0);

  parallel_for(B, cfg.threads, [&](std::size_t b) {
    for (int attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
      Rng rng = child_rng(cfg.seed, b, static_cast<std::uint64_t>(attempt));
      const Eigen::VectorXd eta = detail::draw_multipliers(cfg, rng, n);
      const Eigen::VectorXd y_star = fitted + eta.cwiseProduct(resid);
      try {
        FitResult fit_star;
        if (y_star == in.y) {
          fit_star = in.fit;  // replicate reproduces the observed sample
        } else {
          std::vector<Eigen::VectorXd> starts{in.fit.raw};
          if (cfg.replicate_starts > 1) {
            Eigen::VectorXd ols = detail::ols_direction(in.x_std, y_star);
            if (ols.allFinite() && ols.norm() > 0.0) {
              ols *= in.fit.raw_norm / ols.norm();
              detail::fold_first_positive(ols, p);
              starts.push_back(ols);
            }
          }
          ++calls[b];
          fit_star = fit_index_mean(in.x_std, y_star, starts, cfg.optimizer, smoothing);
        }
        const IndexFrame frame(fit_star.direction);
        const Projection proj = project(in.x_std, frame);
        const ResidualFieldMean field = residual_field_mean(y_star, proj.z, fit_star.bandwidth_g, smoothing);
        const Eigen::MatrixXd inner = field.values * field.values.transpose();
        std::vector<double> t(hs.size());
        for (std::size_t k = 0; k < hs.size(); ++k)
          t[k] = quadratic_form(inner, PairWeights(proj.z, proj.w, hs[k], testing)).t_n;
        for (std::size_t k = 0; k < hs.size(); ++k) slots[k][b] = t[k];
        redraws[b] = attempt;
        return;
      } catch (const Error&) {
        redraws[b] = attempt;
      }
    }
  });

  std::vector<BootstrapResult> out;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    BootstrapResult r = detail::summarize(slots[k], observed[k], cfg);
    for (std::size_t b = 0; b < B; ++b) {
      r.redraws += redraws[b];
      r.optimizer_calls += calls[b];
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline BootstrapResult bootstrap_mean(const MeanTestInputs& in, double h, double observed, const BootstrapConfig& cfg,
                                      const KernelSpec& smoothing = KernelSpec::smoothing(),
                                      const KernelSpec& testing = KernelSpec::testing()) {
  return bootstrap_mean(in, std::span<const double>(&h, 1), std::span<const double>(&observed, 1), cfg, smoothing,
                        testing)
      .front();
}

// Multiplier bootstrap on fixed residual fields: row i scaled by eta_i, i.e.
// Gram_ij -> eta_i eta_j Gram_ij. The index is not re-estimated.
inline std::vector<BootstrapResult> bootstrap_law(const Eigen::MatrixXd& gram, std::span<const PairWeights> weights,
                                                  std::span<const double> observed, const BootstrapConfig& cfg) {
  detail::check_bootstrap_config(cfg);
  if (weights.size() != observed.size()) throw InputError("bootstrap_law: one observed statistic per bandwidth");
  const Eigen::Index n = gram.rows();
  const auto B = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::vector<std::optional<double>>> slots(weights.size(), std::vector<std::optional<double>>(B));
  parallel_for(B, cfg.threads, [&](std::size_t b) {
    Rng rng = child_rng(cfg.seed, b, 0);
    const Eigen::VectorXd eta = detail::draw_multipliers(cfg, rng, n);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      try {
        slots[k][b] = quadratic_form_scaled(gram, weights[k], eta).t_n;
      } catch (const DegenerateStatistic&) {
      }
    }
  });
  std::vector<BootstrapResult> out;
  for (std::size_t k = 0; k < weights.size(); ++k) out.push_back(detail::summarize(slots[k], observed[k], cfg));
  return out;
}

inline BootstrapResult bootstrap_law(const ResidualFieldLaw& field, const Eigen::VectorXd& z, const Eigen::MatrixXd& w,
                                     double h, const BootstrapConfig& cfg,
                                     const KernelSpec& testing = KernelSpec::testing()) {
  const Eigen::MatrixXd gram = law_gram(field);
  const PairWeights weights(z, w, h, testing);
  const double observed = quadratic_form(gram, weights).t_n;
  return bootstrap_law(gram, std::span<const PairWeights>(&weights, 1), std::span<const double>(&observed, 1), cfg)
      .front();
}

}  // namespace simcheck
