#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "simcheck/bootstrap.hpp"
#include "simcheck/dataset.hpp"
#include "simcheck/index_estimation.hpp"
#include "simcheck/index_geometry.hpp"
#include "simcheck/numeric.hpp"
#include "simcheck/rng.hpp"
#include "simcheck/smoothers.hpp"
#include "simcheck/test_statistics.hpp"

namespace simcheck {

enum class TestKind { Mean, Law };

struct TestConfig {
  double c = 1.0;
  std::optional<double> h_override;
  int B = 499;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  OptimizerConfig optimizer{};
  LawOptions law{};
  MultiplierSource multipliers{};  // test hook, defaults to Mammen draws
};

struct TestReport {
  TestKind kind = TestKind::Mean;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  StatisticOutput statistic;
  double asymptotic_p_value = 1.0;
  bool asymptotic_reject = false;
  BootstrapResult bootstrap;
  FitResult fit;
  double c = 1.0;
  double h = 0.0;
  bool h_overridden = false;
  std::uint64_t seed = 0;
  double alpha = 0.10;
  bool complement_fallback = false;
};

namespace detail {

inline double resolve_bandwidth(const TestConfig& cfg, Eigen::Index n) {
  if (cfg.h_override) {
    if (!(*cfg.h_override > 0.0)) throw InputError("h override must be positive");
    return *cfg.h_override;
  }
  if (!(cfg.c > 0.0)) throw InputError("bandwidth factor c must be positive");
  return default_test_bandwidth(n, cfg.c);
}

inline void check_test_config(const TestConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (cfg.B < 1) throw InputError("B must be at least 1");
}

inline BootstrapConfig bootstrap_config(const TestConfig& cfg) {
  BootstrapConfig b;
  b.replicates = cfg.B;
  b.alpha = cfg.alpha;
  b.seed = splitmix64(cfg.seed ^ 0xB0075EEDULL);
  b.threads = cfg.threads;
  b.optimizer = cfg.optimizer;
  b.optimizer.seed = splitmix64(cfg.seed ^ 0x0F7ULL);
  b.multipliers = cfg.multipliers;
  return b;
}

inline OptimizerConfig fit_optimizer(const TestConfig& cfg) {
  OptimizerConfig o = cfg.optimizer;
  o.seed = splitmix64(cfg.seed ^ 0xF17ULL);
  return o;
}

inline void fill_common(TestReport& r, const Dataset& data, const TestConfig& cfg, double h) {
  r.n = data.n();
  r.p = data.p();
  r.c = cfg.c;
  r.h = h;
  r.h_overridden = cfg.h_override.has_value();
  r.seed = cfg.seed;
  r.alpha = cfg.alpha;
  r.asymptotic_p_value = asymptotic_p_value(r.statistic.t_n);
  r.asymptotic_reject = r.statistic.t_n > normal_quantile(1.0 - cfg.alpha);
}

}  // namespace detail

// Full mean-regression check: index fit on standardized covariates, T_n at
// h = c n^{-2/9}, asymptotic and wild-bootstrap calibration.
inline TestReport run_mean_test(const Dataset& data, const TestConfig& cfg) {
  data.validate();
  detail::check_test_config(cfg);
  const StandardizedCovariates xs = standardize_covariates(data.x);
  const auto starts = detail::default_starts(xs.x, data.y, detail::fit_optimizer(cfg));
  MeanTestInputs in{xs.x, data.y, fit_index_mean(xs.x, data.y, starts, detail::fit_optimizer(cfg))};
  const double h = detail::resolve_bandwidth(cfg, data.n());

  TestReport r;
  r.kind = TestKind::Mean;
  const IndexFrame frame(in.fit.direction);
  r.complement_fallback = frame.complement_fallback_used();
  r.statistic = statistic_mean(Dataset{data.y, xs.x}, frame, in.fit.bandwidth_g, h);
  r.fit = in.fit;
  detail::fill_common(r, data, cfg, h);
  r.bootstrap = bootstrap_mean(in, h, r.statistic.t_n, detail::bootstrap_config(cfg));
  return r;
}

// Conditional-law check: rank pseudo-likelihood fit, L2 Gram of the
// indicator residual fields, multiplier bootstrap.
inline TestReport run_law_test(const Dataset& data, const TestConfig& cfg) {
  data.validate();
  detail::check_test_config(cfg);
  const StandardizedCovariates xs = standardize_covariates(data.x);
  const std::vector<int> ranks = compute_ranks(data.y);
  Eigen::VectorXd rank_vec(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) rank_vec(i) = ranks[static_cast<std::size_t>(i)];
  const OptimizerConfig opt = detail::fit_optimizer(cfg);
  const auto starts = detail::default_starts(xs.x, rank_vec, opt);
  const double gy0 = opt.gy_start > 0.0 ? opt.gy_start : default_gy_start(data.n());
  const FitResult fit = fit_index_law(xs.x, ranks, starts, gy0, opt);
  const double h = detail::resolve_bandwidth(cfg, data.n());

  TestReport r;
  r.kind = TestKind::Law;
  r.fit = fit;
  const IndexFrame frame(fit.direction);
  r.complement_fallback = frame.complement_fallback_used();
  const Projection proj = project(xs.x, frame);
  const ResidualFieldLaw field = law_field_for(data.y, proj.z, fit.bandwidth_g, cfg.law, KernelSpec::smoothing());
  const Eigen::MatrixXd gram = law_gram(field);
  const PairWeights weights(proj.z, proj.w, h);
  r.statistic = quadratic_form(gram, weights);
  detail::fill_common(r, data, cfg, h);
  const double observed = r.statistic.t_n;
  r.bootstrap = bootstrap_law(gram, std::span<const PairWeights>(&weights, 1), std::span<const double>(&observed, 1),
                              detail::bootstrap_config(cfg))
                    .front();
  return r;
}

}  // namespace simcheck
