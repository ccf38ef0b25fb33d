#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "simcheck/bootstrap.hpp"
#include "simcheck/dataset.hpp"
#include "simcheck/index_estimation.hpp"
#include "simcheck/index_geometry.hpp"
#include "simcheck/numeric.hpp"
#include "simcheck/parallel.hpp"
#include "simcheck/pipeline.hpp"
#include "simcheck/rng.hpp"
#include "simcheck/test_statistics.hpp"

namespace simcheck {

enum class NoiseKind { HomoscedasticNormal, HeteroLogNormal };

// Y = X'b0 + 4 exp(-(X'b0)^2) + delta |X| + sigma eps, b0 = (1, 1, 0, ..., 0).
struct MeanModelConfig {
  int n = 100;
  int p = 2;
  double delta = 0.0;
  NoiseKind noise = NoiseKind::HomoscedasticNormal;
  double sigma = 0.3;

  void validate() const {
    if (n < 10) throw InputError("mean model: n must be at least 10");
    if (p < 2) throw InputError("mean model: p must be at least 2");
    if (!(delta >= 0.0) || !(sigma > 0.0)) throw InputError("mean model: delta >= 0 and sigma > 0 required");
  }
};

// Mixture (1 - delta) N(X'b0, 0.09) + delta N(|X|, 0.09), X bivariate normal,
// b0 = (1, 1)/sqrt(2). `convex` switches to the convex combination of two
// independent normal draws instead of a component choice.
struct LawModelConfig {
  int n = 200;
  double delta = 0.0;
  bool convex = false;

  void validate() const {
    if (n < 10) throw InputError("law model: n must be at least 10");
    if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("law model: delta must lie in [0, 1]");
  }
};

inline constexpr double kLawComponentSd = 0.3;  // variance 0.09

inline Eigen::VectorXd mean_model_beta(int p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b(0) = 1.0;
  b(1) = 1.0;
  return b;
}

inline Eigen::VectorXd law_model_beta() { return Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0); }

inline Dataset generate_mean_model(const MeanModelConfig& cfg, Rng& rng) {
  cfg.validate();
  std::normal_distribution<double> normal;
  const Eigen::VectorXd b0 = mean_model_beta(cfg.p);
  const double log_normal_mean = std::sqrt(std::exp(1.0));
  Dataset d;
  d.x.resize(cfg.n, cfg.p);
  d.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.p; ++j) d.x(i, j) = normal(rng);
    const double index = d.x.row(i).dot(b0);
    double eps = normal(rng);
    if (cfg.noise == NoiseKind::HeteroLogNormal)
      eps = (std::exp(eps) - log_normal_mean) * std::sqrt((1.0 + d.x(i, 1) * d.x(i, 1)) / 2.0);
    d.y(i) = index + 4.0 * std::exp(-index * index) + cfg.delta * d.x.row(i).norm() + cfg.sigma * eps;
  }
  return d;
}

inline Dataset generate_law_model(const LawModelConfig& cfg, Rng& rng) {
  cfg.validate();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const Eigen::VectorXd b0 = law_model_beta();
  Dataset d;
  d.x.resize(cfg.n, 2);
  d.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    d.x(i, 0) = normal(rng);
    d.x(i, 1) = normal(rng);
    const double index = d.x.row(i).dot(b0);
    const double radius = d.x.row(i).norm();
    const double e1 = normal(rng);
    const double e2 = normal(rng);
    const double u = unit(rng);
    if (cfg.convex) {
      d.y(i) = (1.0 - cfg.delta) * (index + kLawComponentSd * e1) + cfg.delta * (radius + kLawComponentSd * e2);
    } else {
      d.y(i) = u < cfg.delta ? radius + kLawComponentSd * e2 : index + kLawComponentSd * e1;
    }
  }
  return d;
}

enum class ModelId { MeanHomo, MeanHetero, Law };

inline std::string model_name(ModelId id) {
  switch (id) {
    case ModelId::MeanHomo: return "mean-homo";
    case ModelId::MeanHetero: return "mean-hetero";
    case ModelId::Law: return "law";
  }
  return "?";
}

struct StudyModel {
  ModelId id = ModelId::MeanHomo;
  int n = 100;
  int p = 2;  // forced to 2 for the law model
  double delta = 0.0;
  double sigma = 0.3;
  bool law_convex = false;

  bool is_law() const { return id == ModelId::Law; }
  int dim() const { return is_law() ? 2 : p; }
};

inline Dataset generate(const StudyModel& m, Rng& rng) {
  if (m.is_law()) return generate_law_model({m.n, m.delta, m.law_convex}, rng);
  return generate_mean_model(
      {m.n, m.p, m.delta, m.id == ModelId::MeanHetero ? NoiseKind::HeteroLogNormal : NoiseKind::HomoscedasticNormal,
       m.sigma},
      rng);
}

// True index direction (unit norm) of a study model under the null.
inline Direction true_direction(const StudyModel& m) {
  return normalize_direction(m.is_law() ? law_model_beta() : mean_model_beta(m.p));
}

// Smoothing bandwidth g when the direction is known: the estimation
// criterion of the matching test profiled over the index scale alone.
inline double known_index_bandwidth(const StudyModel& m, const Dataset& d, const Direction& dir,
                                    const OptimizerConfig& cfg = {}) {
  if (m.is_law())
    return profile_bandwidth_law(d.x, compute_ranks(d.y), dir, default_gy_start(d.n()), cfg).bandwidth_g;
  return profile_bandwidth_mean(d.x, d.y, dir, cfg).bandwidth_g;
}

// T_n at a given direction on raw covariates.
inline StatisticOutput statistic_at(const StudyModel& m, const Dataset& d, const Direction& dir, double g, double h) {
  const IndexFrame frame(dir);
  return m.is_law() ? statistic_law(d, frame, g, h) : statistic_mean(d, frame, g, h);
}

enum class Method { Asymptotic, Bootstrap };

inline std::string method_name(Method m) { return m == Method::Asymptotic ? "asymptotic" : "bootstrap"; }

struct MonteCarloRow {
  std::string model;
  int n = 0;
  int p = 0;
  double delta = 0.0;
  double c = 1.0;
  Method method = Method::Asymptotic;
  int rejections = 0;
  int replications = 0;  // successful replications
  int failed = 0;
  std::uint64_t seed = 0;

  double rate() const { return replications > 0 ? static_cast<double>(rejections) / replications : 0.0; }
};

struct MonteCarloReport {
  std::vector<MonteCarloRow> rows;
  std::uint64_t seed = 0;
  // Which column varies across rows: "c" for level studies, "delta" for power.
  std::string x_axis = "c";

  const MonteCarloRow* find(double x, Method method) const {
    for (const auto& r : rows)
      if (r.method == method && (x_axis == "c" ? r.c : r.delta) == x) return &r;
    return nullptr;
  }
};

struct StudyConfig {
  int B = 199;
  int reps = 200;
  double alpha = 0.10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  OptimizerConfig optimizer{};
};

namespace detail {

struct ReplicateOutcome {
  std::vector<bool> asymptotic;  // per bandwidth
  std::vector<bool> bootstrap;
};

// One Monte Carlo replication: simulate, fit, test at every h, bootstrap.
inline ReplicateOutcome run_replicate(const StudyModel& m, std::span<const double> cs, const StudyConfig& cfg,
                                      std::uint64_t stream) {
  Rng rng = child_rng(cfg.seed, stream, 1);
  const Dataset data = generate(m, rng);
  const StandardizedCovariates xs = standardize_covariates(data.x);
  OptimizerConfig opt = cfg.optimizer;
  opt.seed = splitmix64(cfg.seed ^ splitmix64(stream + 17));
  BootstrapConfig bcfg;
  bcfg.replicates = cfg.B;
  bcfg.alpha = cfg.alpha;
  bcfg.seed = splitmix64(cfg.seed ^ splitmix64(stream + 29));
  bcfg.threads = 1;
  bcfg.optimizer = opt;

  std::vector<double> hs;
  for (double c : cs) hs.push_back(default_test_bandwidth(m.n, c));
  const double z_crit = normal_quantile(1.0 - cfg.alpha);
  ReplicateOutcome out;
  std::vector<double> observed(hs.size());
  std::vector<BootstrapResult> boot;

  if (m.is_law()) {
    const std::vector<int> ranks = compute_ranks(data.y);
    Eigen::VectorXd rank_vec(m.n);
    for (int i = 0; i < m.n; ++i) rank_vec(i) = ranks[static_cast<std::size_t>(i)];
    const FitResult fit =
        fit_index_law(xs.x, ranks, default_starts(xs.x, rank_vec, opt), default_gy_start(m.n), opt);
    const IndexFrame frame(fit.direction);
    const Projection proj = project(xs.x, frame);
    const Eigen::MatrixXd gram = law_gram(residual_field_law(ranks, proj.z, fit.bandwidth_g));
    std::vector<PairWeights> weights;
    for (std::size_t k = 0; k < hs.size(); ++k) {
      weights.emplace_back(proj.z, proj.w, hs[k]);
      observed[k] = quadratic_form(gram, weights.back()).t_n;
    }
    boot = bootstrap_law(gram, weights, observed, bcfg);
  } else {
    MeanTestInputs in{xs.x, data.y, fit_index_mean(xs.x, data.y, default_starts(xs.x, data.y, opt), opt)};
    const IndexFrame frame(in.fit.direction);
    const Projection proj = project(xs.x, frame);
    const ResidualFieldMean field = residual_field_mean(data.y, proj.z, in.fit.bandwidth_g);
    const Eigen::MatrixXd inner = field.values * field.values.transpose();
    for (std::size_t k = 0; k < hs.size(); ++k)
      observed[k] = quadratic_form(inner, PairWeights(proj.z, proj.w, hs[k])).t_n;
    boot = bootstrap_mean(in, hs, observed, bcfg);
  }
  for (std::size_t k = 0; k < hs.size(); ++k) {
    out.asymptotic.push_back(observed[k] > z_crit);
    out.bootstrap.push_back(boot[k].reject());
  }
  return out;
}

inline void tally(MonteCarloReport& report, const StudyModel& m, std::span<const double> cs,
                  const std::vector<std::optional<ReplicateOutcome>>& outcomes, const StudyConfig& cfg) {
  for (std::size_t k = 0; k < cs.size(); ++k) {
    for (Method method : {Method::Asymptotic, Method::Bootstrap}) {
      MonteCarloRow row{model_name(m.id), m.n, m.dim(), m.delta, cs[k], method, 0, 0, 0, cfg.seed};
      for (const auto& o : outcomes) {
        if (!o) {
          ++row.failed;
          continue;
        }
        ++row.replications;
        const bool rej = method == Method::Asymptotic ? o->asymptotic[k] : o->bootstrap[k];
        row.rejections += rej ? 1 : 0;
      }
      report.rows.push_back(row);
    }
  }
}

inline std::vector<std::optional<ReplicateOutcome>> run_replicates(const StudyModel& m, std::span<const double> cs,
                                                                   const StudyConfig& cfg, std::uint64_t stream_base) {
  std::vector<std::optional<ReplicateOutcome>> outcomes(static_cast<std::size_t>(cfg.reps));
  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t r) {
    try {
      outcomes[r] = run_replicate(m, cs, cfg, stream_base + r);
    } catch (const Error&) {
      outcomes[r].reset();
    }
  });
  return outcomes;
}

inline void check_study(const StudyConfig& cfg) {
  if (cfg.reps < 1 || cfg.B < 1) throw InputError("study: reps and B must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("study: alpha must lie in (0, 1)");
}

}  // namespace detail

// Rejection rates under the null for every bandwidth factor c; replications
// are paired across c (same simulated sample and fit).
inline MonteCarloReport run_level_study(const StudyModel& model, std::span<const double> c_grid,
                                        const StudyConfig& cfg) {
  detail::check_study(cfg);
  if (model.delta != 0.0) throw InputError("level study: model must satisfy the null (delta = 0)");
  if (c_grid.empty()) throw InputError("level study: empty c grid");
  for (double c : c_grid)
    if (!(c > 0.0)) throw InputError("level study: bandwidth factors must be positive");
  MonteCarloReport report;
  report.seed = cfg.seed;
  report.x_axis = "c";
  const auto outcomes = detail::run_replicates(model, c_grid, cfg, 0);
  detail::tally(report, model, c_grid, outcomes, cfg);
  return report;
}

// Rejection rates along a grid of deviations delta at a fixed c.
inline MonteCarloReport run_power_study(const StudyModel& model, std::span<const double> delta_grid, double c,
                                        const StudyConfig& cfg) {
  detail::check_study(cfg);
  if (std::find(delta_grid.begin(), delta_grid.end(), 0.0) == delta_grid.end())
    throw InputError("power study: delta grid must include 0");
  if (!(c > 0.0)) throw InputError("power study: c must be positive");
  MonteCarloReport report;
  report.seed = cfg.seed;
  report.x_axis = "delta";
  const double cs[] = {c};
  for (std::size_t k = 0; k < delta_grid.size(); ++k) {
    StudyModel m = model;
    m.delta = delta_grid[k];
    const auto outcomes = detail::run_replicates(m, cs, cfg, (k + 1) * 1000003ULL);
    detail::tally(report, m, cs, outcomes, cfg);
  }
  return report;
}

// T_n under the null at the known true direction (no estimation), one value
// per replication.
inline std::vector<double> null_statistics_known_index(const StudyModel& model, double c, int reps,
                                                       std::uint64_t seed, unsigned threads = 1) {
  std::vector<double> out(static_cast<std::size_t>(reps));
  const Direction dir = true_direction(model);
  parallel_for(out.size(), threads, [&](std::size_t r) {
    Rng rng = child_rng(seed, r, 3);
    const Dataset d = generate(model, rng);
    out[r] = statistic_at(model, d, dir, known_index_bandwidth(model, d, dir), default_test_bandwidth(model.n, c)).t_n;
  });
  return out;
}

struct PerturbationSummary {
  std::vector<double> abs_change;       // |T(perturbed) - T(b0)|
  std::vector<double> relative_change;  // abs_change / |T(b0)|
  double median_abs_change = 0.0;
  double median_relative_change = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Compares T_n at the true direction with T_n at b0 + magnitude * u for a
// random unit u, renormalized; g (selected at b0) and h are held fixed. Replication r uses
// the same sample and u for every magnitude, so calls with different
// magnitudes are paired.
inline PerturbationSummary perturbation_stability_probe(const StudyModel& model, double magnitude, int reps,
                                                        std::uint64_t seed, double c = 1.0, unsigned threads = 1) {
  if (reps < 1) throw InputError("perturbation probe: reps must be positive");
  if (!(magnitude >= 0.0)) throw InputError("perturbation probe: magnitude must be nonnegative");
  PerturbationSummary s;
  s.abs_change.resize(static_cast<std::size_t>(reps));
  s.relative_change.resize(static_cast<std::size_t>(reps));
  const Direction b0 = true_direction(model);
  const double h = default_test_bandwidth(model.n, c);
  parallel_for(s.abs_change.size(), threads, [&](std::size_t r) {
    Rng rng = child_rng(seed, r, 4);
    const Dataset d = generate(model, rng);
    std::normal_distribution<double> normal;
    Eigen::VectorXd u(model.dim());
    for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = normal(rng);
    u.normalize();
    const double g = known_index_bandwidth(model, d, b0);
    const double t0 = statistic_at(model, d, b0, g, h).t_n;
    const double t1 =
        magnitude == 0.0 ? t0 : statistic_at(model, d, normalize_direction(b0.beta() + magnitude * u), g, h).t_n;
    s.abs_change[r] = std::abs(t1 - t0);
    s.relative_change[r] = t0 != 0.0 ? s.abs_change[r] / std::abs(t0) : 0.0;
  });
  s.median_abs_change = median(s.abs_change);
  s.median_relative_change = median(s.relative_change);
  return s;
}

// Kolmogorov-Smirnov distance between a sample and N(0, 1).
inline double ks_distance_normal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = normal_cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace simcheck
