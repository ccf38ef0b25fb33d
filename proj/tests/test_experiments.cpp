#include <cmath>

#include <gtest/gtest.h>

#include "simcheck/experiments.hpp"

namespace simcheck {
namespace {

TEST(MeanModel, NoiseFreeRegressionFunction) {
  Rng rng(41);
  const Dataset d = generate_mean_model({200, 3, 0.0, NoiseKind::HomoscedasticNormal, 1e-12}, rng);
  const Eigen::VectorXd b0 = mean_model_beta(3);
  EXPECT_EQ(b0, Eigen::Vector3d(1, 1, 0));
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double idx = d.x.row(i).dot(b0);
    EXPECT_NEAR(d.y(i) - (idx + 4.0 * std::exp(-idx * idx)), 0.0, 1e-9);
  }
}

TEST(MeanModel, HeteroNoiseCentred) {
  // with sigma = 1 and delta = 0 the residual is the noise itself
  Rng rng(42);
  const Dataset d = generate_mean_model({1000000, 2, 0.0, NoiseKind::HeteroLogNormal, 1.0}, rng);
  const Eigen::VectorXd idx = d.x * mean_model_beta(2);
  const Eigen::VectorXd eps = d.y - idx - 4.0 * (-idx.array().square()).exp().matrix();
  const double mean = eps.mean();
  const double se = std::sqrt((eps.array() - mean).square().mean() / static_cast<double>(eps.size()));
  EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(MeanModel, Reproducible) {
  Rng a(43), b(43);
  const MeanModelConfig cfg{50, 2, 0.5, NoiseKind::HeteroLogNormal, 0.3};
  const Dataset da = generate_mean_model(cfg, a), db = generate_mean_model(cfg, b);
  EXPECT_EQ(da.y, db.y);
  EXPECT_EQ(da.x, db.x);
  EXPECT_THROW(generate_mean_model({5, 2, 0.0, NoiseKind::HomoscedasticNormal, 0.3}, a), InputError);
}

TEST(LawModel, NullConditionalLawIsNormal) {
  Rng rng(44);
  const Dataset d = generate_law_model({10000, 0.0, false}, rng);
  const Eigen::VectorXd r = (d.y - d.x * law_model_beta()) / kLawComponentSd;
  EXPECT_LT(ks_distance_normal({r.data(), r.data() + r.size()}), 0.05);
}

TEST(LawModel, FullMixtureDependsOnRadiusOnly) {
  Rng a(45), b(45);
  const Dataset d = generate_law_model({500, 1.0, false}, a);
  // replay the generator by hand: x1, x2, e1, e2, u per row
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    normal(b);
    normal(b);
    normal(b);
    const double e2 = normal(b);
    unit(b);
    EXPECT_NEAR(d.y(i), d.x.row(i).norm() + kLawComponentSd * e2, 1e-12);
  }
  Rng c(45);
  EXPECT_EQ(generate_law_model({500, 1.0, false}, c).y, d.y);
}

TEST(LevelStudy, ReportShapeAndReproducibility) {
  StudyModel m;
  m.n = 40;
  StudyConfig cfg;
  cfg.B = 19;
  cfg.reps = 4;
  cfg.seed = 7;
  const double cs[] = {0.5, 1.0, 2.0};
  const auto rep = run_level_study(m, cs, cfg);
  ASSERT_EQ(rep.rows.size(), 6u);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.replications + r.failed, 4);
    EXPECT_LE(r.rejections, r.replications);
    EXPECT_EQ(r.seed, 7u);
  }
  cfg.threads = 3;
  const auto again = run_level_study(m, cs, cfg);
  for (std::size_t k = 0; k < rep.rows.size(); ++k) EXPECT_EQ(rep.rows[k].rejections, again.rows[k].rejections);

  m.delta = 0.5;
  EXPECT_THROW(run_level_study(m, cs, cfg), InputError);
}

TEST(PowerStudy, RequiresZeroAndRunsLaw) {
  StudyModel m;
  m.id = ModelId::Law;
  m.n = 40;
  StudyConfig cfg;
  cfg.B = 19;
  cfg.reps = 3;
  const double bad[] = {0.5};
  EXPECT_THROW(run_power_study(m, bad, 1.0, cfg), InputError);
  const double grid[] = {0.0, 0.5};
  const auto rep = run_power_study(m, grid, 1.0, cfg);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_EQ(rep.x_axis, "delta");
  EXPECT_NE(rep.find(0.5, Method::Bootstrap), nullptr);
}

TEST(PerturbationProbe, ZeroMagnitudeIsExact) {
  StudyModel m;
  m.id = ModelId::Law;
  m.n = 60;
  const auto s = perturbation_stability_probe(m, 0.0, 3, 5);
  for (double v : s.relative_change) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.median_abs_change, 0.0);
}

TEST(KsDistance, KnownValues) {
  EXPECT_NEAR(ks_distance_normal({0.0}), 0.5, 1e-15);
  EXPECT_NEAR(median({3.0, 1.0, 2.0, 10.0}), 2.5, 1e-15);
}

}  // namespace
}  // namespace simcheck
