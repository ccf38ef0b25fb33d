#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "simcheck/kernel.hpp"

namespace simcheck {
namespace {

const KernelSpec kGauss = KernelSpec::smoothing();

TEST(Kernel, GaussianAtZero) { EXPECT_DOUBLE_EQ(eval_kernel(kGauss, 0.0), 0.3989422804014327); }

TEST(Kernel, SymmetricClosedForm) {
  EXPECT_EQ(eval_kernel(kGauss, 1.7), eval_kernel(kGauss, -1.7));
  EXPECT_NEAR(eval_kernel(kGauss, 1.7), 0.0940490774, 1e-10);
  EXPECT_NEAR(eval_kernel(kGauss, 1.7), kInvSqrt2Pi * std::exp(-1.445), 1e-16);
}

TEST(Kernel, IntegratesToOneByTrapezoid) {
  const double step = 1e-3;
  double sum = 0.0;
  for (int k = -10000; k <= 10000; ++k) {
    const double w = (k == -10000 || k == 10000) ? 0.5 : 1.0;
    sum += w * eval_kernel(kGauss, k * step);
  }
  EXPECT_NEAR(sum * step, 1.0, 1e-6);
}

TEST(Kernel, RejectsNonFinite) {
  EXPECT_THROW(eval_kernel(kGauss, std::numeric_limits<double>::quiet_NaN()), InputError);
  EXPECT_THROW(eval_kernel(kGauss, std::numeric_limits<double>::infinity()), InputError);
  Eigen::Vector2d w(1.0, std::numeric_limits<double>::infinity());
  EXPECT_THROW(eval_phi(w), InputError);
}

TEST(Kernel, RandomSymmetryPositivityAndDecay) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double u = normal(rng), v = normal(rng);
    EXPECT_EQ(eval_kernel(kGauss, u), eval_kernel(kGauss, -u));
    EXPECT_GT(eval_kernel(kGauss, u), 0.0);
    if (std::abs(u) <= std::abs(v)) EXPECT_GE(eval_kernel(kGauss, u), eval_kernel(kGauss, v));
  }
}

TEST(Phi, ClosedFormsAndNormInvariance) {
  EXPECT_EQ(eval_phi(Eigen::Vector3d::Zero()), 1.0);
  EXPECT_NEAR(eval_phi(Eigen::Vector2d(1.0, 1.0)), std::exp(-1.0), 1e-15);
  EXPECT_EQ(eval_phi(Eigen::Vector3d(1, 1, 0)), eval_phi(Eigen::Vector3d(0, 1, 1)));
  const double far = eval_phi(Eigen::Vector2d(20.0, 0.0));
  EXPECT_GE(far, 0.0);
  EXPECT_LE(eval_phi(Eigen::Vector2d(0.3, -0.2)), 1.0);
}

}  // namespace
}  // namespace simcheck
