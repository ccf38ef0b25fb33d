#pragma once

#include <cmath>

#include <Eigen/Core>

#include "simcheck/errors.hpp"

namespace simcheck {

enum class KernelFamily { GaussianDensity };

// Smoothing kernels build the residual fields and the index estimators,
// testing kernels weight the pairs of the quadratic form.
enum class KernelPurpose { Smoothing, Testing };

struct KernelSpec {
  KernelFamily family = KernelFamily::GaussianDensity;
  KernelPurpose purpose = KernelPurpose::Smoothing;

  static constexpr KernelSpec smoothing() { return {KernelFamily::GaussianDensity, KernelPurpose::Smoothing}; }
  static constexpr KernelSpec testing() { return {KernelFamily::GaussianDensity, KernelPurpose::Testing}; }
};

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;  // (2*pi)^{-1/2}

namespace detail {

// Unchecked hot-path evaluation. Every family must be symmetric, integrate to
// one and have a strictly positive Fourier transform.
inline double kernel_unchecked(KernelFamily family, double u) noexcept {
  switch (family) {
    case KernelFamily::GaussianDensity:
      return kInvSqrt2Pi * std::exp(-0.5 * u * u);
  }
  return 0.0;
}

}  // namespace detail

// Unscaled kernel value k(u); bandwidth factors belong to the caller.
inline double eval_kernel(const KernelSpec& spec, double u) {
  if (!std::isfinite(u)) throw InputError("eval_kernel: non-finite argument");
  return detail::kernel_unchecked(spec.family, u);
}

// phi(w) = exp(-|w|^2 / 2), the weight on the complement coordinates.
template <typename Derived>
double eval_phi(const Eigen::MatrixBase<Derived>& w) {
  if (!w.allFinite()) throw InputError("eval_phi: non-finite argument");
  return std::exp(-0.5 * w.squaredNorm());
}

}  // namespace simcheck
