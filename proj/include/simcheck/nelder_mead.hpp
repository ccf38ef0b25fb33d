#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace simcheck {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-8;  // spread of objective values over the simplex
  int max_evals = 2000;
  double initial_step = 0.1;  // relative to max(|x0_k|, 1) per coordinate
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

// Downhill simplex minimization. `fold` maps every candidate point back into
// the admissible region (used for sign-symmetric objectives) before it is
// evaluated; pass an identity to disable.
template <typename Objective, typename Fold>
NelderMeadResult nelder_mead(Objective&& objective, const Eigen::VectorXd& start, const NelderMeadOptions& opt,
                             Fold&& fold) {
  const Eigen::Index d = start.size();
  const auto npts = static_cast<std::size_t>(d + 1);
  NelderMeadResult res;

  auto eval = [&](Eigen::VectorXd& x) {
    fold(x);
    ++res.evals;
    const double v = objective(static_cast<const Eigen::VectorXd&>(x));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> pts(npts, start);
  std::vector<double> vals(npts);
  vals[0] = eval(pts[0]);
  for (Eigen::Index k = 0; k < d; ++k) {
    auto& p = pts[static_cast<std::size_t>(k + 1)];
    p(k) += opt.initial_step * std::max(std::abs(start(k)), 1.0);
    vals[static_cast<std::size_t>(k + 1)] = eval(p);
  }

  std::vector<std::size_t> order(npts);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2(npts);
    std::vector<double> v2(npts);
    for (std::size_t k = 0; k < npts; ++k) {
      p2[k] = std::move(pts[order[k]]);
      v2[k] = vals[order[k]];
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  while (true) {
    sort_simplex();
    const double spread = vals.back() - vals.front();
    if (std::isfinite(spread) && spread < opt.tolerance) {
      res.converged = true;
      break;
    }
    if (res.evals >= opt.max_evals) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k + 1 < npts; ++k) centroid += pts[k];
    centroid /= static_cast<double>(d);
    const Eigen::VectorXd& worst = pts.back();
    const double f_best = vals.front();
    const double f_second = vals[npts - 2];
    const double f_worst = vals.back();

    Eigen::VectorXd reflected = centroid + opt.reflection * (centroid - worst);
    const double f_r = eval(reflected);
    if (f_r < f_best) {
      Eigen::VectorXd expanded = centroid + opt.expansion * (reflected - centroid);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        pts.back() = std::move(expanded);
        vals.back() = f_e;
      } else {
        pts.back() = std::move(reflected);
        vals.back() = f_r;
      }
      continue;
    }
    if (f_r < f_second) {
      pts.back() = std::move(reflected);
      vals.back() = f_r;
      continue;
    }
    if (f_r < f_worst) {
      Eigen::VectorXd outside = centroid + opt.contraction * (reflected - centroid);
      const double f_c = eval(outside);
      if (f_c <= f_r) {
        pts.back() = std::move(outside);
        vals.back() = f_c;
        continue;
      }
    } else {
      Eigen::VectorXd inside = centroid + opt.contraction * (worst - centroid);
      const double f_cc = eval(inside);
      if (f_cc < f_worst) {
        pts.back() = std::move(inside);
        vals.back() = f_cc;
        continue;
      }
    }
    for (std::size_t k = 1; k < npts; ++k) {
      pts[k] = pts[0] + opt.shrink * (pts[k] - pts[0]);
      vals[k] = eval(pts[k]);
    }
  }
  res.x = pts.front();
  res.value = vals.front();
  return res;
}

template <typename Objective>
NelderMeadResult nelder_mead(Objective&& objective, const Eigen::VectorXd& start, const NelderMeadOptions& opt = {}) {
  return nelder_mead(std::forward<Objective>(objective), start, opt, [](Eigen::VectorXd&) {});
}

}  // namespace simcheck
