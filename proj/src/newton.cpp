// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "newton.hpp"

#include <algorithm>
#include <cmath>

namespace nldiff::detail {

ImageGrid conjugate_gradient(const HessianOperator& H, const ImageGrid& b, double rel_tol,
                             double abs_tol, int max_iters) {
  ImageGrid x(b.rows(), b.cols(), b.bc());
  ImageGrid r = b;
  ImageGrid p = r;
  double rr = dot(r, r);
  const double target = std::max(rel_tol * std::sqrt(rr), abs_tol);
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= target) break;
    const ImageGrid hp = H(p);
    const double php = dot(p, hp);
    if (!(php > 0.0)) {
      if (it == 0) return b;
      break;
    }
    const double alpha = rr / php;
    axpy(alpha, p, x);
    axpy(-alpha, hp, r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    auto pv = p.values();
    auto rv = r.values();
    for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = rv[k] + beta * pv[k];
  }
  return x;
}

NewtonResult newton_minimize(const Objective& obj, ImageGrid x0, double tol,
                             const SolverConfig& cfg) {
  NewtonResult res;
  res.x = std::move(x0);
  double f = obj.value(res.x);
  if (!std::isfinite(f)) {
    throw Error(ErrorCode::NonFiniteEnergy, "objective is not finite at the starting point");
  }
  ImageGrid g = obj.gradient(res.x);
  double gn = norm2(g);
  const int n = static_cast<int>(res.x.size());
  const int cg_cap = std::clamp(4 * n, 200, 5000);

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (!std::isfinite(gn)) {
      throw Error(ErrorCode::NonFiniteEnergy, "objective gradient is not finite");
    }
    if (gn <= tol) {
      res.converged = true;
      break;
    }
    res.iterations = it + 1;
    const HessianOperator H = obj.hessian(res.x);
    ImageGrid d = conjugate_gradient(H, -1.0 * g, cfg.linear_tol, 0.1 * tol, cg_cap);
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      d = -1.0 * g;
      slope = -gn * gn;
    }

    // Armijo backtracking. Near the optimum the decrease drops below the
    // rounding noise of f, so a step inside that noise band is also accepted
    // when it shrinks the gradient.
    const double noise = 64.0 * 2.220446049250313e-16 * (1.0 + std::abs(f));
    double t = cfg.damping;
    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
      ImageGrid xt = res.x;
      axpy(t, d, xt);
      const double ft = obj.value(xt);
      if (!std::isfinite(ft)) continue;
      if (ft <= f + 1e-4 * t * slope) {
        res.x = std::move(xt);
        f = ft;
        g = obj.gradient(res.x);
        accepted = true;
      } else if (ft <= f + noise) {
        ImageGrid gt = obj.gradient(xt);
        if (norm2(gt) < gn) {
          res.x = std::move(xt);
          f = ft;
          g = std::move(gt);
          accepted = true;
        }
      }
    }
    if (obj.sweep) {
      obj.sweep(res.x);
      f = obj.value(res.x);
      g = obj.gradient(res.x);
      accepted = true;
    }
    const double gn_new = norm2(g);
    if (!accepted) break;
    gn = gn_new;
  }
  if (!res.converged && gn <= tol) res.converged = true;
  res.residual = gn;
  return res;
}

}  // namespace nldiff::detail
