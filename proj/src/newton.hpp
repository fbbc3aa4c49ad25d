// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

// Inexact Newton-CG minimizer shared by the resolvent solvers.

#pragma once

#include <functional>

#include "nldiff/engine.hpp"
#include "nldiff/grid.hpp"

namespace nldiff::detail {

struct Objective {
  std::function<double(const ImageGrid&)> value;
  std::function<ImageGrid(const ImageGrid&)> gradient;
  std::function<HessianOperator(const ImageGrid&)> hessian;
  // Optional extra descent pass run after each Newton step (e.g. a nonlinear
  // Gauss-Seidel sweep). Must not increase `value`.
  std::function<void(ImageGrid&)> sweep;
};

struct NewtonResult {
  ImageGrid x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes a smooth convex objective until |gradient| <= tol. Throws
/// NonFiniteEnergy if the objective is not finite at the start point.
NewtonResult newton_minimize(const Objective& obj, ImageGrid x0, double tol,
                             const SolverConfig& cfg);

/// Conjugate gradients for H d = b from d = 0; stops at
/// |r| <= max(rel_tol |b|, abs_tol) or after max_iters.
ImageGrid conjugate_gradient(const HessianOperator& H, const ImageGrid& b, double rel_tol,
                             double abs_tol, int max_iters);

}  // namespace nldiff::detail
