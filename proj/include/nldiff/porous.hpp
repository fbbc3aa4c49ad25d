// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nldiff/engine.hpp"
#include "nldiff/grid.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

/// beta(r) = |r|^a r
double beta_pm(double r, double a);

/// Inverse of beta_pm: sgn(w) |w|^(1/(1+a)).
double gamma_pm(double w, double a);

/// <(-laplacian_Dirichlet)^-1 u, u>
double h_minus1_norm_sq(const ImageGrid& u, double tol);

/// <(-laplacian_Dirichlet)^-1 u, v>
double h_minus1_dot(const ImageGrid& u, const ImageGrid& v, double tol);

struct ObservedPixel {
  int row = 0;
  int col = 0;
  double weight = 0.0;
  double value = 0.0;
};

/// Point observations on a rows x cols grid; pixel k carries the load
/// weight * value.
struct SparseObservation {
  int rows = 0;
  int cols = 0;
  std::vector<ObservedPixel> points;
};

/// Throws InvalidArgument for out-of-range indices, nonpositive weights or
/// duplicate pixels, and EmptyObservation when there are no points.
void validate(const SparseObservation& obs);

/// Point-mass load image (Dirichlet tag).
ImageGrid observation_load(const SparseObservation& obs);

/// Reads `row,col,weight,value` CSV (header line required).
SparseObservation read_sparse_observation_csv(const std::string& path, int rows, int cols);

/// One implicit step u - h laplacian(beta(u)) = u_prev with beta(u) zero on
/// the Dirichlet ghost ring. Solved through the dual variable w = beta(u):
///   gamma(w) - h laplacian(w) = u_prev.
std::pair<ImageGrid, StepReport> porous_resolvent(const ImageGrid& u_prev, double h,
                                                  const PorousParams& params,
                                                  const SolverConfig& cfg);

/// n_steps porous resolvent steps of size T / n_steps starting from f.
Evolution porous_evolve(const ImageGrid& f, double T, int n_steps, const PorousParams& params,
                        const SolverConfig& cfg, const StepObserver& observer = {});

struct PorousRestoration {
  ImageGrid u;  // gamma(w)
  ImageGrid w;  // beta(u), zero on the Dirichlet ghost ring
  double residual = 0.0;
  int iterations = 0;
};

/// Solves -laplacian(w) + gamma(w) = f, u = gamma(w).
PorousRestoration porous_stationary_restore(const ImageGrid& f, const PorousParams& params,
                                            const SolverConfig& cfg);
PorousRestoration porous_stationary_restore(const SparseObservation& obs,
                                            const PorousParams& params, const SolverConfig& cfg);

/// |u - h laplacian_Dirichlet(beta(u)) - u_prev|_2
double porous_primal_residual(const ImageGrid& u, const ImageGrid& u_prev, double h,
                              const PorousParams& params);

}  // namespace nldiff
