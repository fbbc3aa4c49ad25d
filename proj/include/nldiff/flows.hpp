// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "nldiff/engine.hpp"
#include "nldiff/grid.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Huber-smoothed unit vector: v / eps inside the eps-ball, v / |v| outside.
Vec2 psi_eps(Vec2 v, double eps);

/// Huber function: r^2 / (2 eps) for r <= eps, r - eps / 2 beyond.
double j_eps(double r, double eps);

/// Perona-Malik diffusivity alpha^2 / (alpha^2 + s).
double pm_g(double s, double alpha);

/// pm_g for s <= alpha^2, constant 1/2 beyond, so that r -> g(|r|^2) r stays
/// monotone.
double pm_g_trunc(double s, double alpha);

/// (1/eps_pen) (v/|v|) (|v| - alpha)^+ : the penalized normal cone of the
/// ball of radius alpha.
Vec2 beta_eps_penalty(Vec2 v, double alpha, double eps_pen);

/// sum_cells j_eps(|grad u|) + (eps/2) |grad u|^2
double tv_eps_energy(const ImageGrid& u, const TvEpsParams& params);

/// sum_cells |grad u|^p / p
double plap_energy(const ImageGrid& u, const PLaplacianParams& params);

/// Energy of the truncated Perona-Malik flux plus optional viscosity; the
/// density is the exact antiderivative of r -> pm_g_trunc(r^2) r.
double pm_energy(const ImageGrid& u, const PeronaMalikParams& params);

/// Convex radial density J(|r|) summed over all gradient cells.
class RadialDensity {
 public:
  virtual ~RadialDensity() = default;
  virtual double value(double r) const = 0;
  /// J'(r) / r, the scalar diffusivity multiplying the gradient.
  virtual double diffusivity(double r) const = 0;
  /// J''(r), possibly regularized where it is unbounded.
  virtual double curvature(double r) const = 0;
};

/// phi(u) = sum over gradient cells of J(|grad u|), with gradient
/// -div(J'(|grad u|) grad u / |grad u|).
class DiffusionEnergy final : public EnergyModel {
 public:
  DiffusionEnergy(std::shared_ptr<const RadialDensity> density, BoundaryCondition bc,
                  FlowModel descriptor);

  double energy(const ImageGrid& u) const override;
  ImageGrid energy_gradient(const ImageGrid& u) const override;
  HessianOperator hessian_at(const ImageGrid& u) const override;
  BoundaryCondition bc() const override { return bc_; }
  FlowModel descriptor() const override { return descriptor_; }

 private:
  std::shared_ptr<const RadialDensity> density_;
  BoundaryCondition bc_;
  FlowModel descriptor_;
};

/// L2 energy of the porous-media model, sum |u|^(a+2) / (a+2). Its
/// H^-1 gradient flow is u_t = laplacian(beta(u)); see porous.hpp.
class PorousEnergy final : public EnergyModel {
 public:
  explicit PorousEnergy(PorousParams params);

  double energy(const ImageGrid& u) const override;
  ImageGrid energy_gradient(const ImageGrid& u) const override;
  HessianOperator hessian_at(const ImageGrid& u) const override;
  BoundaryCondition bc() const override { return BoundaryCondition::Dirichlet; }
  FlowModel descriptor() const override { return params_; }

 private:
  PorousParams params_;
};

/// Energy model for a descriptor. Perona-Malik and porous models are always
/// Dirichlet; `bc` applies to the others.
std::unique_ptr<EnergyModel> make_energy(const FlowModel& model, BoundaryCondition bc);

std::shared_ptr<const RadialDensity> make_density(const FlowModel& model);

/// Density (|r| - alpha)^+^2 / (2 eps_pen), whose flux is beta_eps_penalty.
std::shared_ptr<const RadialDensity> make_penalty_density(double alpha, double eps_pen);

struct Projection {
  ImageGrid image;
  /// c in max|grad v| <= alpha + c * eps_pen (0 when the penalty is inactive).
  double excess_constant = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Approximate projection onto {max |grad v| <= alpha}: solves
/// v - div(beta_eps(grad v)) = f with zero Dirichlet data.
Projection project_K(const ImageGrid& f, double alpha, double eps_pen, const SolverConfig& cfg);

struct PeronaMalikRun {
  Evolution evolution;
  Projection projection;
  /// max |grad u| after the projection (index 0) and after every step.
  std::vector<double> max_gradient;
  /// Number of iterates whose gradient exceeded 1.05 alpha.
  int bound_violations = 0;
};

/// Projects u0 onto the gradient-bounded set, then takes n_steps implicit
/// steps of size h with the truncated Perona-Malik flux. Dirichlet only.
PeronaMalikRun pm_denoise(const ImageGrid& u0, const PeronaMalikParams& params, double h,
                          int n_steps, const SolverConfig& cfg, const StepObserver& observer = {});

struct L1FidelityParams {
  double lambda = 1.0;
  double sign_smooth = 0.05;
};

/// Implicit steps on tv_eps_energy(u) + lambda sum s_delta(u - u0) from u0,
/// stopping once consecutive iterates differ by at most prox_tol. Throws
/// NotConvergedError after n_steps steps without settling.
Evolution l1_tv_restore(const ImageGrid& u0, const TvEpsParams& tv, const L1FidelityParams& fid,
                        int n_steps, double h, const SolverConfig& cfg);

}  // namespace nldiff
